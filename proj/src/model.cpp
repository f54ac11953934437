#include "matchcon/model.hpp"

#include <cmath>

namespace matchcon {

double wrap_angle(double a) {
    double r = std::remainder(a, 2.0 * M_PI);
    if (r <= -M_PI) {
        r += 2.0 * M_PI;
    }
    return r;
}

Model assemble_model(const ConverterParams& conv, const LineParams& line,
                     const Topology& topo, double omega_n) {
    conv.validate();
    if (topo.edge_count() > 0) {
        line.validate();
    }
    topo.validate();
    if (!(omega_n > 0.0)) {
        throw ParameterError("omega_n must be positive");
    }

    Model mdl;
    mdl.conv = conv;
    mdl.line = line;
    mdl.topo = topo;
    mdl.omega_n = omega_n;
    mdl.n = topo.n;
    mdl.m = topo.edge_count();
    mdl.N = 6 * mdl.n + 2 * mdl.m;

    const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d j = skew_j();
    mdl.z_r = conv.r_filter * id + conv.l_filter * omega_n * j;
    mdl.z_c = conv.g_load * id + (conv.c_filter * omega_n + conv.b_load) * j;
    mdl.z_l = line.r_line * id + line.l_line * omega_n * j;

    mdl.incidence = Eigen::MatrixXd::Zero(mdl.n, mdl.m);
    for (int e = 0; e < mdl.m; ++e) {
        mdl.incidence(topo.edges[e].first, e) = 1.0;
        mdl.incidence(topo.edges[e].second, e) = -1.0;
    }
    mdl.coupling = Eigen::MatrixXd::Zero(2 * mdl.n, 2 * mdl.m);
    for (int e = 0; e < mdl.m; ++e) {
        for (int k = 0; k < mdl.n; ++k) {
            if (mdl.incidence(k, e) != 0.0) {
                mdl.coupling.block<2, 2>(2 * k, 2 * e) = mdl.incidence(k, e) * id;
            }
        }
    }
    return mdl;
}

void vector_field_packed(const Model& model, const Eigen::VectorXd& z,
                         const Eigen::VectorXd& u, Eigen::VectorXd& out) {
    const int n = model.n, m = model.m;
    if (z.size() != model.N || u.size() != model.N) {
        throw ShapeError("vector_field: dimension mismatch");
    }
    out.resize(model.N);
    const auto& c = model.conv;
    const double half_mu = 0.5 * c.mu;

    const auto gamma = z.segment(0, n);
    const auto vdc = z.segment(n, n);
    const auto i_f = z.segment(2 * n, 2 * n);
    const auto v_c = z.segment(4 * n, 2 * n);
    const auto i_l = z.segment(6 * n, 2 * m);

    // angle and DC rows
    for (int k = 0; k < n; ++k) {
        const Eigen::Vector2d r = modulation_vector(gamma[k]);
        const Eigen::Vector2d ik = i_f.segment<2>(2 * k);
        out[k] = c.eta * vdc[k];
        out[n + k] = (-c.k_p * vdc[k] - half_mu * r.dot(ik) + u[n + k]) / c.c_dc;
    }
    // filter currents
    for (int k = 0; k < n; ++k) {
        const Eigen::Vector2d r = modulation_vector(gamma[k]);
        out.segment<2>(2 * n + 2 * k) =
            (-model.z_r * i_f.segment<2>(2 * k) + half_mu * r * (vdc[k] + c.v_dc_star) -
             v_c.segment<2>(2 * k)) /
            c.l_filter;
    }
    // capacitor voltages
    Eigen::VectorXd net = model.coupling * i_l; // 2n
    for (int k = 0; k < n; ++k) {
        out.segment<2>(4 * n + 2 * k) =
            (-model.z_c * v_c.segment<2>(2 * k) - net.segment<2>(2 * k) +
             i_f.segment<2>(2 * k)) /
            c.c_filter;
    }
    // line currents
    if (m > 0) {
        Eigen::VectorXd drop = model.coupling.transpose() * v_c; // 2m
        for (int e = 0; e < m; ++e) {
            out.segment<2>(6 * n + 2 * e) =
                (-model.z_l * i_l.segment<2>(2 * e) + drop.segment<2>(2 * e)) /
                model.line.l_line;
        }
    }
}

Eigen::VectorXd vector_field(const Model& model, const SystemState& z,
                             const Eigen::VectorXd& u) {
    Eigen::VectorXd out;
    vector_field_packed(model, z.pack(), u, out);
    return out;
}

SystemState group_action(const SystemState& z, double theta) {
    SystemState out = z;
    out.gamma.array() += theta;
    const Eigen::Matrix2d r = rotation2(theta);
    for (int k = 0; k < z.nodes(); ++k) {
        out.i_f.segment<2>(2 * k) = r * z.i_f.segment<2>(2 * k);
        out.v_c.segment<2>(2 * k) = r * z.v_c.segment<2>(2 * k);
    }
    for (int e = 0; e < z.lines(); ++e) {
        out.i_line.segment<2>(2 * e) = r * z.i_line.segment<2>(2 * e);
    }
    return out;
}

Eigen::VectorXd rotate_stacked(const Eigen::VectorXd& w, double theta, int n, int m) {
    if (w.size() != 6 * n + 2 * m) {
        throw ShapeError("rotate_stacked: dimension mismatch");
    }
    Eigen::VectorXd out = w;
    const Eigen::Matrix2d r = rotation2(theta);
    for (int b = 0; b < 2 * n + m; ++b) {
        out.segment<2>(2 * n + 2 * b) = r * w.segment<2>(2 * n + 2 * b);
    }
    return out;
}

namespace {

// Squared mismatch between z1 and the theta-shifted copy of z2.
double mismatch_sq(const SystemState& z1, const SystemState& z2, double theta,
                   const Eigen::VectorXd* w) {
    const int n = z1.nodes(), m = z1.lines();
    const Eigen::Matrix2d r = rotation2(theta);
    double acc = 0.0;
    int idx = 0;
    auto weight = [&](int i) { return w ? (*w)[i] : 1.0; };
    for (int k = 0; k < n; ++k, ++idx) {
        const double d = wrap_angle(z1.gamma[k] - z2.gamma[k] - theta);
        acc += weight(idx) * d * d;
    }
    for (int k = 0; k < n; ++k, ++idx) {
        const double d = z1.v_dc_tilde[k] - z2.v_dc_tilde[k];
        acc += weight(idx) * d * d;
    }
    auto add_pair = [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        const Eigen::Vector2d d = a - r * b;
        acc += weight(idx) * d[0] * d[0] + weight(idx + 1) * d[1] * d[1];
        idx += 2;
    };
    for (int k = 0; k < n; ++k) {
        add_pair(z1.i_f.segment<2>(2 * k), z2.i_f.segment<2>(2 * k));
    }
    for (int k = 0; k < n; ++k) {
        add_pair(z1.v_c.segment<2>(2 * k), z2.v_c.segment<2>(2 * k));
    }
    for (int e = 0; e < m; ++e) {
        add_pair(z1.i_line.segment<2>(2 * e), z2.i_line.segment<2>(2 * e));
    }
    return acc;
}

} // namespace

QuotientDistanceResult quotient_distance(const SystemState& z1, const SystemState& z2,
                                         const std::optional<Eigen::VectorXd>& weight,
                                         int grid_points) {
    if (z1.nodes() != z2.nodes() || z1.lines() != z2.lines()) {
        throw ShapeError("quotient_distance: dimension mismatch");
    }
    const Eigen::VectorXd* w = weight ? &*weight : nullptr;
    if (w && w->size() != z1.dim()) {
        throw ShapeError("quotient_distance: weight dimension mismatch");
    }

    // dense grid over S^1
    double best_theta = 0.0;
    double best = std::numeric_limits<double>::infinity();
    const double step = 2.0 * M_PI / grid_points;
    for (int g = 0; g < grid_points; ++g) {
        const double theta = -M_PI + g * step;
        const double c = mismatch_sq(z1, z2, theta, w);
        if (c < best) {
            best = c;
            best_theta = theta;
        }
    }

    // golden-section refinement on the bracketing interval
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = best_theta - step, hi = best_theta + step;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = mismatch_sq(z1, z2, x1, w), f2 = mismatch_sq(z1, z2, x2, w);
    for (int it = 0; it < 80 && (hi - lo) > 1e-14; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = mismatch_sq(z1, z2, x1, w);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = mismatch_sq(z1, z2, x2, w);
        }
    }
    const double theta_star = 0.5 * (lo + hi);
    const double val = std::min({best, mismatch_sq(z1, z2, theta_star, w), f1, f2});
    const double final_theta =
        (mismatch_sq(z1, z2, theta_star, w) <= best) ? theta_star : best_theta;
    return {std::sqrt(std::max(0.0, val)), wrap_angle(final_theta)};
}

} // namespace matchcon
