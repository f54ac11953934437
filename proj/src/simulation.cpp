#include "matchcon/simulation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <future>
#include <sstream>
#include <thread>

namespace matchcon {

namespace {

using Rhs = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

bool finite_below(const Eigen::VectorXd& y, double cap) {
    return y.allFinite() && y.lpNorm<Eigen::Infinity>() <= cap;
}

void rk4_step(const Rhs& rhs, Eigen::VectorXd& y, double dt, Eigen::VectorXd& k1,
              Eigen::VectorXd& k2, Eigen::VectorXd& k3, Eigen::VectorXd& k4,
              Eigen::VectorXd& tmp) {
    rhs(y, k1);
    tmp = y + 0.5 * dt * k1;
    rhs(tmp, k2);
    tmp = y + 0.5 * dt * k2;
    rhs(tmp, k3);
    tmp = y + dt * k3;
    rhs(tmp, k4);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Dormand-Prince 4(5) tableau
constexpr double kDpA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kDpB[7] = {35.0 / 384,      0.0,       500.0 / 1113, 125.0 / 192,
                            -2187.0 / 6784,  11.0 / 84, 0.0};
constexpr double kDpErr[7] = {71.0 / 57600,       0.0,        -71.0 / 16695, 71.0 / 1920,
                              -17253.0 / 339200,  22.0 / 525, -1.0 / 40};

template <typename Record>
void run_fixed(const Rhs& rhs, Eigen::VectorXd y, const IntegrateOptions& opts,
               Record&& record) {
    const auto steps = static_cast<long>(std::ceil(opts.t_end / opts.dt - 1e-12));
    const long stride =
        opts.record_dt > 0.0
            ? std::max<long>(1, static_cast<long>(std::llround(opts.record_dt / opts.dt)))
            : 1;
    Eigen::VectorXd k1, k2, k3, k4, tmp;
    record(0.0, y);
    for (long s = 0; s < steps; ++s) {
        const double dt = std::min(opts.dt, opts.t_end - s * opts.dt);
        rk4_step(rhs, y, dt, k1, k2, k3, k4, tmp);
        const double t = std::min((s + 1) * opts.dt, opts.t_end);
        if (!finite_below(y, opts.blow_up)) {
            throw DivergenceError("trajectory diverged", t);
        }
        if ((s + 1) % stride == 0 || s + 1 == steps) {
            if (record(t, y)) {
                return;
            }
        }
    }
}

template <typename Record>
void run_adaptive(const Rhs& rhs, Eigen::VectorXd y, const IntegrateOptions& opts,
                  Record&& record) {
    double t = 0.0, dt = opts.dt;
    double next_record = opts.record_dt > 0.0 ? opts.record_dt : 0.0;
    std::array<Eigen::VectorXd, 7> k;
    Eigen::VectorXd tmp, y_new, err;
    record(0.0, y);
    while (t < opts.t_end) {
        dt = std::min(dt, opts.t_end - t);
        rhs(y, k[0]);
        for (int stage = 1; stage < 7; ++stage) {
            tmp = y;
            for (int p = 0; p < stage; ++p) {
                if (kDpA[stage][p] != 0.0) {
                    tmp += dt * kDpA[stage][p] * k[p];
                }
            }
            rhs(tmp, k[stage]);
        }
        y_new = y;
        err = Eigen::VectorXd::Zero(y.size());
        for (int stage = 0; stage < 7; ++stage) {
            if (kDpB[stage] != 0.0) {
                y_new += dt * kDpB[stage] * k[stage];
            }
            if (kDpErr[stage] != 0.0) {
                err += dt * kDpErr[stage] * k[stage];
            }
        }
        double scale_err = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc =
                opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            scale_err += std::pow(err[i] / sc, 2);
        }
        scale_err = std::sqrt(scale_err / static_cast<double>(y.size()));
        if (scale_err <= 1.0) {
            t += dt;
            y = y_new;
            if (!finite_below(y, opts.blow_up)) {
                throw DivergenceError("trajectory diverged", t);
            }
            if (opts.record_dt <= 0.0 || t >= next_record || t >= opts.t_end) {
                next_record += opts.record_dt;
                if (record(t, y)) {
                    return;
                }
            }
        }
        const double factor =
            scale_err > 0.0 ? 0.9 * std::pow(scale_err, -0.2) : 5.0;
        dt *= std::clamp(factor, 0.2, 5.0);
    }
}

template <typename Record>
void run(const Rhs& rhs, const Eigen::VectorXd& y0, const IntegrateOptions& opts,
         Record&& record) {
    if (!(opts.dt > 0.0) || !(opts.t_end > 0.0)) {
        throw std::invalid_argument("integrate: dt and t_end must be positive");
    }
    if (opts.method == IntegrationMethod::Rk4) {
        run_fixed(rhs, y0, opts, std::forward<Record>(record));
    } else {
        run_adaptive(rhs, y0, opts, std::forward<Record>(record));
    }
}

} // namespace

Trajectory integrate(const Model& model, const SystemState& z0,
                     const Eigen::VectorXd& u, const IntegrateOptions& opts) {
    Trajectory traj;
    traj.n = model.n;
    traj.m = model.m;
    Rhs rhs = [&](const Eigen::VectorXd& z, Eigen::VectorXd& out) {
        vector_field_packed(model, z, u, out);
    };
    run(rhs, z0.pack(), opts, [&](double t, const Eigen::VectorXd& z) {
        traj.times.push_back(t);
        traj.states.push_back(z);
        return false;
    });
    return traj;
}

Trajectory integrate_variational(const Model& model, const SystemState& z0,
                                 const Eigen::VectorXd& delta_z0,
                                 const Eigen::VectorXd& u,
                                 const IntegrateOptions& opts,
                                 const LyapunovCertificate* cert) {
    if (delta_z0.size() != model.N) {
        throw ShapeError("integrate_variational: tangent dimension mismatch");
    }
    Trajectory traj;
    traj.n = model.n;
    traj.m = model.m;
    const int big_n = model.N;
    Eigen::VectorXd y0(2 * big_n);
    y0.head(big_n) = z0.pack();
    y0.tail(big_n) = delta_z0;

    Eigen::VectorXd fz;
    Rhs rhs = [&](const Eigen::VectorXd& y, Eigen::VectorXd& out) {
        out.resize(2 * big_n);
        const Eigen::VectorXd z = y.head(big_n);
        vector_field_packed(model, z, u, fz);
        out.head(big_n) = fz;
        const SystemState zs = SystemState::unpack(z, model.n, model.m);
        out.tail(big_n) = jacobian(model, zs).a * y.tail(big_n);
    };
    run(rhs, y0, opts, [&](double t, const Eigen::VectorXd& y) {
        traj.times.push_back(t);
        traj.states.push_back(y.head(big_n));
        traj.variational.push_back(y.tail(big_n));
        if (cert) {
            traj.lyapunov.push_back(lyapunov_value(*cert, y.tail(big_n)));
        }
        return false;
    });
    return traj;
}

ConvergenceResult classify_convergence(const Trajectory& traj, const Equilibrium& eq,
                                       double tol, double window) {
    if (traj.times.empty()) {
        throw std::invalid_argument("classify_convergence: empty trajectory");
    }
    const double t_end = traj.times.back();
    if (window < 0.0) {
        window = 0.2 * t_end;
    }
    if (t_end < window) {
        throw std::invalid_argument("classify_convergence: trajectory shorter than window");
    }
    std::vector<double> dist = traj.distances;
    if (dist.empty()) {
        dist.reserve(traj.times.size());
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            dist.push_back(quotient_distance(traj.state_at(i), eq.z_star).distance);
        }
    }
    ConvergenceResult res;
    res.final_distance = dist.back();
    res.converged = true;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (traj.times[i] >= t_end - window && dist[i] >= tol) {
            res.converged = false;
        }
    }
    if (res.converged) {
        double t_conv = 0.0;
        for (std::size_t i = dist.size(); i-- > 0;) {
            if (dist[i] >= tol) {
                t_conv = traj.times[std::min(i + 1, dist.size() - 1)];
                break;
            }
        }
        res.time_to_converge = t_conv;
    }
    return res;
}

namespace {

RegionSample run_region_sample(const Model& model, const Equilibrium& eq,
                               const LyapunovCertificate& cert,
                               const Eigen::VectorXd& offsets,
                               const RegionSweepOptions& opts) {
    RegionSample sample;
    sample.angle_offset = offsets;

    SystemState z0 = eq.z_star;
    z0.gamma += offsets;

    // displacement from the nearest orbit point as the tangent proxy
    const QuotientDistanceResult qd = quotient_distance(z0, eq.z_star);
    const SystemState nearest = group_action(eq.z_star, qd.theta_star);
    Eigen::VectorXd dz0 = z0.pack() - nearest.pack();
    for (int k = 0; k < model.n; ++k) {
        dz0[k] = wrap_angle(dz0[k]);
    }
    sample.v0 = lyapunov_value(cert, dz0);

    IntegrateOptions iopts;
    iopts.dt = opts.dt;
    iopts.t_end = opts.horizon;
    iopts.record_dt = opts.record_dt;

    std::vector<double> times, dist;
    const double settle_level = 0.01 * opts.tol;
    int settled = 0;
    bool early_stop = false;
    Rhs rhs = [&](const Eigen::VectorXd& z, Eigen::VectorXd& out) {
        vector_field_packed(model, z, eq.u_star, out);
    };
    try {
        run_fixed(rhs, z0.pack(), iopts, [&](double t, const Eigen::VectorXd& z) {
            const double d =
                quotient_distance(SystemState::unpack(z, model.n, model.m), eq.z_star,
                                  std::nullopt, /*grid_points=*/96)
                    .distance;
            times.push_back(t);
            dist.push_back(d);
            sample.final_state = z;
            settled = d < settle_level ? settled + 1 : 0;
            if (settled >= 10 && t > 0.0) {
                early_stop = true;
                return true;
            }
            return false;
        });
    } catch (const DivergenceError&) {
        sample.converged = false;
        sample.final_distance = std::numeric_limits<double>::infinity();
        return sample;
    }

    sample.final_distance = dist.back();
    if (early_stop) {
        sample.converged = true;
    } else {
        const double t_end = times.back();
        sample.converged = true;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            if (times[i] >= 0.8 * t_end && dist[i] >= opts.tol) {
                sample.converged = false;
            }
        }
    }
    if (sample.converged) {
        double t_conv = 0.0;
        for (std::size_t i = dist.size(); i-- > 0;) {
            if (dist[i] >= opts.tol) {
                t_conv = times[std::min(i + 1, dist.size() - 1)];
                break;
            }
        }
        sample.time_to_converge = t_conv;
    }
    return sample;
}

} // namespace

RegionEstimate estimate_region(const Model& model, const Equilibrium& eq,
                               const LyapunovCertificate& cert,
                               const RegionSweepOptions& opts) {
    if (cert.pi_matrix.rows() != model.N) {
        throw CertificateError("estimate_region: certificate does not match the model");
    }
    const int axes = model.n;
    const int pts = opts.points_per_axis;
    std::vector<double> ticks(pts);
    for (int i = 0; i < pts; ++i) {
        ticks[i] = pts == 1 ? opts.offset_min
                            : opts.offset_min + (opts.offset_max - opts.offset_min) *
                                                    static_cast<double>(i) / (pts - 1);
    }
    long total = 1;
    for (int a = 0; a < axes; ++a) {
        total *= pts;
    }

    std::vector<RegionSample> samples(static_cast<std::size_t>(total));
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<long> cursor{0};
    auto worker = [&]() {
        for (long idx = cursor.fetch_add(1); idx < total; idx = cursor.fetch_add(1)) {
            Eigen::VectorXd offsets(axes);
            long rem = idx;
            for (int a = axes - 1; a >= 0; --a) {
                offsets[a] = ticks[rem % pts];
                rem /= pts;
            }
            samples[static_cast<std::size_t>(idx)] =
                run_region_sample(model, eq, cert, offsets, opts);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }

    RegionEstimate est;
    est.samples = std::move(samples);
    double max_conv = 0.0, min_nonconv = std::numeric_limits<double>::infinity();
    for (const auto& s : est.samples) {
        if (s.converged) {
            max_conv = std::max(max_conv, s.v0);
        } else {
            min_nonconv = std::min(min_nonconv, s.v0);
        }
    }
    est.epsilon_star = std::isfinite(min_nonconv)
                           ? std::nextafter(min_nonconv, 0.0)
                           : max_conv;
    std::ostringstream spec;
    spec << pts;
    for (int a = 1; a < axes; ++a) {
        spec << "x" << pts;
    }
    spec << " angle offsets in [" << opts.offset_min << ", " << opts.offset_max
         << "]^" << axes << ", horizon " << opts.horizon << " s, dt " << opts.dt;
    est.grid_spec = spec.str();
    return est;
}

} // namespace matchcon
