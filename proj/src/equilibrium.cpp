#include "matchcon/equilibrium.hpp"

#include "matchcon/linearization.hpp"

#include <Eigen/QR>

namespace matchcon {

Eigen::VectorXd dc_input(const Model& model, const Eigen::VectorXd& i_dc) {
    if (i_dc.size() != model.n) {
        throw ShapeError("dc_input: expected one entry per node");
    }
    Eigen::VectorXd u = Eigen::VectorXd::Zero(model.N);
    u.segment(model.n, model.n) = i_dc;
    return u;
}

Eigen::VectorXd feasible_input(const Model& model, const SystemState& z) {
    Eigen::VectorXd i_dc(model.n);
    for (int k = 0; k < model.n; ++k) {
        i_dc[k] = 0.5 * model.conv.mu *
                  modulation_vector(z.gamma[k]).dot(z.i_f.segment<2>(2 * k));
    }
    return dc_input(model, i_dc);
}

namespace {

// Steady AC signals for fixed angles and nominal DC voltage: the x-subsystem
// is linear with a strictly passive coefficient matrix. One step of iterative
// refinement with an extended-precision residual keeps the defect well below
// the equilibrium tolerance even after division by the small L and C.
Eigen::VectorXd solve_ac_subsystem(const Model& model, const Eigen::VectorXd& gamma) {
    const int n = model.n, m = model.m;
    const int dim = 4 * n + 2 * m;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
    for (int k = 0; k < n; ++k) {
        a.block<2, 2>(2 * k, 2 * k) = model.z_r;
        a.block<2, 2>(2 * k, 2 * n + 2 * k) = Eigen::Matrix2d::Identity();
        a.block<2, 2>(2 * n + 2 * k, 2 * k) = -Eigen::Matrix2d::Identity();
        a.block<2, 2>(2 * n + 2 * k, 2 * n + 2 * k) = model.z_c;
        b.segment<2>(2 * k) =
            0.5 * model.conv.mu * model.conv.v_dc_star * modulation_vector(gamma[k]);
    }
    if (m > 0) {
        a.block(2 * n, 4 * n, 2 * n, 2 * m) = model.coupling;
        a.block(4 * n, 2 * n, 2 * m, 2 * n) = -model.coupling.transpose();
        for (int e = 0; e < m; ++e) {
            a.block<2, 2>(4 * n + 2 * e, 4 * n + 2 * e) = model.z_l;
        }
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    Eigen::VectorXd x = lu.solve(b);
    for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXd r(dim);
        for (int i = 0; i < dim; ++i) {
            long double acc = b[i];
            for (int jx = 0; jx < dim; ++jx) {
                acc -= static_cast<long double>(a(i, jx)) * x[jx];
            }
            r[i] = static_cast<double>(acc);
        }
        x += lu.solve(r);
    }
    return x;
}

SystemState manifold_state(const Model& model, const Eigen::VectorXd& gamma) {
    SystemState z = SystemState::zero(model.n, model.m);
    z.gamma = gamma;
    const Eigen::VectorXd x = solve_ac_subsystem(model, gamma);
    z.i_f = x.segment(0, 2 * model.n);
    z.v_c = x.segment(2 * model.n, 2 * model.n);
    z.i_line = x.segment(4 * model.n, 2 * model.m);
    return z;
}

SystemState default_guess(const Model& model, double gauge_angle) {
    return manifold_state(model,
                          Eigen::VectorXd::Constant(model.n, gauge_angle));
}

// Residual in natural per-block units: each equation multiplied by its own
// time constant, so every entry reads in volts or amperes. The raw rates span
// nine orders of magnitude, which would make an unweighted norm meaningless.
Eigen::VectorXd residual_scale(const Model& model) {
    Eigen::VectorXd scale(model.N);
    scale.segment(0, model.n).setConstant(1.0 / model.conv.eta);
    scale.segment(model.n, model.n).setConstant(model.conv.c_dc);
    scale.segment(2 * model.n, 2 * model.n).setConstant(model.conv.l_filter);
    scale.segment(4 * model.n, 2 * model.n).setConstant(model.conv.c_filter);
    scale.segment(6 * model.n, 2 * model.m).setConstant(model.line.l_line);
    return scale;
}

// DC power balance defect per node on the synchronous manifold
// (v_dc at nominal, AC signals solved from the angles).
Eigen::VectorXd balance_defect(const Model& model, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& gamma) {
    const Eigen::VectorXd x = solve_ac_subsystem(model, gamma);
    Eigen::VectorXd h(model.n);
    for (int k = 0; k < model.n; ++k) {
        h[k] = u[model.n + k] - 0.5 * model.conv.mu *
                                    modulation_vector(gamma[k])
                                        .dot(x.segment<2>(2 * k));
    }
    return h;
}

} // namespace

Equilibrium solve_equilibrium(const Model& model, const Eigen::VectorXd& u,
                              double gauge_angle,
                              const std::optional<SystemState>& guess,
                              const SolveOptions& opts) {
    if (u.size() != model.N) {
        throw ShapeError("solve_equilibrium: input dimension mismatch");
    }
    SystemState z = guess ? *guess : default_guess(model, gauge_angle);
    const Eigen::VectorXd scale = residual_scale(model);
    Eigen::VectorXd f(model.N);
    double res = std::numeric_limits<double>::infinity();
    double last_step = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter <= opts.max_iter; ++iter) {
        Eigen::VectorXd gamma = z.gamma;
        gamma[0] = gauge_angle;
        const Eigen::VectorXd h0 = balance_defect(model, u, gamma);

        // the realized input: requested DC sources projected onto the
        // feasible set (Assumption 1 closure). When the request is exactly
        // feasible the two coincide to roundoff.
        const Eigen::VectorXd u_star = feasible_input(model, z);
        vector_field_packed(model, z.pack(), u_star, f);
        res = (scale.array() * f.array()).matrix().lpNorm<Eigen::Infinity>();
        const double gauge_res = std::abs(z.gamma[0] - gauge_angle);
        const bool stationary =
            h0.lpNorm<Eigen::Infinity>() <= opts.tol || last_step <= 1e-9;
        if (res <= opts.tol && gauge_res <= 1e-12 && stationary) {
            Equilibrium eq;
            eq.z_star = z;
            eq.u_star = u_star;
            eq.gauge_angle = gauge_angle;
            eq.residual_norm = res;
            eq.input_gap = (u - u_star).lpNorm<Eigen::Infinity>();
            eq.condition1 = check_condition1(model, eq);
            return eq;
        }
        if (iter == opts.max_iter) {
            break;
        }

        // Newton on the bordered system after exact block elimination. At any
        // equilibrium the frequency equations force v_dc to nominal and the AC
        // signals solve a linear passive system in the angles, so only the
        // angles beyond the gauge remain as unknowns; the surviving equations
        // are the per-node DC power balances, matched in least squares.
        if (model.n > 1) {
            Eigen::MatrixXd jh(model.n, model.n - 1);
            const double fd = 1e-6;
            for (int j = 1; j < model.n; ++j) {
                Eigen::VectorXd gp = gamma, gm = gamma;
                gp[j] += fd;
                gm[j] -= fd;
                jh.col(j - 1) = (balance_defect(model, u, gp) -
                                 balance_defect(model, u, gm)) /
                                (2.0 * fd);
            }
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jh);
            if (qr.rank() < model.n - 1) {
                throw RankDeficiencyError(
                    "bordered Jacobian is rank deficient: degenerate "
                    "equilibrium beyond the rotation direction");
            }
            // Gauss-Newton step, damped: a full step can overshoot the
            // trigonometric nonlinearity when starting far from the solution
            const Eigen::VectorXd step = qr.solve(-h0);
            double alpha = 1.0;
            const double merit0 = h0.squaredNorm();
            for (int bt = 0; bt < 40; ++bt) {
                Eigen::VectorXd trial = gamma;
                trial.tail(model.n - 1) += alpha * step;
                if (balance_defect(model, u, trial).squaredNorm() <= merit0 ||
                    bt == 39) {
                    gamma = trial;
                    last_step = alpha * step.lpNorm<Eigen::Infinity>();
                    break;
                }
                alpha *= 0.5;
            }
        } else {
            last_step = 0.0;
        }
        z = manifold_state(model, gamma);
    }
    throw ConvergenceError("Newton did not converge within max_iter", res);
}

std::vector<Condition1Record> check_condition1(const Model& model,
                                               const Equilibrium& eq) {
    const auto& c = model.conv;
    const double threshold =
        c.mu * c.mu * c.v_dc_star * c.v_dc_star / (16.0 * c.r_filter);
    const Eigen::Matrix2d j = skew_j();
    std::vector<Condition1Record> records;
    records.reserve(model.n);
    for (int k = 0; k < model.n; ++k) {
        const Eigen::Vector2d jr = j * modulation_vector(eq.z_star.gamma[k]);
        const double q_sw =
            0.5 * c.mu * jr.dot(eq.z_star.i_f.segment<2>(2 * k)) * c.v_dc_star;
        Condition1Record rec;
        rec.k = k;
        rec.q_sw = q_sw;
        rec.threshold = threshold;
        rec.margin = q_sw - threshold;
        rec.pass = rec.margin > 0.0;
        records.push_back(rec);
    }
    return records;
}

SynchronizationReport synchronization_report(const Model& model,
                                             const Equilibrium& eq) {
    SynchronizationReport rep;
    rep.omega = model.conv.eta * eq.z_star.v_dc_tilde;
    rep.v_dc = eq.z_star.v_dc_tilde.array() + model.conv.v_dc_star;
    return rep;
}

std::vector<Equilibrium> sweep_equilibria(const Model& model,
                                          const Eigen::VectorXd& u,
                                          const std::vector<double>& gamma_spreads,
                                          double orbit_tol) {
    std::vector<Equilibrium> orbits;
    for (double spread : gamma_spreads) {
        SystemState guess = SystemState::zero(model.n, model.m);
        for (int k = 0; k < model.n; ++k) {
            guess.gamma[k] = spread * k;
        }
        const Eigen::VectorXd x = solve_ac_subsystem(model, guess.gamma);
        guess.i_f = x.segment(0, 2 * model.n);
        guess.v_c = x.segment(2 * model.n, 2 * model.n);
        guess.i_line = x.segment(4 * model.n, 2 * model.m);
        Equilibrium eq;
        try {
            eq = solve_equilibrium(model, u, 0.0, guess);
        } catch (const ConvergenceError&) {
            continue;
        } catch (const RankDeficiencyError&) {
            continue;
        }
        bool fresh = true;
        for (const auto& known : orbits) {
            if (quotient_distance(eq.z_star, known.z_star).distance <= orbit_tol) {
                fresh = false;
                break;
            }
        }
        if (fresh) {
            orbits.push_back(std::move(eq));
        }
    }
    return orbits;
}

} // namespace matchcon
