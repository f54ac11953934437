#include "matchcon/io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <random>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitSolver = 2;
constexpr int kExitCondition = 3;
constexpr int kExitCertificate = 4;

struct CliConfig {
    std::string network_file;
    std::string output_dir = ".";
    double gauge = 0.0;
    double b_load_override = std::numeric_limits<double>::quiet_NaN();
    double dt = 1e-5;
    double horizon = 2.0;
    int grid = 41;
    double epsilon = 3.5;
    double q1 = 1.0;
    double q2 = 1.0;
    double sigma = 1e-6;
    unsigned long seed = 0;
    std::string method = "rk4";
    int max_iter = 50;
    std::vector<double> dgamma;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << content;
}

matchcon::Equilibrium solve(const matchcon::Model& model, const CliConfig& cfg) {
    matchcon::SolveOptions sopts;
    sopts.max_iter = cfg.max_iter;
    const Eigen::VectorXd u = matchcon::dc_input(
        model, Eigen::VectorXd::Constant(model.n, model.conv.i_dc_star));
    return matchcon::solve_equilibrium(model, u, cfg.gauge, std::nullopt, sopts);
}

int cmd_equilibrium(const CliConfig& cfg) {
    const auto model = matchcon::load_network(cfg.network_file, cfg.b_load_override);
    matchcon::Equilibrium eq;
    try {
        eq = solve(model, cfg);
    } catch (const matchcon::ConvergenceError& e) {
        std::cerr << "solver failed: " << e.what() << " (residual " << e.residual
                  << ")\n";
        return kExitSolver;
    } catch (const matchcon::RankDeficiencyError& e) {
        std::cerr << "solver failed: " << e.what() << "\n";
        return kExitSolver;
    }
    write_file(std::filesystem::path(cfg.output_dir) / "equilibrium.json",
               matchcon::equilibrium_to_json(model, eq));
    const auto rep = matchcon::synchronization_report(model, eq);
    std::cout << "residual " << eq.residual_norm << ", max |omega| "
              << rep.omega.lpNorm<Eigen::Infinity>() << "\n";
    return kExitOk;
}

int cmd_condition(const CliConfig& cfg) {
    const auto model = matchcon::load_network(cfg.network_file, cfg.b_load_override);
    matchcon::Equilibrium eq;
    try {
        eq = solve(model, cfg);
    } catch (const std::runtime_error& e) {
        std::cerr << "solver failed: " << e.what() << "\n";
        return kExitSolver;
    }
    nlohmann::json doc = nlohmann::json::array();
    bool all_pass = true;
    for (const auto& rec : eq.condition1) {
        all_pass = all_pass && rec.pass;
        doc.push_back({{"k", rec.k},
                       {"q_sw", rec.q_sw},
                       {"threshold", rec.threshold},
                       {"margin", rec.margin},
                       {"pass", rec.pass}});
        std::cout << "converter " << rec.k << ": q_sw " << rec.q_sw << " threshold "
                  << rec.threshold << " margin " << rec.margin
                  << (rec.pass ? " PASS" : " FAIL") << "\n";
    }
    write_file(std::filesystem::path(cfg.output_dir) / "condition.json", doc.dump(2));
    return all_pass ? kExitOk : kExitCondition;
}

int cmd_certify(const CliConfig& cfg) {
    const auto model = matchcon::load_network(cfg.network_file, cfg.b_load_override);
    matchcon::Equilibrium eq;
    try {
        eq = solve(model, cfg);
    } catch (const std::runtime_error& e) {
        std::cerr << "solver failed: " << e.what() << "\n";
        return kExitSolver;
    }
    matchcon::CertificateOptions copts;
    copts.q1 = cfg.q1;
    copts.q2 = cfg.q2;
    copts.sigma = cfg.sigma;
    matchcon::LyapunovCertificate cert;
    try {
        cert = matchcon::lyapunov_certificate(model, eq, copts);
    } catch (const matchcon::InstabilityError& e) {
        std::cerr << "certificate failed: " << e.what() << "\n";
        return kExitCertificate;
    } catch (const matchcon::CertificateError& e) {
        std::cerr << "certificate refused: " << e.what() << "\n";
        return kExitCondition;
    }

    // seeded sampling diagnostic: decrease rate on the complement of v
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss;
    const Eigen::MatrixXd a = matchcon::jacobian(model, eq.z_star).a;
    const Eigen::MatrixXd decrease =
        cert.pi_matrix * a + a.transpose() * cert.pi_matrix;
    const Eigen::VectorXd pv = cert.p_matrix * cert.v_star;
    double worst = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < 1000; ++s) {
        Eigen::VectorXd dz(model.N);
        for (int i = 0; i < model.N; ++i) {
            dz[i] = gauss(rng);
        }
        dz -= pv * (dz.dot(pv) / cert.v_star.dot(pv)); // P-orthogonal to v
        worst = std::max(worst, dz.dot(decrease * dz) / dz.squaredNorm());
    }

    nlohmann::json doc = nlohmann::json::parse(matchcon::certificate_to_json(cert));
    doc["sampled_decrease_max"] = worst;
    doc["seed"] = cfg.seed;
    const std::filesystem::path dir(cfg.output_dir);
    write_file(dir / "certificate.json", doc.dump(2));
    matchcon::write_matrix_binary(dir / "p_matrix.bin", cert.p_matrix);
    matchcon::write_matrix_binary(dir / "pi_matrix.bin", cert.pi_matrix);
    std::cout << "certificate written, block coupling ratio "
              << cert.block_coupling_ratio << "\n";
    return kExitOk;
}

int cmd_simulate(const CliConfig& cfg) {
    const auto model = matchcon::load_network(cfg.network_file, cfg.b_load_override);
    matchcon::Equilibrium eq;
    try {
        eq = solve(model, cfg);
    } catch (const std::runtime_error& e) {
        std::cerr << "solver failed: " << e.what() << "\n";
        return kExitSolver;
    }
    matchcon::SystemState z0 = eq.z_star;
    for (std::size_t k = 0; k < cfg.dgamma.size() && k < static_cast<std::size_t>(model.n);
         ++k) {
        z0.gamma[static_cast<Eigen::Index>(k)] += cfg.dgamma[k];
    }
    matchcon::IntegrateOptions iopts;
    iopts.dt = cfg.dt;
    iopts.t_end = cfg.horizon;
    iopts.method = cfg.method == "rk45" ? matchcon::IntegrationMethod::Rk45Adaptive
                                        : matchcon::IntegrationMethod::Rk4;
    iopts.record_dt = 1e-3;

    matchcon::Trajectory traj;
    try {
        traj = matchcon::integrate(model, z0, eq.u_star, iopts);
    } catch (const matchcon::DivergenceError& e) {
        std::cerr << "trajectory diverged at t = " << e.blow_up_time << "\n";
        return kExitSolver;
    }

    std::optional<matchcon::LyapunovCertificate> cert;
    try {
        cert = matchcon::lyapunov_certificate(model, eq);
    } catch (const std::runtime_error&) {
        // no certificate available; V column stays empty
    }
    traj.distances.reserve(traj.times.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto state = traj.state_at(i);
        const auto qd = matchcon::quotient_distance(state, eq.z_star);
        traj.distances.push_back(qd.distance);
        if (cert) {
            Eigen::VectorXd dz =
                state.pack() - matchcon::group_action(eq.z_star, qd.theta_star).pack();
            for (int k = 0; k < model.n; ++k) {
                dz[k] = matchcon::wrap_angle(dz[k]);
            }
            traj.lyapunov.push_back(matchcon::lyapunov_value(*cert, dz));
        }
    }
    matchcon::write_trajectory_csv(
        std::filesystem::path(cfg.output_dir) / "trajectory.csv", traj);
    std::cout << "final distance to orbit " << traj.distances.back() << "\n";
    return kExitOk;
}

int cmd_region(const CliConfig& cfg) {
    const auto model = matchcon::load_network(cfg.network_file, cfg.b_load_override);
    matchcon::Equilibrium eq;
    try {
        eq = solve(model, cfg);
    } catch (const std::runtime_error& e) {
        std::cerr << "solver failed: " << e.what() << "\n";
        return kExitSolver;
    }
    matchcon::LyapunovCertificate cert;
    try {
        cert = matchcon::lyapunov_certificate(model, eq);
    } catch (const matchcon::InstabilityError& e) {
        std::cerr << "certificate failed: " << e.what() << "\n";
        return kExitCertificate;
    } catch (const matchcon::CertificateError& e) {
        std::cerr << "certificate refused: " << e.what() << "\n";
        return kExitCondition;
    }
    matchcon::RegionSweepOptions ropts;
    ropts.points_per_axis = cfg.grid;
    ropts.horizon = cfg.horizon;
    ropts.dt = cfg.dt;
    const auto region = matchcon::estimate_region(model, eq, cert, ropts);

    const std::filesystem::path dir(cfg.output_dir);
    matchcon::write_region_csv(dir / "region.csv", region);
    nlohmann::json doc = nlohmann::json::parse(matchcon::region_summary_json(region));
    long inside = 0, inside_converged = 0;
    for (const auto& s : region.samples) {
        if (s.v0 <= cfg.epsilon) {
            ++inside;
            inside_converged += s.converged ? 1 : 0;
        }
    }
    doc["epsilon"] = cfg.epsilon;
    doc["samples_inside_epsilon"] = inside;
    doc["converged_inside_epsilon"] = inside_converged;
    write_file(dir / "region_summary.json", doc.dump(2));
    std::cout << "epsilon_star " << region.epsilon_star << ", " << inside_converged
              << "/" << inside << " converged inside V <= " << cfg.epsilon << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and certification toolkit for DC/AC converter "
                 "networks under matching control"};
    app.require_subcommand(1);

    CliConfig cfg;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--network", cfg.network_file, "network JSON file")->required();
        sub->add_option("--out", cfg.output_dir, "output directory");
        sub->add_option("--gauge", cfg.gauge, "imposed gamma_1 at the equilibrium");
        sub->add_option("--b-load-override", cfg.b_load_override,
                        "replace the converter b_load");
        sub->add_option("--seed", cfg.seed, "seed for randomized diagnostics");
        sub->add_option("--max-iter", cfg.max_iter, "Newton iteration cap");
        return sub;
    };
    auto* c_eq = add_common(app.add_subcommand("equilibrium", "solve a steady state"));
    auto* c_cond =
        add_common(app.add_subcommand("condition", "evaluate the per-converter condition"));
    auto* c_cert = add_common(app.add_subcommand("certify", "build a Lyapunov certificate"));
    c_cert->add_option("--q1", cfg.q1, "weight on angle/DC tangent directions");
    c_cert->add_option("--q2", cfg.q2, "weight on the AC orbit direction");
    c_cert->add_option("--sigma", cfg.sigma, "decrease-rate regularization");
    auto* c_sim = add_common(app.add_subcommand("simulate", "integrate a trajectory"));
    c_sim->add_option("--dgamma", cfg.dgamma, "initial angle offsets, rad");
    c_sim->add_option("--dt", cfg.dt, "integration step, s");
    c_sim->add_option("--horizon", cfg.horizon, "integration horizon, s");
    c_sim->add_option("--method", cfg.method, "rk4 | rk45");
    auto* c_reg = add_common(app.add_subcommand("region", "sweep the contraction region"));
    c_reg->add_option("--grid", cfg.grid, "grid points per angle axis");
    c_reg->add_option("--dt", cfg.dt, "integration step, s");
    c_reg->add_option("--horizon", cfg.horizon, "integration horizon, s");
    c_reg->add_option("--epsilon", cfg.epsilon, "level set reported in the summary");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_eq->parsed()) return cmd_equilibrium(cfg);
        if (c_cond->parsed()) return cmd_condition(cfg);
        if (c_cert->parsed()) return cmd_certify(cfg);
        if (c_sim->parsed()) return cmd_simulate(cfg);
        if (c_reg->parsed()) return cmd_region(cfg);
    } catch (const matchcon::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
