#pragma once

#include "matchcon/model.hpp"

#include <vector>

namespace matchcon {

/// Raised when Newton fails to converge; carries the last residual norm.
struct ConvergenceError : std::runtime_error {
    double residual;
    ConvergenceError(const std::string& msg, double res)
        : std::runtime_error(msg), residual(res) {}
};

/// Raised when the bordered Jacobian is rank deficient beyond the known
/// rotation direction.
struct RankDeficiencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Per-converter record of the decentralized equilibrium condition
/// Q_sw > mu^2 v_dc*^2 / (16 R).
struct Condition1Record {
    int k = 0;
    double q_sw = 0.0;      ///< reactive power after the switching block
    double threshold = 0.0; ///< mu^2 v_dc*^2 / (16 R)
    double margin = 0.0;    ///< q_sw - threshold
    bool pass = false;
};

/// A gauge-fixed synchronous steady state with its feasible input and
/// per-converter condition records.
struct Equilibrium {
    SystemState z_star;
    Eigen::VectorXd u_star;   ///< realized feasible input, DC block only
    double gauge_angle = 0.0; ///< imposed value of gamma_1
    double residual_norm = 0.0; ///< per-block-unit residual, see solve_equilibrium
    double input_gap = 0.0;   ///< infinity-norm gap requested input vs u_star
    std::vector<Condition1Record> condition1;
};

/// The DC input that makes z a steady state of the DC-link equations:
/// i_dc,k = (mu/2) r(gamma_k)^T i_k, all other blocks zero.
Eigen::VectorXd feasible_input(const Model& model, const SystemState& z);

/// Stacked input whose DC block is the given per-node current source vector.
Eigen::VectorXd dc_input(const Model& model, const Eigen::VectorXd& i_dc);

struct SolveOptions {
    int max_iter = 50;
    double tol = 1e-10; ///< residual target on f in per-block units
};

/// Finds a steady state f(z*, u*) = 0 with gamma_1 pinned to `gauge_angle`.
///
/// Newton on the bordered system [f; gamma_1 - gauge] after exact block
/// elimination of the linear fast states: any steady state has v_dc at
/// nominal and AC signals solving a linear passive circuit in the angles, so
/// the iteration runs on the remaining angles against the per-node DC power
/// balances, matched in least squares. The default initial guess sets all
/// angles to the gauge, v_dc_tilde = 0, and solves that linear AC subsystem.
///
/// When the requested DC sources are not exactly feasible (published
/// benchmark tables are rounded), the returned u_star is the realized
/// feasible input closest to the request in least squares, and input_gap
/// reports the difference. residual_norm measures f(z*, u*) with every
/// equation in its natural units (multiplied by its time constant); the raw
/// rates span nine orders of magnitude, which would both drown the slow
/// equations and put the double-precision floor above any useful tolerance.
Equilibrium solve_equilibrium(const Model& model, const Eigen::VectorXd& u,
                              double gauge_angle,
                              const std::optional<SystemState>& guess = std::nullopt,
                              const SolveOptions& opts = {});

/// Evaluates the decentralized stability condition at every converter of a
/// converged equilibrium.
std::vector<Condition1Record> check_condition1(const Model& model,
                                               const Equilibrium& eq);

struct SynchronizationReport {
    Eigen::VectorXd omega; ///< relative frequencies eta * v_dc_tilde
    Eigen::VectorXd v_dc;  ///< absolute DC voltages
};

SynchronizationReport synchronization_report(const Model& model,
                                             const Equilibrium& eq);

/// Sweeps initial angle spreads and collects equilibria on distinct orbits
/// (pairwise quotient distance > orbit_tol). Assumption of isolated orbits is
/// probed, not proven.
std::vector<Equilibrium> sweep_equilibria(const Model& model,
                                          const Eigen::VectorXd& u,
                                          const std::vector<double>& gamma_spreads,
                                          double orbit_tol = 1e-4);

} // namespace matchcon
