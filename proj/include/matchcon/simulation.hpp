#pragma once

#include "matchcon/linearization.hpp"

#include <string>
#include <vector>

namespace matchcon {

/// Raised when a trajectory leaves the finite range (blow-up).
struct DivergenceError : std::runtime_error {
    double blow_up_time;
    DivergenceError(const std::string& msg, double t)
        : std::runtime_error(msg), blow_up_time(t) {}
};

enum class IntegrationMethod { Rk4, Rk45Adaptive };

struct IntegrateOptions {
    double dt = 1e-5;   ///< step (RK4) or initial step (RK45)
    double t_end = 2.0;
    IntegrationMethod method = IntegrationMethod::Rk4;
    double abs_tol = 1e-9; ///< RK45 only
    double rel_tol = 1e-9; ///< RK45 only
    double record_dt = 0.0; ///< >0: record about every record_dt instead of every step
    double blow_up = 1e6;   ///< any |coordinate| above this aborts
};

/// A recorded trajectory; variational/lyapunov/distances stay empty unless
/// the producing routine fills them.
struct Trajectory {
    int n = 0, m = 0;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;      ///< stacked z per time
    std::vector<Eigen::VectorXd> variational; ///< stacked tangent per time
    std::vector<double> lyapunov;             ///< V(dz(t)) when a certificate was supplied
    std::vector<double> distances;            ///< quotient distance to a reference

    SystemState state_at(std::size_t idx) const {
        return SystemState::unpack(states.at(idx), n, m);
    }
};

/// Integrates z_dot = f(z, u). Classical RK4 by default; embedded
/// Dormand-Prince 4(5) with step control when requested. Angles unwrapped.
Trajectory integrate(const Model& model, const SystemState& z0,
                     const Eigen::VectorXd& u, const IntegrateOptions& opts);

/// Co-integrates the state with the variational system
/// ddz/dt = df/dz(z(t)) dz, evaluating the analytic Jacobian along the
/// solution. Records V(dz(t)) when a certificate is given.
Trajectory integrate_variational(const Model& model, const SystemState& z0,
                                 const Eigen::VectorXd& delta_z0,
                                 const Eigen::VectorXd& u,
                                 const IntegrateOptions& opts,
                                 const LyapunovCertificate* cert = nullptr);

struct ConvergenceResult {
    bool converged = false;
    double final_distance = 0.0;
    double time_to_converge = 0.0; ///< first time after which distance stayed below tol
};

/// Converged iff the quotient distance to the equilibrium orbit stays below
/// tol over the trailing window (default: last 20% of the horizon).
ConvergenceResult classify_convergence(const Trajectory& traj, const Equilibrium& eq,
                                       double tol = 1e-4, double window = -1.0);

struct RegionSample {
    Eigen::VectorXd angle_offset; ///< initial gamma - gamma*, per node
    double v0 = 0.0;              ///< V of the displacement from the nearest orbit point
    bool converged = false;
    double final_distance = 0.0;
    double time_to_converge = 0.0;
    Eigen::VectorXd final_state; ///< stacked state at the end of the run
};

struct RegionEstimate {
    std::vector<RegionSample> samples;
    double epsilon_star = 0.0; ///< largest level below which every sample converged
    std::string grid_spec;
};

struct RegionSweepOptions {
    double offset_min = -M_PI / 2;
    double offset_max = M_PI / 2;
    int points_per_axis = 41;
    double horizon = 2.0;
    double dt = 1e-5;
    double tol = 1e-4;       ///< convergence tolerance on quotient distance
    double record_dt = 1e-3; ///< distance sampling period
};

/// Estimates the contraction region by sweeping initial angle offsets on a
/// cartesian grid (all other states at equilibrium), measuring
/// V(z0 - nearest orbit point), integrating, and classifying convergence.
RegionEstimate estimate_region(const Model& model, const Equilibrium& eq,
                               const LyapunovCertificate& cert,
                               const RegionSweepOptions& opts = {});

} // namespace matchcon
