#pragma once

#include "matchcon/params.hpp"
#include "matchcon/state.hpp"

#include <Eigen/Dense>

#include <optional>

namespace matchcon {

/// 90-degree rotation generator J = [[0,-1],[1,0]].
inline Eigen::Matrix2d skew_j() {
    Eigen::Matrix2d j;
    j << 0.0, -1.0, 1.0, 0.0;
    return j;
}

/// 2x2 rotation by theta.
inline Eigen::Matrix2d rotation2(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
}

/// Modulation direction r(gamma) = [-sin(gamma), cos(gamma)]^T.
inline Eigen::Vector2d modulation_vector(double gamma) {
    return {-std::sin(gamma), std::cos(gamma)};
}

/// Immutable network model: identical converters on the nodes of a connected
/// graph, identical RL lines on the edges, in a dq frame rotating at omega_n.
struct Model {
    ConverterParams conv;
    LineParams line;
    Topology topo;
    double omega_n = 0.0; ///< nominal angular frequency, rad/s

    int n = 0; ///< node count
    int m = 0; ///< edge count
    int N = 0; ///< stacked state dimension 6n + 2m

    Eigen::Matrix2d z_r; ///< filter impedance block R*I + L*omega_n*J
    Eigen::Matrix2d z_c; ///< shunt admittance block G*I + (C*omega_n + b)*J
    Eigen::Matrix2d z_l; ///< line impedance block R_l*I + L_l*omega_n*J

    Eigen::MatrixXd incidence; ///< n x m oriented incidence matrix
    Eigen::MatrixXd coupling;  ///< B = incidence (x) I2, 2n x 2m

    /// Offsets of the state blocks inside the stacked vector.
    int off_gamma() const { return 0; }
    int off_vdc() const { return n; }
    int off_i() const { return 2 * n; }
    int off_v() const { return 4 * n; }
    int off_il() const { return 6 * n; }
};

/// Builds the model and all derived matrices. Validates parameters and
/// requires a connected topology.
Model assemble_model(const ConverterParams& conv, const LineParams& line,
                     const Topology& topo, double omega_n);

/// Right-hand side of the lumped network dynamics z_dot = f(z, u). The input
/// u is a stacked vector whose only nonzero entries live in the DC block.
Eigen::VectorXd vector_field(const Model& model, const SystemState& z,
                             const Eigen::VectorXd& u);

/// In-place variant on stacked vectors, for tight integration loops.
void vector_field_packed(const Model& model, const Eigen::VectorXd& z,
                         const Eigen::VectorXd& u, Eigen::VectorXd& out);

/// Symmetry action: shifts all angles by theta and rotates every AC dq pair
/// by R(theta). DC voltages are untouched.
SystemState group_action(const SystemState& z, double theta);

/// Linear part H(theta) of the symmetry action applied to a stacked vector
/// (tangent vectors rotate but their angle entries do not shift).
Eigen::VectorXd rotate_stacked(const Eigen::VectorXd& w, double theta, int n, int m);

struct QuotientDistanceResult {
    double distance = 0.0;   ///< min over theta of the weighted mismatch norm
    double theta_star = 0.0; ///< minimizing angle
};

/// Distance between equivalence classes [z1], [z2]: minimizes over theta the
/// weighted norm of (wrap(gamma1 - gamma2 - theta*1), dvdc, x1 - R(theta) x2)
/// by a dense theta grid followed by golden-section refinement.
/// `weight`, when given, holds per-coordinate positive weights.
QuotientDistanceResult quotient_distance(
    const SystemState& z1, const SystemState& z2,
    const std::optional<Eigen::VectorXd>& weight = std::nullopt,
    int grid_points = 720);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

} // namespace matchcon
