#pragma once

#include "matchcon/equilibrium.hpp"
#include "matchcon/model.hpp"

namespace matchcon {

/// Raised when a certificate is requested but its preconditions fail.
struct CertificateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when the reduced Jacobian is not Hurwitz.
struct InstabilityError : std::runtime_error {
    Eigen::VectorXcd offending; ///< eigenvalues with nonnegative real part
    InstabilityError(const std::string& msg, Eigen::VectorXcd bad)
        : std::runtime_error(msg), offending(std::move(bad)) {}
};

/// Dense Jacobian A(z) = df/dz with the (dgamma, dvdc | dx) block partition.
struct JacobianData {
    Eigen::MatrixXd a;
    int n = 0;
    int m = 0;

    auto a11() const { return a.topLeftCorner(2 * n, 2 * n); }
    auto a12() const { return a.topRightCorner(2 * n, 4 * n + 2 * m); }
    auto a21() const { return a.bottomLeftCorner(4 * n + 2 * m, 2 * n); }
    auto a22() const { return a.bottomRightCorner(4 * n + 2 * m, 4 * n + 2 * m); }
};

/// Analytic Jacobian of the vector field at z (every trig derivative in
/// closed form).
JacobianData jacobian(const Model& model, const SystemState& z);

/// Deviation G(z) = df/dz(z) - df/dz(z*), assembled directly from its sparse
/// closed form (independent of the jacobian() code path).
Eigen::MatrixXd deviation_matrix(const Model& model, const SystemState& z,
                                 const SystemState& z_star);

/// Rotation direction v(z*) = [1_n; 0_n; J x*], the kernel of A(z*).
Eigen::VectorXd zero_direction(const Model& model, const SystemState& z_star);

/// Solves a^T p + p a = -q for symmetric p (Bartels-Stewart via complex
/// Schur). Requires the spectra of a and -a^T to be disjoint.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q);

/// Projected Lyapunov certificate for the equilibrium orbit:
/// V(dz) = dz^T Pi dz with Pi = P - P v v^T P / (v^T P v).
struct LyapunovCertificate {
    Eigen::VectorXd v_star;   ///< rotation direction, unnormalized
    Eigen::MatrixXd p_matrix; ///< symmetric positive definite weight
    Eigen::MatrixXd pi_matrix;
    double q1 = 1.0;
    double q2 = 1.0;
    double sigma = 1e-6; ///< regularization added to the rank-deficient Q
    Eigen::VectorXd decrease_spectrum; ///< eigenvalues of sym(Pi A) on the complement of v
    double block_coupling_ratio = 0.0; ///< ||P_12|| / ||P||, deviation from block-diagonal structure
};

struct CertificateOptions {
    double q1 = 1.0;
    double q2 = 1.0;
    double sigma = 1e-6;       ///< 0 selects the exact rank-1 Q2 (no regularization)
    double hurwitz_tol = 1e-9; ///< required stability margin of the reduced Jacobian
};

/// Builds the certificate: verifies the decentralized stability condition
/// at every converter, reduces A(z*) to the
/// orthogonal complement of v(z*), checks the reduced matrix is Hurwitz,
/// solves the reduced Lyapunov equation with
/// Q = diag(q1 I_2n, q2 (Jx*)(Jx*)^T / |Jx*|^2) + sigma I, and lifts.
LyapunovCertificate lyapunov_certificate(const Model& model, const Equilibrium& eq,
                                         const CertificateOptions& opts = {});

/// V(dz) = dz^T Pi dz, the squared P-weighted distance of dz to span{v(z*)}.
double lyapunov_value(const LyapunovCertificate& cert, const Eigen::VectorXd& delta_z);

} // namespace matchcon
