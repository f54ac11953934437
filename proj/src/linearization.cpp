#include "matchcon/linearization.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace matchcon {

JacobianData jacobian(const Model& model, const SystemState& z) {
    const int n = model.n, m = model.m;
    if (z.nodes() != n || z.lines() != m) {
        throw ShapeError("jacobian: dimension mismatch");
    }
    const auto& c = model.conv;
    const double half_mu = 0.5 * c.mu;
    const Eigen::Matrix2d j2 = skew_j();

    JacobianData out;
    out.n = n;
    out.m = m;
    Eigen::MatrixXd& a = out.a;
    a = Eigen::MatrixXd::Zero(model.N, model.N);

    const int og = 0, ov = n, oi = 2 * n, oc = 4 * n, ol = 6 * n;
    for (int k = 0; k < n; ++k) {
        const Eigen::Vector2d r = modulation_vector(z.gamma[k]);
        const Eigen::Vector2d jr = j2 * r; // d r / d gamma
        const Eigen::Vector2d ik = z.i_f.segment<2>(2 * k);
        const double vdc_abs = z.v_dc_tilde[k] + c.v_dc_star;

        // angle row
        a(og + k, ov + k) = c.eta;
        // DC row
        a(ov + k, og + k) = -half_mu * jr.dot(ik) / c.c_dc;
        a(ov + k, ov + k) = -c.k_p / c.c_dc;
        a.block<1, 2>(ov + k, oi + 2 * k) = -half_mu * r.transpose() / c.c_dc;
        // filter current rows
        a.block<2, 1>(oi + 2 * k, og + k) = half_mu * jr * vdc_abs / c.l_filter;
        a.block<2, 1>(oi + 2 * k, ov + k) = half_mu * r / c.l_filter;
        a.block<2, 2>(oi + 2 * k, oi + 2 * k) = -model.z_r / c.l_filter;
        a.block<2, 2>(oi + 2 * k, oc + 2 * k) = -Eigen::Matrix2d::Identity() / c.l_filter;
        // capacitor rows
        a.block<2, 2>(oc + 2 * k, oi + 2 * k) = Eigen::Matrix2d::Identity() / c.c_filter;
        a.block<2, 2>(oc + 2 * k, oc + 2 * k) = -model.z_c / c.c_filter;
    }
    if (m > 0) {
        a.block(oc, ol, 2 * n, 2 * m) = -model.coupling / c.c_filter;
        a.block(ol, oc, 2 * m, 2 * n) = model.coupling.transpose() / model.line.l_line;
        for (int e = 0; e < m; ++e) {
            a.block<2, 2>(ol + 2 * e, ol + 2 * e) = -model.z_l / model.line.l_line;
        }
    }
    return out;
}

Eigen::MatrixXd deviation_matrix(const Model& model, const SystemState& z,
                                 const SystemState& z_star) {
    const int n = model.n;
    const auto& c = model.conv;
    const double half_mu = 0.5 * c.mu;
    const Eigen::Matrix2d j2 = skew_j();

    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(model.N, model.N);
    const int og = 0, ov = n, oi = 2 * n;
    for (int k = 0; k < n; ++k) {
        const Eigen::Vector2d r = modulation_vector(z.gamma[k]);
        const Eigen::Vector2d rs = modulation_vector(z_star.gamma[k]);
        const Eigen::Vector2d jr = j2 * r;
        const Eigen::Vector2d jrs = j2 * rs;
        const double vdc_abs = z.v_dc_tilde[k] + c.v_dc_star;
        const double vdc_star_abs = z_star.v_dc_tilde[k] + c.v_dc_star;

        // W-hat: angle sensitivity of the DC power draw
        const double w_hat = half_mu * (jr.dot(z.i_f.segment<2>(2 * k)) -
                                        jrs.dot(z_star.i_f.segment<2>(2 * k)));
        g(ov + k, og + k) = -w_hat / c.c_dc;
        // Y-hat: modulation direction mismatch
        const Eigen::Vector2d y_hat = half_mu * (r - rs);
        g.block<1, 2>(ov + k, oi + 2 * k) = -y_hat.transpose() / c.c_dc;
        g.block<2, 1>(oi + 2 * k, ov + k) = y_hat / c.l_filter;
        // M-hat: angle sensitivity of the injected AC voltage
        const Eigen::Vector2d m_hat = half_mu * (vdc_abs * jr - vdc_star_abs * jrs);
        g.block<2, 1>(oi + 2 * k, og + k) = m_hat / c.l_filter;
    }
    return g;
}

Eigen::VectorXd zero_direction(const Model& model, const SystemState& z_star) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(model.N);
    v.head(model.n).setOnes();
    const Eigen::Matrix2d j2 = skew_j();
    const Eigen::VectorXd x = z_star.ac_signals();
    for (int b = 0; b < 2 * model.n + model.m; ++b) {
        v.segment<2>(2 * model.n + 2 * b) = j2 * x.segment<2>(2 * b);
    }
    return v;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
    // Solves a^T p + p a = -q (Bartels-Stewart, complex Schur of b = a^T).
    const Eigen::Index dim = a.rows();
    const Eigen::MatrixXcd b = a.transpose().cast<std::complex<double>>();
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(b);
    if (schur.info() != Eigen::Success) {
        throw std::runtime_error("solve_lyapunov: Schur decomposition failed");
    }
    const Eigen::MatrixXcd& t = schur.matrixT();
    const Eigen::MatrixXcd& u = schur.matrixU();

    // t y + y t^H = -u^H q u, solved column by column from the last
    Eigen::MatrixXcd rhs = -u.adjoint() * q * u;
    Eigen::MatrixXcd y(dim, dim);
    for (Eigen::Index col = dim - 1; col >= 0; --col) {
        Eigen::VectorXcd c = rhs.col(col);
        for (Eigen::Index k = col + 1; k < dim; ++k) {
            c -= std::conj(t(col, k)) * y.col(k);
        }
        Eigen::MatrixXcd shifted = t;
        shifted.diagonal().array() += std::conj(t(col, col));
        y.col(col) =
            shifted.triangularView<Eigen::Upper>().solve(c);
    }
    Eigen::MatrixXd p = (u * y * u.adjoint()).real();
    return 0.5 * (p + p.transpose());
}

LyapunovCertificate lyapunov_certificate(const Model& model, const Equilibrium& eq,
                                         const CertificateOptions& opts) {
    for (const auto& rec : eq.condition1) {
        if (!rec.pass) {
            throw CertificateError(
                "certificate refused: equilibrium condition fails at converter " +
                std::to_string(rec.k));
        }
    }
    const int n = model.n;
    const int big_n = model.N;

    LyapunovCertificate cert;
    cert.q1 = opts.q1;
    cert.q2 = opts.q2;
    cert.sigma = opts.sigma;
    cert.v_star = zero_direction(model, eq.z_star);

    // orthonormal basis of the complement of v via a full Householder QR
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(cert.v_star);
    const Eigen::MatrixXd q_full = qr.householderQ();
    const Eigen::MatrixXd basis = q_full.rightCols(big_n - 1);

    const Eigen::MatrixXd a = jacobian(model, eq.z_star).a;
    const Eigen::MatrixXd a_r = basis.transpose() * a * basis;
    Eigen::EigenSolver<Eigen::MatrixXd> es(a_r);
    const Eigen::VectorXcd lambda = es.eigenvalues();
    std::vector<std::complex<double>> bad;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i].real() >= -opts.hurwitz_tol) {
            bad.push_back(lambda[i]);
        }
    }
    if (!bad.empty()) {
        Eigen::VectorXcd offending =
            Eigen::Map<Eigen::VectorXcd>(bad.data(), static_cast<Eigen::Index>(bad.size()));
        throw InstabilityError(
            "reduced Jacobian is not Hurwitz on the complement of v(z*)", offending);
    }

    // Q = diag(q1 I_2n, q2 (Jx)(Jx)^T / |Jx|^2) + sigma I
    Eigen::MatrixXd q = opts.sigma * Eigen::MatrixXd::Identity(big_n, big_n);
    q.diagonal().head(2 * n).array() += opts.q1;
    const Eigen::VectorXd jx = cert.v_star.tail(big_n - 2 * n);
    const double jx_norm2 = jx.squaredNorm();
    if (jx_norm2 > 0.0) {
        q.bottomRightCorner(big_n - 2 * n, big_n - 2 * n) +=
            (opts.q2 / jx_norm2) * (jx * jx.transpose());
    }

    const Eigen::MatrixXd q_r = basis.transpose() * q * basis;

    // The reduced system mixes rates spanning nine decades, so the plain
    // double-precision solve leaves a residual comparable to the sigma
    // regularization. A few extended-precision refinement passes push the
    // Lyapunov residual well below sigma, which is what makes the strict
    // decrease certifiable.
    using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const MatrixXld a_ld = a_r.cast<long double>();
    const MatrixXld q_ld = q_r.cast<long double>();
    MatrixXld p_ld = solve_lyapunov(a_r, q_r).cast<long double>();
    for (int pass = 0; pass < 3; ++pass) {
        const MatrixXld res_ld = a_ld.transpose() * p_ld + p_ld * a_ld + q_ld;
        p_ld -= solve_lyapunov(a_r, -res_ld.cast<double>()).cast<long double>();
        p_ld = (0.5L * (p_ld + p_ld.transpose())).eval();
    }
    const Eigen::MatrixXd p_r = p_ld.cast<double>();
    Eigen::MatrixXd p = basis * p_r * basis.transpose() +
                        cert.v_star * cert.v_star.transpose() / cert.v_star.squaredNorm();
    p = 0.5 * (p + p.transpose());
    cert.p_matrix = p;

    const Eigen::VectorXd pv = p * cert.v_star;
    cert.pi_matrix = p - pv * pv.transpose() / cert.v_star.dot(pv);
    cert.pi_matrix = 0.5 * (cert.pi_matrix + cert.pi_matrix.transpose());

    // Restricted decrease matrix. Because Pi = U P_r U^T and U^T A U = A_r,
    // U^T (Pi A + A^T Pi) U equals P_r A_r + A_r^T P_r; forming it from the
    // extended-precision reduced quantities avoids the cancellation noise of
    // the N x N product, which would otherwise swamp the sigma margin.
    const MatrixXld decrease_ld = p_ld * a_ld + a_ld.transpose() * p_ld;
    const Eigen::MatrixXd decrease =
        (0.5L * (decrease_ld + decrease_ld.transpose())).cast<double>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> des(decrease);
    cert.decrease_spectrum = des.eigenvalues();

    cert.block_coupling_ratio =
        p.topRightCorner(2 * n, big_n - 2 * n).norm() / p.norm();
    return cert;
}

double lyapunov_value(const LyapunovCertificate& cert, const Eigen::VectorXd& delta_z) {
    if (delta_z.size() != cert.pi_matrix.rows()) {
        throw ShapeError("lyapunov_value: dimension mismatch");
    }
    return std::max(0.0, delta_z.dot(cert.pi_matrix * delta_z));
}

} // namespace matchcon
