#include "matchcon/state.hpp"

namespace matchcon {

SystemState SystemState::zero(int n, int m) {
    SystemState s;
    s.gamma = Eigen::VectorXd::Zero(n);
    s.v_dc_tilde = Eigen::VectorXd::Zero(n);
    s.i_f = Eigen::VectorXd::Zero(2 * n);
    s.v_c = Eigen::VectorXd::Zero(2 * n);
    s.i_line = Eigen::VectorXd::Zero(2 * m);
    return s;
}

Eigen::VectorXd SystemState::pack() const {
    const int n = nodes(), m = lines();
    Eigen::VectorXd z(6 * n + 2 * m);
    z.segment(0, n) = gamma;
    z.segment(n, n) = v_dc_tilde;
    z.segment(2 * n, 2 * n) = i_f;
    z.segment(4 * n, 2 * n) = v_c;
    z.segment(6 * n, 2 * m) = i_line;
    return z;
}

SystemState SystemState::unpack(const Eigen::VectorXd& z, int n, int m) {
    if (z.size() != 6 * n + 2 * m) {
        throw ShapeError("stacked state has wrong dimension");
    }
    SystemState s;
    s.gamma = z.segment(0, n);
    s.v_dc_tilde = z.segment(n, n);
    s.i_f = z.segment(2 * n, 2 * n);
    s.v_c = z.segment(4 * n, 2 * n);
    s.i_line = z.segment(6 * n, 2 * m);
    return s;
}

Eigen::VectorXd SystemState::ac_signals() const {
    const int n = nodes(), m = lines();
    Eigen::VectorXd x(4 * n + 2 * m);
    x.segment(0, 2 * n) = i_f;
    x.segment(2 * n, 2 * n) = v_c;
    x.segment(4 * n, 2 * m) = i_line;
    return x;
}

} // namespace matchcon
