#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace matchcon {

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Stacked state z = (gamma, v_dc_tilde, i_f, v_c, i_line) of an n-node,
/// m-edge network. Angles are kept unwrapped; dq pairs are interleaved per
/// node (edge).
struct SystemState {
    Eigen::VectorXd gamma;      ///< n virtual angles, rad
    Eigen::VectorXd v_dc_tilde; ///< n DC voltages relative to nominal
    Eigen::VectorXd i_f;        ///< 2n filter currents (d,q per node)
    Eigen::VectorXd v_c;        ///< 2n capacitor voltages (d,q per node)
    Eigen::VectorXd i_line;     ///< 2m line currents (d,q per edge)

    SystemState() = default;

    static SystemState zero(int n, int m);

    int nodes() const { return static_cast<int>(gamma.size()); }
    int lines() const { return static_cast<int>(i_line.size()) / 2; }
    int dim() const { return 6 * nodes() + 2 * lines(); }

    /// Stacks the blocks into one vector of length 6n + 2m.
    Eigen::VectorXd pack() const;

    /// Splits a stacked vector back into blocks.
    static SystemState unpack(const Eigen::VectorXd& z, int n, int m);

    /// AC block x = (i_f, v_c, i_line), length 4n + 2m.
    Eigen::VectorXd ac_signals() const;
};

} // namespace matchcon
