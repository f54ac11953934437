#pragma once

#include "matchcon/simulation.hpp"

#include <filesystem>
#include <string>

namespace matchcon {

/// Raised on malformed or invalid input files; `field` names the offender.
struct InputError : std::runtime_error {
    std::string field;
    InputError(const std::string& msg, std::string bad_field = {})
        : std::runtime_error(msg), field(std::move(bad_field)) {}
};

/// Reads a network description JSON:
///   {"omega_n_hz": number?, "converter": {...}, "line": {...},
///    "edges": [[i,j],...], "n": int}
/// Indices 0-based, all values p.u. Missing omega_n_hz defaults to 50 Hz.
/// `b_load_override`, when finite, replaces the converter b_load.
Model load_network(const std::filesystem::path& file,
                   double b_load_override = std::numeric_limits<double>::quiet_NaN());

/// {"gamma": [...], "x": [...], "u_dc": [...], "residual": r,
///  "condition1": [{"k", "q_sw", "threshold", "margin", "pass"}, ...]}
std::string equilibrium_to_json(const Model& model, const Equilibrium& eq);

std::string certificate_to_json(const LyapunovCertificate& cert);

/// Row-major float64 little-endian dump with a 3-int32 header (rows, cols,
/// version).
void write_matrix_binary(const std::filesystem::path& file, const Eigen::MatrixXd& mat);
Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& file);

/// CSV columns: time, gamma_1..n, vdc_1..n, i_d/i_q per node, v_d/v_q per
/// node, il_d/il_q per edge, V, dist (empty cells where not recorded).
void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj);

/// CSV columns: dgamma1..dgamman, v0, converged, final_distance.
void write_region_csv(const std::filesystem::path& file, const RegionEstimate& region);

std::string region_summary_json(const RegionEstimate& region);

} // namespace matchcon
