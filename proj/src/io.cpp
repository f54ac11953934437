#include "matchcon/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>

namespace matchcon {

using nlohmann::json;

namespace {

double require_number(const json& obj, const char* field) {
    if (!obj.contains(field) || !obj[field].is_number()) {
        throw InputError(std::string("missing or non-numeric field: ") + field, field);
    }
    return obj[field].get<double>();
}

} // namespace

Model load_network(const std::filesystem::path& file, double b_load_override) {
    std::ifstream in(file);
    if (!in) {
        throw InputError("cannot open network file: " + file.string());
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.contains("converter") || !doc["converter"].is_object()) {
        throw InputError("missing object field: converter", "converter");
    }
    if (!doc.contains("n") || !doc["n"].is_number_integer()) {
        throw InputError("missing integer field: n", "n");
    }

    const json& cj = doc["converter"];
    ConverterParams conv;
    conv.eta = require_number(cj, "eta");
    conv.c_dc = require_number(cj, "c_dc");
    conv.k_p = require_number(cj, "k_p");
    conv.mu = require_number(cj, "mu");
    conv.r_filter = require_number(cj, "r_filter");
    conv.l_filter = require_number(cj, "l_filter");
    conv.c_filter = require_number(cj, "c_filter");
    conv.g_load = require_number(cj, "g_load");
    conv.b_load = cj.value("b_load", 0.0);
    conv.v_dc_star = require_number(cj, "v_dc_star");
    conv.i_dc_star = require_number(cj, "i_dc_star");
    if (std::isfinite(b_load_override)) {
        conv.b_load = b_load_override;
    }

    Topology topo;
    topo.n = doc["n"].get<int>();
    if (doc.contains("edges")) {
        if (!doc["edges"].is_array()) {
            throw InputError("edges must be an array of [i,j] pairs", "edges");
        }
        for (const auto& e : doc["edges"]) {
            if (!e.is_array() || e.size() != 2) {
                throw InputError("edges must be an array of [i,j] pairs", "edges");
            }
            topo.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
    }

    LineParams line;
    if (!topo.edges.empty()) {
        if (!doc.contains("line") || !doc["line"].is_object()) {
            throw InputError("missing object field: line", "line");
        }
        line.r_line = require_number(doc["line"], "r_line");
        line.l_line = require_number(doc["line"], "l_line");
    }

    const double hz = doc.value("omega_n_hz", 50.0);
    if (!(hz > 0.0)) {
        throw InputError("omega_n_hz must be positive", "omega_n_hz");
    }

    try {
        return assemble_model(conv, line, topo, 2.0 * M_PI * hz);
    } catch (const ParameterError& e) {
        throw InputError(e.what());
    } catch (const TopologyError& e) {
        throw InputError(e.what());
    }
}

std::string equilibrium_to_json(const Model& model, const Equilibrium& eq) {
    json doc;
    doc["gamma"] = std::vector<double>(eq.z_star.gamma.begin(), eq.z_star.gamma.end());
    const Eigen::VectorXd x = eq.z_star.ac_signals();
    doc["x"] = std::vector<double>(x.begin(), x.end());
    const Eigen::VectorXd udc = eq.u_star.segment(model.n, model.n);
    doc["u_dc"] = std::vector<double>(udc.begin(), udc.end());
    doc["residual"] = eq.residual_norm;
    doc["v_dc_tilde"] =
        std::vector<double>(eq.z_star.v_dc_tilde.begin(), eq.z_star.v_dc_tilde.end());
    json cond = json::array();
    for (const auto& rec : eq.condition1) {
        cond.push_back({{"k", rec.k},
                        {"q_sw", rec.q_sw},
                        {"threshold", rec.threshold},
                        {"margin", rec.margin},
                        {"pass", rec.pass}});
    }
    doc["condition1"] = cond;
    return doc.dump(2);
}

std::string certificate_to_json(const LyapunovCertificate& cert) {
    json doc;
    doc["q1"] = cert.q1;
    doc["q2"] = cert.q2;
    doc["sigma"] = cert.sigma;
    doc["block_coupling_ratio"] = cert.block_coupling_ratio;
    json spec = json::array();
    for (Eigen::Index i = 0; i < cert.decrease_spectrum.size(); ++i) {
        spec.push_back({{"re", cert.decrease_spectrum[i]}, {"im", 0.0}});
    }
    doc["decrease_spectrum"] = spec;
    return doc.dump(2);
}

void write_matrix_binary(const std::filesystem::path& file, const Eigen::MatrixXd& mat) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + file.string());
    }
    const int32_t header[3] = {static_cast<int32_t>(mat.rows()),
                               static_cast<int32_t>(mat.cols()), 1};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    for (Eigen::Index r = 0; r < mat.rows(); ++r) {
        for (Eigen::Index c = 0; c < mat.cols(); ++c) {
            const double v = mat(r, c);
            out.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
    }
}

Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open for reading: " + file.string());
    }
    int32_t header[3];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in || header[2] != 1 || header[0] < 0 || header[1] < 0) {
        throw std::runtime_error("bad matrix header in " + file.string());
    }
    Eigen::MatrixXd mat(header[0], header[1]);
    for (int32_t r = 0; r < header[0]; ++r) {
        for (int32_t c = 0; c < header[1]; ++c) {
            double v;
            in.read(reinterpret_cast<char*>(&v), sizeof(v));
            mat(r, c) = v;
        }
    }
    if (!in) {
        throw std::runtime_error("truncated matrix file " + file.string());
    }
    return mat;
}

void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj) {
    std::ofstream out(file);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + file.string());
    }
    out << std::setprecision(17);
    const int n = traj.n, m = traj.m;
    out << "time";
    for (int k = 1; k <= n; ++k) out << ",gamma_" << k;
    for (int k = 1; k <= n; ++k) out << ",vdc_" << k;
    for (int k = 1; k <= n; ++k) out << ",i_d_" << k << ",i_q_" << k;
    for (int k = 1; k <= n; ++k) out << ",v_d_" << k << ",v_q_" << k;
    for (int e = 1; e <= m; ++e) out << ",il_d_" << e << ",il_q_" << e;
    out << ",V,dist\n";
    for (std::size_t row = 0; row < traj.times.size(); ++row) {
        out << traj.times[row];
        const Eigen::VectorXd& z = traj.states[row];
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            out << ',' << z[i];
        }
        out << ',';
        if (row < traj.lyapunov.size()) {
            out << traj.lyapunov[row];
        }
        out << ',';
        if (row < traj.distances.size()) {
            out << traj.distances[row];
        }
        out << '\n';
    }
}

void write_region_csv(const std::filesystem::path& file, const RegionEstimate& region) {
    std::ofstream out(file);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + file.string());
    }
    out << std::setprecision(17);
    const int axes =
        region.samples.empty() ? 0 : static_cast<int>(region.samples[0].angle_offset.size());
    for (int a = 1; a <= axes; ++a) {
        out << (a > 1 ? "," : "") << "dgamma" << a;
    }
    out << ",v0,converged,final_distance\n";
    for (const auto& s : region.samples) {
        for (int a = 0; a < axes; ++a) {
            out << (a > 0 ? "," : "") << s.angle_offset[a];
        }
        out << ',' << s.v0 << ',' << (s.converged ? 1 : 0) << ',' << s.final_distance
            << '\n';
    }
}

std::string region_summary_json(const RegionEstimate& region) {
    json doc;
    doc["epsilon_star"] = region.epsilon_star;
    doc["grid_spec"] = region.grid_spec;
    long converged = 0;
    for (const auto& s : region.samples) {
        converged += s.converged ? 1 : 0;
    }
    doc["samples"] = region.samples.size();
    doc["converged_samples"] = converged;
    return doc.dump(2);
}

} // namespace matchcon
