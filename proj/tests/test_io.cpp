#include "test_helpers.hpp"

#include "matchcon/io.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>

using namespace matchcon;
using namespace matchcon::testing;

#ifndef MATCHCON_BENCHMARK_DIR
#error "MATCHCON_BENCHMARK_DIR must be defined"
#endif

namespace {

std::filesystem::path benchmark_file(const char* name) {
    return std::filesystem::path(MATCHCON_BENCHMARK_DIR) / name;
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("network loading: benchmark file") {
    const Model mdl = load_network(benchmark_file("two_converter.json"));
    CHECK(mdl.n == 2);
    CHECK(mdl.m == 1);
    CHECK(mdl.conv.b_load == doctest::Approx(1.08));
    CHECK(mdl.conv.i_dc_star == doctest::Approx(37.23));
    CHECK(mdl.omega_n == doctest::Approx(2.0 * M_PI * 60.0));

    const Model b0 = load_network(benchmark_file("two_converter_b0.json"));
    CHECK(b0.conv.b_load == 0.0);

    const Model overridden = load_network(benchmark_file("two_converter.json"), 0.5);
    CHECK(overridden.conv.b_load == doctest::Approx(0.5));
}

TEST_CASE("network loading: errors name the offending field") {
    const auto path = temp_file("matchcon_bad_network.json");
    {
        std::ofstream out(path);
        out << R"({"n": 2, "edges": [[0,1]], "line": {"r_line": 0.2, "l_line": 5e-5},
                   "converter": {"eta": 1e-4, "c_dc": 1e-3, "k_p": 0.1, "mu": 1.5,
                   "r_filter": 0.2, "l_filter": 5e-4, "c_filter": 1e-5,
                   "g_load": 0.01, "v_dc_star": 1000, "i_dc_star": 37.23}})";
    }
    CHECK_THROWS_WITH_AS(load_network(path), "mu out of [0,1]", InputError);
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_network(path), InputError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_network(path), InputError);
}

TEST_CASE("equilibrium serialization carries the condition records") {
    const Model mdl = benchmark_model();
    const Equilibrium eq = solve_equilibrium(
        mdl, dc_input(mdl, Eigen::VectorXd::Constant(2, 37.23)), 0.0);
    const auto doc = nlohmann::json::parse(equilibrium_to_json(mdl, eq));
    CHECK(doc["gamma"].size() == 2);
    CHECK(doc["x"].size() == 10);
    CHECK(doc["u_dc"].size() == 2);
    CHECK(doc["residual"].get<double>() < 1e-10);
    REQUIRE(doc["condition1"].size() == 2);
    CHECK(doc["condition1"][0]["threshold"].get<double>() ==
          doctest::Approx(34031.25));
    CHECK(doc["condition1"][0]["pass"].get<bool>());
}

TEST_CASE("matrix dump round trip") {
    std::mt19937_64 rng(89);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd mat(5, 3);
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 3; ++c) {
            mat(r, c) = gauss(rng);
        }
    }
    const auto path = temp_file("matchcon_matrix.bin");
    write_matrix_binary(path, mat);
    const Eigen::MatrixXd back = read_matrix_binary(path);
    CHECK((mat - back).lpNorm<Eigen::Infinity>() == 0.0);
    // header: rows, cols, version as little-endian int32
    std::ifstream in(path, std::ios::binary);
    int32_t header[3];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    CHECK(header[0] == 5);
    CHECK(header[1] == 3);
    CHECK(header[2] == 1);
    std::filesystem::remove(path);
}

TEST_CASE("trajectory and region CSV shapes") {
    const Model mdl = benchmark_model();
    const Equilibrium eq = solve_equilibrium(
        mdl, dc_input(mdl, Eigen::VectorXd::Constant(2, 37.23)), 0.0);
    IntegrateOptions opts;
    opts.dt = 1e-5;
    opts.t_end = 0.01;
    opts.record_dt = 1e-3;
    Trajectory traj = integrate(mdl, eq.z_star, eq.u_star, opts);
    const auto traj_path = temp_file("matchcon_traj.csv");
    write_trajectory_csv(traj_path, traj);
    std::ifstream in(traj_path);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "time,gamma_1,gamma_2,vdc_1,vdc_2,i_d_1,i_q_1,i_d_2,i_q_2,"
          "v_d_1,v_q_1,v_d_2,v_q_2,il_d_1,il_q_1,V,dist");
    std::size_t rows = 0;
    for (std::string row; std::getline(in, row);) {
        ++rows;
    }
    CHECK(rows == traj.times.size());
    std::filesystem::remove(traj_path);

    RegionEstimate est;
    RegionSample s;
    s.angle_offset = Eigen::Vector2d(0.1, -0.1);
    s.v0 = 2.0;
    s.converged = true;
    s.final_distance = 1e-6;
    est.samples.push_back(s);
    est.epsilon_star = 2.0;
    est.grid_spec = "1x1";
    const auto region_path = temp_file("matchcon_region.csv");
    write_region_csv(region_path, est);
    std::ifstream rin(region_path);
    std::getline(rin, header);
    CHECK(header == "dgamma1,dgamma2,v0,converged,final_distance");
    std::filesystem::remove(region_path);

    const auto summary = nlohmann::json::parse(region_summary_json(est));
    CHECK(summary["epsilon_star"].get<double>() == 2.0);
    CHECK(summary["converged_samples"].get<int>() == 1);
}

TEST_SUITE_END();
