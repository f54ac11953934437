#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef MATCHCON_CLI_PATH
#error "MATCHCON_CLI_PATH must be defined"
#endif
#ifndef MATCHCON_BENCHMARK_DIR
#error "MATCHCON_BENCHMARK_DIR must be defined"
#endif

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args) {
    const std::string cmd = std::string(MATCHCON_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    REQUIRE(raw != -1);
    return WEXITSTATUS(raw);
}

std::string bench(const char* name) {
    return (fs::path(MATCHCON_BENCHMARK_DIR) / name).string();
}

fs::path make_out_dir(const char* name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("equilibrium subcommand: success and failure codes") {
    const auto dir = make_out_dir("matchcon_cli_eq");
    CHECK(run_cli("equilibrium --network " + bench("two_converter.json") + " --out " +
                  dir.string()) == 0);
    const auto doc = nlohmann::json::parse(read_file(dir / "equilibrium.json"));
    CHECK(doc["residual"].get<double>() < 1e-10);

    // solver starved of iterations
    CHECK(run_cli("equilibrium --network " + bench("two_converter.json") +
                  " --gauge 1.3 --max-iter 0 --out " + dir.string()) == 2);
    // missing file
    CHECK(run_cli("equilibrium --network /nonexistent.json --out " + dir.string()) == 1);
    fs::remove_all(dir);
}

TEST_CASE("equilibrium subcommand: invalid mu reported as input error") {
    const auto dir = make_out_dir("matchcon_cli_badmu");
    const fs::path bad = dir / "bad.json";
    {
        std::ofstream out(bad);
        nlohmann::json doc = nlohmann::json::parse(read_file(bench("two_converter.json")));
        doc["converter"]["mu"] = 1.5;
        out << doc.dump();
    }
    CHECK(run_cli("equilibrium --network " + bad.string() + " --out " + dir.string()) == 1);
    fs::remove_all(dir);
}

TEST_CASE("condition subcommand: benchmark outcomes") {
    const auto dir = make_out_dir("matchcon_cli_cond");
    CHECK(run_cli("condition --network " + bench("two_converter.json") + " --out " +
                  dir.string()) == 0);
    CHECK(run_cli("condition --network " + bench("two_converter_b0.json") + " --out " +
                  dir.string()) == 3);
    const auto doc = nlohmann::json::parse(read_file(dir / "condition.json"));
    REQUIRE(doc.size() == 2);
    for (const auto& rec : doc) {
        CHECK(rec["threshold"].get<double>() == doctest::Approx(34031.25));
        CHECK(rec["margin"].get<double>() < 0.0); // last run was b = 0
    }
    // override puts it back above threshold
    CHECK(run_cli("condition --network " + bench("two_converter_b0.json") +
                  " --b-load-override 1.08 --out " + dir.string()) == 0);
    fs::remove_all(dir);
}

TEST_CASE("certify subcommand: artifacts and refusal code") {
    const auto dir = make_out_dir("matchcon_cli_cert");
    CHECK(run_cli("certify --network " + bench("two_converter.json") + " --seed 5 --out " +
                  dir.string()) == 0);
    CHECK(fs::exists(dir / "certificate.json"));
    CHECK(fs::exists(dir / "p_matrix.bin"));
    CHECK(fs::exists(dir / "pi_matrix.bin"));
    const auto doc = nlohmann::json::parse(read_file(dir / "certificate.json"));
    CHECK(doc["sampled_decrease_max"].get<double>() < 0.0);

    CHECK(run_cli("certify --network " + bench("two_converter_b0.json") + " --out " +
                  dir.string()) == 3);
    fs::remove_all(dir);
}

TEST_CASE("simulate subcommand: flatline from the equilibrium, deterministic rerun") {
    const auto dir = make_out_dir("matchcon_cli_sim");
    const std::string args = "simulate --network " + bench("two_converter.json") +
                             " --horizon 0.02 --out " + dir.string();
    CHECK(run_cli(args) == 0);
    const std::string first = read_file(dir / "trajectory.csv");
    CHECK(run_cli(args) == 0);
    CHECK(read_file(dir / "trajectory.csv") == first);
    // flatline: every distance entry below 1e-9
    std::istringstream in(first);
    std::string row;
    std::getline(in, row); // header
    while (std::getline(in, row)) {
        const auto pos = row.rfind(',');
        CHECK(std::stod(row.substr(pos + 1)) < 1e-9);
    }
    fs::remove_all(dir);
}

TEST_CASE("region subcommand: tiny grid emits csv and summary") {
    const auto dir = make_out_dir("matchcon_cli_region");
    CHECK(run_cli("region --network " + bench("two_converter.json") +
                  " --grid 3 --horizon 0.5 --out " + dir.string()) == 0);
    const std::string csv = read_file(dir / "region.csv");
    CHECK(csv.rfind("dgamma1,dgamma2,v0,converged,final_distance", 0) == 0);
    const auto summary = nlohmann::json::parse(read_file(dir / "region_summary.json"));
    CHECK(summary["samples"].get<int>() == 9);
    CHECK(summary["epsilon_star"].get<double>() >= 0.0);

    const std::string again = read_file(dir / "region.csv");
    CHECK(again == csv);
    fs::remove_all(dir);
}

TEST_SUITE_END();
