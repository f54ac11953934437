#include "test_helpers.hpp"

#include "matchcon/model.hpp"

#include <doctest.h>

using namespace matchcon;
using namespace matchcon::testing;

TEST_SUITE_BEGIN("model");

TEST_CASE("assembly: benchmark dimensions") {
    const Model mdl = benchmark_model();
    CHECK(mdl.n == 2);
    CHECK(mdl.m == 1);
    CHECK(mdl.N == 14);
    CHECK(mdl.coupling.rows() == 4);
    CHECK(mdl.coupling.cols() == 2);
}

TEST_CASE("assembly: edgeless single node") {
    Topology topo;
    topo.n = 1;
    const Model mdl = assemble_model(benchmark_converter(0.0), LineParams{}, topo,
                                     100.0 * M_PI);
    CHECK(mdl.N == 6);
    CHECK(mdl.coupling.size() == 0);
}

TEST_CASE("assembly: incidence columns sum to zero") {
    Topology topo;
    topo.n = 4;
    topo.edges = {{0, 1}, {1, 2}, {3, 2}, {0, 3}, {1, 3}};
    const Model mdl =
        assemble_model(benchmark_converter(), benchmark_line(), topo, 100.0 * M_PI);
    for (int e = 0; e < mdl.m; ++e) {
        CHECK(mdl.incidence.col(e).sum() == 0.0);
        CHECK(mdl.incidence.col(e).cwiseAbs().sum() == 2.0);
    }
}

TEST_CASE("assembly: invalid parameters rejected") {
    auto conv = benchmark_converter();
    conv.mu = 1.5;
    Topology topo;
    topo.n = 2;
    topo.edges = {{0, 1}};
    CHECK_THROWS_AS(assemble_model(conv, benchmark_line(), topo, 100.0 * M_PI),
                    ParameterError);
    conv = benchmark_converter();
    conv.c_dc = 0.0;
    CHECK_THROWS_AS(assemble_model(conv, benchmark_line(), topo, 100.0 * M_PI),
                    ParameterError);
}

TEST_CASE("assembly: disconnected graph rejected") {
    Topology topo;
    topo.n = 3;
    topo.edges = {{0, 1}};
    CHECK_THROWS_AS(assemble_model(benchmark_converter(), benchmark_line(), topo,
                                   100.0 * M_PI),
                    TopologyError);
}

TEST_CASE("impedance blocks commute with rotations") {
    const Model mdl = benchmark_model();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-M_PI, M_PI);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Matrix2d r = rotation2(uni(rng));
        for (const Eigen::Matrix2d& z : {mdl.z_r, mdl.z_c, mdl.z_l, skew_j()}) {
            CHECK((r * z - z * r).norm() < 1e-12);
        }
    }
}

TEST_CASE("vector field: symmetry invariance over random states") {
    const Model mdl = benchmark_model();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-M_PI, M_PI);
    for (int trial = 0; trial < 100; ++trial) {
        const SystemState z = random_state(rng, mdl.n, mdl.m, 2.0);
        const Eigen::VectorXd u = random_dc_input(rng, mdl.n, mdl.m, 10.0);
        const double theta = uni(rng);
        const Eigen::VectorXd lhs = vector_field(mdl, group_action(z, theta), u);
        const Eigen::VectorXd rhs =
            rotate_stacked(vector_field(mdl, z, u), theta, mdl.n, mdl.m);
        CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-9);
    }
}

TEST_CASE("vector field: input affine") {
    const Model mdl = benchmark_model();
    std::mt19937_64 rng(13);
    const SystemState z = random_state(rng, mdl.n, mdl.m);
    const Eigen::VectorXd u1 = random_dc_input(rng, mdl.n, mdl.m);
    const Eigen::VectorXd u2 = random_dc_input(rng, mdl.n, mdl.m);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(mdl.N);
    const Eigen::VectorXd gap = vector_field(mdl, z, u1 + u2) -
                                vector_field(mdl, z, u1) - vector_field(mdl, z, u2) +
                                vector_field(mdl, z, zero);
    CHECK(gap.lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("vector field: single node matches hand-coded per-converter dynamics") {
    Topology topo;
    topo.n = 1;
    const auto conv = benchmark_converter(0.0);
    const double omega_n = 100.0 * M_PI;
    const Model mdl = assemble_model(conv, LineParams{}, topo, omega_n);

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const SystemState z = random_state(rng, 1, 0, 3.0);
        std::normal_distribution<double> gauss(0.0, 5.0);
        Eigen::VectorXd u = Eigen::VectorXd::Zero(6);
        u[1] = gauss(rng);

        // independent single-converter right-hand side, i_net = 0
        const double gamma = z.gamma[0];
        const double vdc_abs = z.v_dc_tilde[0] + conv.v_dc_star;
        const Eigen::Vector2d r(-std::sin(gamma), std::cos(gamma));
        const Eigen::Vector2d i = z.i_f;
        const Eigen::Vector2d v = z.v_c;
        Eigen::Matrix2d zr, zc, j;
        j << 0, -1, 1, 0;
        zr = conv.r_filter * Eigen::Matrix2d::Identity() + conv.l_filter * omega_n * j;
        zc = conv.g_load * Eigen::Matrix2d::Identity() + conv.c_filter * omega_n * j;
        Eigen::VectorXd expected(6);
        expected[0] = conv.eta * (vdc_abs - conv.v_dc_star);
        expected[1] = (-conv.k_p * (vdc_abs - conv.v_dc_star) - 0.5 * conv.mu * r.dot(i) +
                       u[1]) /
                      conv.c_dc;
        expected.segment<2>(2) = (-zr * i + 0.5 * conv.mu * r * vdc_abs - v) / conv.l_filter;
        expected.segment<2>(4) = (-zc * v + i) / conv.c_filter;

        const Eigen::VectorXd got = vector_field(mdl, z, u);
        CHECK((got - expected).lpNorm<Eigen::Infinity>() <
              1e-14 * expected.lpNorm<Eigen::Infinity>());
    }
}

TEST_CASE("vector field: dimension mismatch rejected") {
    const Model mdl = benchmark_model();
    const SystemState z = SystemState::zero(1, 0);
    CHECK_THROWS_AS(vector_field(mdl, z, Eigen::VectorXd::Zero(mdl.N)), ShapeError);
    CHECK_THROWS_AS(vector_field(mdl, SystemState::zero(2, 1), Eigen::VectorXd::Zero(3)),
                    ShapeError);
}

TEST_CASE("state: pack/unpack round trip") {
    std::mt19937_64 rng(19);
    const SystemState z = random_state(rng, 3, 2);
    const SystemState back = SystemState::unpack(z.pack(), 3, 2);
    CHECK((z.pack() - back.pack()).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(z.dim() == 6 * 3 + 2 * 2);
}

TEST_CASE("group action: identity, full turn, group law") {
    std::mt19937_64 rng(23);
    const SystemState z = random_state(rng, 2, 1);
    CHECK((group_action(z, 0.0).pack() - z.pack()).lpNorm<Eigen::Infinity>() == 0.0);

    const SystemState turned = group_action(z, 2.0 * M_PI);
    CHECK(quotient_distance(turned, z).distance < 1e-9);
    for (int k = 0; k < 2; ++k) {
        CHECK(wrap_angle(turned.gamma[k] - z.gamma[k]) == doctest::Approx(0.0).epsilon(1e-12));
    }

    const double a = 0.7, b = -1.9;
    const Eigen::VectorXd lhs = group_action(group_action(z, a), b).pack();
    const Eigen::VectorXd rhs = group_action(z, a + b).pack();
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("quotient distance: zero on orbits and symmetric") {
    std::mt19937_64 rng(29);
    const SystemState z = random_state(rng, 2, 1, 2.0);
    for (double theta : {0.0, 0.4, -2.7, 3.1}) {
        CHECK(quotient_distance(z, group_action(z, theta)).distance < 1e-8);
    }
    const SystemState w = random_state(rng, 2, 1, 2.0);
    const double d12 = quotient_distance(z, w).distance;
    const double d21 = quotient_distance(w, z).distance;
    CHECK(std::abs(d12 - d21) < 1e-9);
}

TEST_CASE("quotient distance: grid+refine beats a 10x finer grid") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const SystemState z1 = random_state(rng, 2, 1, 2.0);
        const SystemState z2 = random_state(rng, 2, 1, 2.0);
        const double refined = quotient_distance(z1, z2).distance;
        // brute-force oracle on a 7200-point grid
        double best = std::numeric_limits<double>::infinity();
        for (int g = 0; g < 7200; ++g) {
            const double theta = -M_PI + 2.0 * M_PI * g / 7200.0;
            SystemState shifted = group_action(z2, theta);
            Eigen::VectorXd diff = z1.pack() - shifted.pack();
            for (int k = 0; k < 2; ++k) {
                diff[k] = wrap_angle(diff[k]);
            }
            best = std::min(best, diff.norm());
        }
        CHECK(refined <= best + 1e-8);
    }
}

TEST_CASE("quotient distance: pseudo-metric triangle inequality") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const SystemState a = random_state(rng, 2, 1);
        const SystemState b = random_state(rng, 2, 1);
        const SystemState c = random_state(rng, 2, 1);
        const double ab = quotient_distance(a, b).distance;
        const double bc = quotient_distance(b, c).distance;
        const double ac = quotient_distance(a, c).distance;
        CHECK(ac <= ab + bc + 1e-8);
        CHECK(ab >= 0.0);
    }
}

TEST_SUITE_END();
