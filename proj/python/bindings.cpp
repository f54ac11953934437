#include "matchcon/io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace matchcon;

PYBIND11_MODULE(_matchcon, mod) {
    mod.doc() = "Simulation and certification toolkit for networks of "
                "identical DC/AC converters under matching control";

    // --- exceptions ---
    py::register_exception<ParameterError>(mod, "ParameterError", PyExc_ValueError);
    py::register_exception<TopologyError>(mod, "TopologyError", PyExc_ValueError);
    py::register_exception<ShapeError>(mod, "ShapeError", PyExc_ValueError);
    py::register_exception<InputError>(mod, "InputError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(mod, "ConvergenceError", PyExc_RuntimeError);
    py::register_exception<RankDeficiencyError>(mod, "RankDeficiencyError",
                                                PyExc_RuntimeError);
    py::register_exception<CertificateError>(mod, "CertificateError", PyExc_RuntimeError);
    py::register_exception<InstabilityError>(mod, "InstabilityError", PyExc_RuntimeError);
    py::register_exception<DivergenceError>(mod, "DivergenceError", PyExc_RuntimeError);

    // --- parameters and topology ---
    py::class_<ConverterParams>(mod, "ConverterParams")
        .def(py::init<>())
        .def_readwrite("eta", &ConverterParams::eta)
        .def_readwrite("c_dc", &ConverterParams::c_dc)
        .def_readwrite("k_p", &ConverterParams::k_p)
        .def_readwrite("mu", &ConverterParams::mu)
        .def_readwrite("r_filter", &ConverterParams::r_filter)
        .def_readwrite("l_filter", &ConverterParams::l_filter)
        .def_readwrite("c_filter", &ConverterParams::c_filter)
        .def_readwrite("g_load", &ConverterParams::g_load)
        .def_readwrite("b_load", &ConverterParams::b_load)
        .def_readwrite("v_dc_star", &ConverterParams::v_dc_star)
        .def_readwrite("i_dc_star", &ConverterParams::i_dc_star)
        .def("validate", &ConverterParams::validate);

    py::class_<LineParams>(mod, "LineParams")
        .def(py::init<>())
        .def_readwrite("r_line", &LineParams::r_line)
        .def_readwrite("l_line", &LineParams::l_line)
        .def("validate", &LineParams::validate);

    py::class_<Topology>(mod, "Topology")
        .def(py::init<>())
        .def_readwrite("n", &Topology::n)
        .def_readwrite("edges", &Topology::edges)
        .def_property_readonly("m", &Topology::edge_count)
        .def("validate", &Topology::validate);

    // --- state ---
    py::class_<SystemState>(mod, "SystemState")
        .def(py::init<>())
        .def_static("zero", &SystemState::zero, py::arg("n"), py::arg("m"))
        .def_static("unpack", &SystemState::unpack, py::arg("z"), py::arg("n"),
                    py::arg("m"))
        .def_readwrite("gamma", &SystemState::gamma)
        .def_readwrite("v_dc_tilde", &SystemState::v_dc_tilde)
        .def_readwrite("i_f", &SystemState::i_f)
        .def_readwrite("v_c", &SystemState::v_c)
        .def_readwrite("i_line", &SystemState::i_line)
        .def_property_readonly("n", &SystemState::nodes)
        .def_property_readonly("m", &SystemState::lines)
        .def("pack", &SystemState::pack)
        .def("ac_signals", &SystemState::ac_signals);

    // --- model ---
    py::class_<Model>(mod, "Model")
        .def_readonly("conv", &Model::conv)
        .def_readonly("line", &Model::line)
        .def_readonly("topo", &Model::topo)
        .def_readonly("omega_n", &Model::omega_n)
        .def_readonly("n", &Model::n)
        .def_readonly("m", &Model::m)
        .def_readonly("N", &Model::N)
        .def_readonly("incidence", &Model::incidence);

    mod.def("assemble_model", &assemble_model, py::arg("converter"), py::arg("line"),
            py::arg("topology"), py::arg("omega_n"));
    mod.def("vector_field", &vector_field, py::arg("model"), py::arg("z"),
            py::arg("u"));
    mod.def("group_action", &group_action, py::arg("z"), py::arg("theta"));
    mod.def("rotate_stacked", &rotate_stacked, py::arg("w"), py::arg("theta"),
            py::arg("n"), py::arg("m"));
    mod.def(
        "quotient_distance",
        [](const SystemState& z1, const SystemState& z2,
           const std::optional<Eigen::VectorXd>& weight, int grid_points) {
            const auto res = quotient_distance(z1, z2, weight, grid_points);
            return py::make_tuple(res.distance, res.theta_star);
        },
        py::arg("z1"), py::arg("z2"), py::arg("weight") = std::nullopt,
        py::arg("grid_points") = 720,
        "Returns (distance, theta_star) between the orbits of z1 and z2.");
    mod.def("wrap_angle", &wrap_angle, py::arg("a"));

    // --- equilibrium ---
    py::class_<Condition1Record>(mod, "Condition1Record")
        .def_readonly("k", &Condition1Record::k)
        .def_readonly("q_sw", &Condition1Record::q_sw)
        .def_readonly("threshold", &Condition1Record::threshold)
        .def_readonly("margin", &Condition1Record::margin)
        .def_readonly("passed", &Condition1Record::pass);

    py::class_<Equilibrium>(mod, "Equilibrium")
        .def_readonly("z_star", &Equilibrium::z_star)
        .def_readonly("u_star", &Equilibrium::u_star)
        .def_readonly("gauge_angle", &Equilibrium::gauge_angle)
        .def_readonly("residual_norm", &Equilibrium::residual_norm)
        .def_readonly("input_gap", &Equilibrium::input_gap)
        .def_readonly("condition1", &Equilibrium::condition1);

    py::class_<SolveOptions>(mod, "SolveOptions")
        .def(py::init<>())
        .def_readwrite("max_iter", &SolveOptions::max_iter)
        .def_readwrite("tol", &SolveOptions::tol);

    mod.def("feasible_input", &feasible_input, py::arg("model"), py::arg("z"));
    mod.def("dc_input", &dc_input, py::arg("model"), py::arg("i_dc"));
    mod.def("solve_equilibrium", &solve_equilibrium, py::arg("model"), py::arg("u"),
            py::arg("gauge_angle") = 0.0, py::arg("guess") = std::nullopt,
            py::arg("options") = SolveOptions{});
    mod.def("check_condition1", &check_condition1, py::arg("model"), py::arg("eq"));
    mod.def(
        "synchronization_report",
        [](const Model& model, const Equilibrium& eq) {
            const auto rep = synchronization_report(model, eq);
            return py::make_tuple(rep.omega, rep.v_dc);
        },
        py::arg("model"), py::arg("eq"),
        "Returns (relative_frequencies, dc_voltages) at the equilibrium.");
    mod.def("sweep_equilibria", &sweep_equilibria, py::arg("model"), py::arg("u"),
            py::arg("gamma_spreads"), py::arg("orbit_tol") = 1e-4);

    // --- linearization and certificate ---
    mod.def(
        "jacobian",
        [](const Model& model, const SystemState& z) { return jacobian(model, z).a; },
        py::arg("model"), py::arg("z"));
    mod.def("deviation_matrix", &deviation_matrix, py::arg("model"), py::arg("z"),
            py::arg("z_star"));
    mod.def("zero_direction", &zero_direction, py::arg("model"), py::arg("z_star"));
    mod.def("solve_lyapunov", &solve_lyapunov, py::arg("a"), py::arg("q"));

    py::class_<LyapunovCertificate>(mod, "LyapunovCertificate")
        .def_readonly("v_star", &LyapunovCertificate::v_star)
        .def_readonly("p_matrix", &LyapunovCertificate::p_matrix)
        .def_readonly("pi_matrix", &LyapunovCertificate::pi_matrix)
        .def_readonly("q1", &LyapunovCertificate::q1)
        .def_readonly("q2", &LyapunovCertificate::q2)
        .def_readonly("sigma", &LyapunovCertificate::sigma)
        .def_readonly("decrease_spectrum", &LyapunovCertificate::decrease_spectrum)
        .def_readonly("block_coupling_ratio",
                      &LyapunovCertificate::block_coupling_ratio);

    py::class_<CertificateOptions>(mod, "CertificateOptions")
        .def(py::init<>())
        .def_readwrite("q1", &CertificateOptions::q1)
        .def_readwrite("q2", &CertificateOptions::q2)
        .def_readwrite("sigma", &CertificateOptions::sigma)
        .def_readwrite("hurwitz_tol", &CertificateOptions::hurwitz_tol);

    mod.def("lyapunov_certificate", &lyapunov_certificate, py::arg("model"),
            py::arg("eq"), py::arg("options") = CertificateOptions{});
    mod.def("lyapunov_value", &lyapunov_value, py::arg("cert"), py::arg("delta_z"));

    // --- simulation ---
    py::enum_<IntegrationMethod>(mod, "IntegrationMethod")
        .value("RK4", IntegrationMethod::Rk4)
        .value("RK45_ADAPTIVE", IntegrationMethod::Rk45Adaptive);

    py::class_<IntegrateOptions>(mod, "IntegrateOptions")
        .def(py::init<>())
        .def_readwrite("dt", &IntegrateOptions::dt)
        .def_readwrite("t_end", &IntegrateOptions::t_end)
        .def_readwrite("method", &IntegrateOptions::method)
        .def_readwrite("abs_tol", &IntegrateOptions::abs_tol)
        .def_readwrite("rel_tol", &IntegrateOptions::rel_tol)
        .def_readwrite("record_dt", &IntegrateOptions::record_dt)
        .def_readwrite("blow_up", &IntegrateOptions::blow_up);

    py::class_<Trajectory>(mod, "Trajectory")
        .def_readonly("n", &Trajectory::n)
        .def_readonly("m", &Trajectory::m)
        .def_readonly("times", &Trajectory::times)
        .def_readonly("states", &Trajectory::states)
        .def_readonly("variational", &Trajectory::variational)
        .def_readonly("lyapunov", &Trajectory::lyapunov)
        .def_readonly("distances", &Trajectory::distances)
        .def("state_at", &Trajectory::state_at, py::arg("idx"));

    mod.def("integrate", &integrate, py::arg("model"), py::arg("z0"), py::arg("u"),
            py::arg("options") = IntegrateOptions{});
    mod.def(
        "integrate_variational",
        [](const Model& model, const SystemState& z0, const Eigen::VectorXd& dz0,
           const Eigen::VectorXd& u, const IntegrateOptions& opts,
           const LyapunovCertificate* cert) {
            return integrate_variational(model, z0, dz0, u, opts, cert);
        },
        py::arg("model"), py::arg("z0"), py::arg("delta_z0"), py::arg("u"),
        py::arg("options") = IntegrateOptions{}, py::arg("cert") = nullptr);

    py::class_<ConvergenceResult>(mod, "ConvergenceResult")
        .def_readonly("converged", &ConvergenceResult::converged)
        .def_readonly("final_distance", &ConvergenceResult::final_distance)
        .def_readonly("time_to_converge", &ConvergenceResult::time_to_converge);

    mod.def("classify_convergence", &classify_convergence, py::arg("traj"),
            py::arg("eq"), py::arg("tol") = 1e-4, py::arg("window") = -1.0);

    py::class_<RegionSample>(mod, "RegionSample")
        .def_readonly("angle_offset", &RegionSample::angle_offset)
        .def_readonly("v0", &RegionSample::v0)
        .def_readonly("converged", &RegionSample::converged)
        .def_readonly("final_distance", &RegionSample::final_distance)
        .def_readonly("time_to_converge", &RegionSample::time_to_converge)
        .def_readonly("final_state", &RegionSample::final_state);

    py::class_<RegionEstimate>(mod, "RegionEstimate")
        .def_readonly("samples", &RegionEstimate::samples)
        .def_readonly("epsilon_star", &RegionEstimate::epsilon_star)
        .def_readonly("grid_spec", &RegionEstimate::grid_spec);

    py::class_<RegionSweepOptions>(mod, "RegionSweepOptions")
        .def(py::init<>())
        .def_readwrite("offset_min", &RegionSweepOptions::offset_min)
        .def_readwrite("offset_max", &RegionSweepOptions::offset_max)
        .def_readwrite("points_per_axis", &RegionSweepOptions::points_per_axis)
        .def_readwrite("horizon", &RegionSweepOptions::horizon)
        .def_readwrite("dt", &RegionSweepOptions::dt)
        .def_readwrite("tol", &RegionSweepOptions::tol)
        .def_readwrite("record_dt", &RegionSweepOptions::record_dt);

    mod.def("estimate_region", &estimate_region, py::arg("model"), py::arg("eq"),
            py::arg("cert"), py::arg("options") = RegionSweepOptions{});

    // --- io ---
    mod.def("load_network", &load_network, py::arg("file"),
            py::arg("b_load_override") = std::numeric_limits<double>::quiet_NaN());
    mod.def("equilibrium_to_json", &equilibrium_to_json, py::arg("model"),
            py::arg("eq"));
    mod.def("certificate_to_json", &certificate_to_json, py::arg("cert"));
    mod.def("write_matrix_binary", &write_matrix_binary, py::arg("file"),
            py::arg("mat"));
    mod.def("read_matrix_binary", &read_matrix_binary, py::arg("file"));
    mod.def("write_trajectory_csv", &write_trajectory_csv, py::arg("file"),
            py::arg("traj"));
    mod.def("write_region_csv", &write_region_csv, py::arg("file"), py::arg("region"));
    mod.def("region_summary_json", &region_summary_json, py::arg("region"));
}
