#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relaydiff/experiments.hpp"
#include "relaydiff/fronts.hpp"
#include "relaydiff/kernels.hpp"
#include "relaydiff/solver.hpp"

namespace py = pybind11;
using namespace relaydiff;

PYBIND11_MODULE(_relaydiff, m) {
    m.doc() = "reaction-diffusion with distributed relay hysteresis";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
    py::register_exception<IntegrationError>(m, "IntegrationError", PyExc_RuntimeError);

    py::class_<ThresholdDomain>(m, "ThresholdDomain")
        .def(py::init<double, double>(), py::arg("lo"), py::arg("hi"))
        .def_readonly("lo", &ThresholdDomain::lo)
        .def_readonly("hi", &ThresholdDomain::hi)
        .def_property_readonly("length", &ThresholdDomain::length);

    py::class_<hysteresis::SimpleConfig>(m, "SimpleConfig")
        .def(py::init<double, double, std::vector<double>, int>(), py::arg("lo"),
             py::arg("hi"), py::arg("fronts"), py::arg("upper_sign"))
        .def_static("uniform", &hysteresis::SimpleConfig::uniform)
        .def_readonly("lo", &hysteresis::SimpleConfig::lo)
        .def_readonly("hi", &hysteresis::SimpleConfig::hi)
        .def_readonly("fronts", &hysteresis::SimpleConfig::fronts)
        .def_readonly("upper_sign", &hysteresis::SimpleConfig::upper_sign)
        .def("sign_at", &hysteresis::SimpleConfig::sign_at)
        .def("sign_changes_in", &hysteresis::SimpleConfig::sign_changes_in)
        .def("to_json", &hysteresis::SimpleConfig::to_json)
        .def_static("from_json", &hysteresis::SimpleConfig::from_json);

    m.def(
        "config_update",
        [](const hysteresis::SimpleConfig& cfg, double w_from, double w_to) {
            return hysteresis::config_update(cfg, {w_from, w_to}).first;
        },
        py::arg("cfg"), py::arg("w_from"), py::arg("w_to"));
    m.def(
        "brute_force_relay",
        [](double x, const std::vector<double>& w, int r0) {
            return hysteresis::brute_force_relay(x, w, r0);
        },
        py::arg("x"), py::arg("w_samples"), py::arg("r0"));
    m.def("preisach", &hysteresis::preisach, py::arg("u_cum"), py::arg("cfg"));

    m.def("psi", &kernels::psi, py::arg("x"), py::arg("tau"), py::arg("domain"));
    m.def("erf_E", &kernels::erf_E, py::arg("y"));
    m.def("Psi_tail", &kernels::Psi_tail, py::arg("x"), py::arg("tau"), py::arg("domain"));
    m.def(
        "phi",
        [](double x, double tau, const ThresholdDomain& d) {
            return kernels::phi(x, tau, d);
        },
        py::arg("x"), py::arg("tau"), py::arg("domain"));
    m.def(
        "Phi_tail",
        [](double x, double tau, const ThresholdDomain& d) {
            return kernels::Phi_tail(x, tau, d);
        },
        py::arg("x"), py::arg("tau"), py::arg("domain"));

    py::class_<solver::ModelParams>(m, "ModelParams")
        .def(py::init([](const ThresholdDomain& dom, double D) {
                 return solver::ModelParams{dom, D};
             }),
             py::arg("domain"), py::arg("D"))
        .def_readwrite("D", &solver::ModelParams::D)
        .def_readwrite("grid_n", &solver::ModelParams::grid_n)
        .def_readwrite("grid_grading", &solver::ModelParams::grid_grading)
        .def_readwrite("dt_init", &solver::ModelParams::dt_init)
        .def_readwrite("dt_max", &solver::ModelParams::dt_max)
        .def_readwrite("dw_max", &solver::ModelParams::dw_max)
        .def_readwrite("tol_event", &solver::ModelParams::tol_event)
        .def("mu", &solver::ModelParams::mu);

    py::enum_<solver::U0Kind>(m, "U0Kind")
        .value("Uniform", solver::U0Kind::Uniform)
        .value("Bump", solver::U0Kind::Bump)
        .value("Custom", solver::U0Kind::Custom);

    py::class_<solver::InitialData>(m, "InitialData")
        .def(py::init([](solver::U0Kind kind, double eps, double v0, double w0,
                         const hysteresis::SimpleConfig& r0) {
                 solver::InitialData d;
                 d.u0_kind = kind;
                 d.eps = eps;
                 d.v0 = v0;
                 d.w0 = w0;
                 d.r0 = r0;
                 return d;
             }),
             py::arg("u0_kind"), py::arg("eps"), py::arg("v0"), py::arg("w0"),
             py::arg("r0"))
        .def_readwrite("eps", &solver::InitialData::eps)
        .def_readwrite("v0", &solver::InitialData::v0)
        .def_readwrite("w0", &solver::InitialData::w0);

    py::enum_<solver::StopRule>(m, "StopRule")
        .value("FixedT", solver::StopRule::FixedT)
        .value("VMin", solver::StopRule::VMin)
        .value("Flat", solver::StopRule::Flat);

    py::class_<solver::RunControl>(m, "RunControl")
        .def(py::init<>())
        .def_readwrite("T", &solver::RunControl::T)
        .def_readwrite("stop", &solver::RunControl::stop)
        .def_readwrite("v_min", &solver::RunControl::v_min)
        .def_readwrite("cadence", &solver::RunControl::cadence)
        .def_readwrite("probes", &solver::RunControl::probes)
        .def_readwrite("snapshot_times", &solver::RunControl::snapshot_times);

    py::class_<solver::SeriesRecord>(m, "SeriesRecord")
        .def_readonly("t", &solver::SeriesRecord::t)
        .def_readonly("v", &solver::SeriesRecord::v)
        .def_readonly("w", &solver::SeriesRecord::w)
        .def_readonly("U_bar", &solver::SeriesRecord::U_bar)
        .def_readonly("leftmost_front", &solver::SeriesRecord::leftmost_front)
        .def_readonly("fronts", &solver::SeriesRecord::fronts)
        .def_readonly("upper_sign", &solver::SeriesRecord::upper_sign)
        .def_readonly("U_probes", &solver::SeriesRecord::U_probes);

    py::class_<solver::Event>(m, "Event")
        .def_readonly("kind", &solver::Event::kind)
        .def_readonly("t", &solver::Event::t)
        .def_readonly("position", &solver::Event::position)
        .def_readonly("u_ratio", &solver::Event::u_ratio);

    py::class_<solver::MonitorReport>(m, "MonitorReport")
        .def_readonly("max_v_envelope_excess", &solver::MonitorReport::max_v_envelope_excess)
        .def_readonly("max_mass_decrease", &solver::MonitorReport::max_mass_decrease)
        .def_readonly("max_abs_w_excess", &solver::MonitorReport::max_abs_w_excess)
        .def_readonly("min_u", &solver::MonitorReport::min_u)
        .def_readonly("max_conservation_drift",
                      &solver::MonitorReport::max_conservation_drift);

    py::class_<solver::TimeSeries>(m, "TimeSeries")
        .def_readonly("records", &solver::TimeSeries::records)
        .def_readonly("events", &solver::TimeSeries::events)
        .def_readonly("monitors", &solver::TimeSeries::monitors)
        .def_readonly("probe_x", &solver::TimeSeries::probe_x);

    m.def("run", &solver::run, py::arg("params"), py::arg("data"), py::arg("control"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<fronts::FrontTrack>(m, "FrontTrack")
        .def_readonly("id", &fronts::FrontTrack::id)
        .def_readonly("birth_time", &fronts::FrontTrack::birth_time)
        .def_readonly("trajectory", &fronts::FrontTrack::trajectory)
        .def_readonly("death", &fronts::FrontTrack::death)
        .def_readonly("immortal", &fronts::FrontTrack::immortal)
        .def("final_position", &fronts::FrontTrack::final_position);

    py::class_<fronts::SteadyFront>(m, "SteadyFront")
        .def_readonly("track_id", &fronts::SteadyFront::track_id)
        .def_readonly("t", &fronts::SteadyFront::t)
        .def_readonly("x", &fronts::SteadyFront::x)
        .def_readonly("determined", &fronts::SteadyFront::determined);

    m.def("track", &fronts::track);
    m.def("steady_fronts", &fronts::steady_fronts, py::arg("tracks"), py::arg("series"),
          py::arg("rel_tol"), py::arg("D"), py::arg("v_min"));
    m.def("certify_immortal", &fronts::certify_immortal, py::arg("tracks"),
          py::arg("series"), py::arg("x_cut"), py::arg("t_cut"), py::arg("tol"));

    py::class_<experiments::SequencePlan1>(m, "SequencePlan1")
        .def_readonly("N", &experiments::SequencePlan1::N)
        .def_readonly("tau", &experiments::SequencePlan1::tau)
        .def_readonly("chi", &experiments::SequencePlan1::chi)
        .def_readonly("x", &experiments::SequencePlan1::x);

    py::class_<experiments::SequencePlan2>(m, "SequencePlan2")
        .def_readonly("N", &experiments::SequencePlan2::N)
        .def_readonly("t", &experiments::SequencePlan2::t)
        .def_readonly("theta", &experiments::SequencePlan2::theta)
        .def_readonly("y", &experiments::SequencePlan2::y)
        .def_readonly("mu", &experiments::SequencePlan2::mu);

    m.def(
        "build_sequences_thm1",
        [](const ThresholdDomain& d, int N) {
            return experiments::build_sequences_thm1(d, N);
        },
        py::arg("domain"), py::arg("N"));
    m.def("verify_plan1", &experiments::verify_plan1, py::arg("plan"),
          py::arg("scan_points") = 1000);
    m.def("build_sequences_thm2", &experiments::build_sequences_thm2, py::arg("N"),
          py::arg("mu"), py::arg("margin") = 0.05);
    m.def("verify_plan2", &experiments::verify_plan2, py::arg("plan"),
          py::arg("scan_points") = 1000);

    py::class_<experiments::AsymptoticsRow>(m, "AsymptoticsRow")
        .def_readonly("D", &experiments::AsymptoticsRow::D)
        .def_readonly("n", &experiments::AsymptoticsRow::n)
        .def_readonly("t_n", &experiments::AsymptoticsRow::t_n)
        .def_readonly("q_n", &experiments::AsymptoticsRow::q_n)
        .def_readonly("y_hat", &experiments::AsymptoticsRow::y_hat)
        .def_readonly("determined", &experiments::AsymptoticsRow::determined);

    py::class_<experiments::AsymptoticsTable>(m, "AsymptoticsTable")
        .def_readonly("rows", &experiments::AsymptoticsTable::rows)
        .def("to_csv", &experiments::AsymptoticsTable::to_csv);

    m.def("asymptotics_experiment", &experiments::asymptotics_experiment,
          py::arg("D_list"), py::arg("domain"), py::arg("n_fronts"),
          py::arg("horizon") = 45.0, py::arg("grid_n") = 4000,
          py::call_guard<py::gil_scoped_release>());
}
