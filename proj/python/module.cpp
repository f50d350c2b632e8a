#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "statusloop/analytic.hpp"
#include "statusloop/simulator.hpp"

namespace py = pybind11;
using namespace statusloop;

namespace {

SystemParams make_params(double lambda_in, double mu, int c_threads, double r_bar,
                         double gamma, double beta) {
  SystemParams p{lambda_in, mu, c_threads, r_bar, gamma, beta};
  p.validate();
  return p;
}

}  // namespace

PYBIND11_MODULE(_statusloop, m) {
  m.doc() = "Closed-form success probability, bounds and the event simulator for a "
            "status-driven single-AP/single-server offloading loop";

  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError",
                                                PyExc_RuntimeError);

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init(&make_params), py::arg("lambda_in") = 40.0, py::arg("mu") = 30.0,
           py::arg("c_threads") = 2, py::arg("r_bar") = 20.0, py::arg("gamma") = 100.0,
           py::arg("beta") = 100.0)
      .def_readwrite("lambda_in", &SystemParams::lambda_in)
      .def_readwrite("mu", &SystemParams::mu)
      .def_readwrite("c_threads", &SystemParams::c_threads)
      .def_readwrite("r_bar", &SystemParams::r_bar)
      .def_readwrite("gamma", &SystemParams::gamma)
      .def_readwrite("beta", &SystemParams::beta)
      .def("update_period", &SystemParams::update_period)
      .def("__repr__", [](const SystemParams& p) {
        std::ostringstream s;
        s << "SystemParams(lambda_in=" << p.lambda_in << ", mu=" << p.mu
          << ", c_threads=" << p.c_threads << ", r_bar=" << p.r_bar
          << ", gamma=" << p.gamma << ", beta=" << p.beta << ")";
        return s.str();
      });

  py::class_<AnalyticReport>(m, "AnalyticReport")
      .def_readonly("lambda_star", &AnalyticReport::lambda_star)
      .def_readonly("rho", &AnalyticReport::rho)
      .def_readonly("blocking", &AnalyticReport::blocking)
      .def_readonly("p_idle", &AnalyticReport::p_idle)
      .def_readonly("p_one_idle", &AnalyticReport::p_one_idle)
      .def_readonly("hazard", &AnalyticReport::hazard)
      .def_readonly("g_staleness", &AnalyticReport::g_staleness)
      .def_readonly("g_uplink", &AnalyticReport::g_uplink)
      .def_readonly("g_downlink", &AnalyticReport::g_downlink)
      .def_readonly("p_succ_closed", &AnalyticReport::p_succ_closed)
      .def_readonly("p_succ_transform", &AnalyticReport::p_succ_transform)
      .def_readonly("upper", &AnalyticReport::upper)
      .def_readonly("lower", &AnalyticReport::lower)
      .def_readonly("mean_gap", &AnalyticReport::mean_gap)
      .def_readonly("second_moment_gap", &AnalyticReport::second_moment_gap)
      .def_readonly("mean_age", &AnalyticReport::mean_age)
      .def_readonly("mean_aoi", &AnalyticReport::mean_aoi)
      .def_readonly("transform_valid", &AnalyticReport::transform_valid)
      .def_readonly("safety_frame_ok", &AnalyticReport::safety_frame_ok);

  py::class_<SimStats>(m, "SimStats")
      .def_readonly("n_arr", &SimStats::n_arr)
      .def_readonly("n_fwd", &SimStats::n_fwd)
      .def_readonly("n_succ", &SimStats::n_succ)
      .def_readonly("n_drop_ap", &SimStats::n_drop_ap)
      .def_readonly("n_block_server", &SimStats::n_block_server)
      .def_readonly("hazard_events", &SimStats::hazard_events)
      .def_readonly("elapsed", &SimStats::elapsed)
      .def("empirical_p_succ", &SimStats::empirical_p_succ)
      .def("empirical_lambda", &SimStats::empirical_lambda)
      .def("empirical_hazard", &SimStats::empirical_hazard)
      .def(py::self == py::self);

  m.def("erlang_b", &erlang_b, py::arg("rho"), py::arg("c"));
  m.def("p_idle", &p_idle, py::arg("rho"), py::arg("c"));
  m.def("stationary_one_idle", &stationary_one_idle, py::arg("rho"), py::arg("c"));
  m.def(
      "solve_forwarding_rate",
      [](const SystemParams& p, double tolerance, int max_iter) {
        return solve_forwarding_rate(p, {tolerance, max_iter});
      },
      py::arg("params"), py::arg("tolerance") = 1e-12, py::arg("max_iter") = 500);
  m.def("p_succ_closed", &p_succ_closed, py::arg("params"));
  m.def("hazard_rate", &hazard_rate, py::arg("params"));
  m.def("survival_fixed_window", &survival_fixed_window, py::arg("hazard"),
        py::arg("window"));
  m.def("lst_inter_update_gap", &lst_inter_update_gap, py::arg("s"), py::arg("params"));
  m.def(
      "transform_factors",
      [](double hazard, const SystemParams& p) {
        const TransformFactors g = transform_factors(hazard, p);
        return py::make_tuple(g.staleness, g.uplink, g.downlink);
      },
      py::arg("hazard"), py::arg("params"));
  m.def("p_succ_transform", &p_succ_transform, py::arg("params"));
  m.def(
      "gap_moments",
      [](const SystemParams& p) {
        const GapMoments g = gap_moments(p);
        return py::make_tuple(g.mean_gap, g.second_moment_gap, g.mean_age, g.mean_aoi);
      },
      py::arg("params"));
  m.def("upper_bound", &upper_bound, py::arg("params"));
  m.def("lower_bound", &lower_bound, py::arg("params"));
  m.def("analyze", [](const SystemParams& p) { return analyze(p); }, py::arg("params"));

  m.def(
      "run_simulation",
      [](const SystemParams& params, double horizon, std::uint64_t seed, bool drain,
         bool always_forward, bool deterministic_service) {
        SimConfig cfg;
        cfg.params = params;
        cfg.horizon = horizon;
        cfg.seed = seed;
        cfg.drain = drain;
        cfg.always_forward = always_forward;
        cfg.deterministic_service = deterministic_service;
        return run_simulation(cfg);
      },
      py::arg("params"), py::arg("horizon") = 5000.0, py::arg("seed") = 1,
      py::arg("drain") = true, py::arg("always_forward") = false,
      py::arg("deterministic_service") = false);
  m.def(
      "measure_interval_stats",
      [](const SystemParams& params, double horizon, std::uint64_t seed) {
        SimConfig cfg;
        cfg.params = params;
        cfg.horizon = horizon;
        cfg.seed = seed;
        const IntervalStats s = measure_interval_stats(cfg);
        return py::make_tuple(s.mean_gap, s.second_moment_gap, s.count);
      },
      py::arg("params"), py::arg("horizon") = 5000.0, py::arg("seed") = 1);
}
