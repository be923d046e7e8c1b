#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sise/bandwidth.hpp"
#include "sise/error.hpp"
#include "sise/inference.hpp"
#include "sise/io.hpp"
#include "sise/npmle.hpp"
#include "sise/simbench.hpp"
#include "sise/smoothing.hpp"
#include "sise/version.hpp"

namespace py = pybind11;
using namespace sise;
using core::CensoredInterval;

namespace {

// (left, right) pairs from Python; right may be float("inf").
std::vector<CensoredInterval> to_intervals(const std::vector<std::pair<double, double>>& rows) {
  std::vector<CensoredInterval> out;
  out.reserve(rows.size());
  for (const auto& [l, r] : rows) out.push_back({l, r});
  return out;
}

// JSON travels as text so Python gets plain dicts via json.loads.
py::object as_python(const io::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

simbench::ScenarioConfig config_from(const py::dict& config) {
  const auto text = py::module_::import("json").attr("dumps")(config).cast<std::string>();
  return io::scenario_from_json(io::json::parse(text));
}

core::TimeFrame frame_for(const std::vector<CensoredInterval>& data, std::optional<std::pair<double, double>> frame) {
  if (frame) return core::make_time_frame(frame->first, frame->second);
  return core::frame_from_intervals(data);
}

}  // namespace

PYBIND11_MODULE(_sise, m) {
  m.doc() = "Penalised smoothing of NPMLE survival estimates for censored data.";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "SiseError", PyExc_ValueError);

  py::class_<npmle::GriddedDensity>(m, "GriddedDensity")
      .def(py::init<>())
      .def_readwrite("grid_start", &npmle::GriddedDensity::grid_start)
      .def_readwrite("step", &npmle::GriddedDensity::step)
      .def_readwrite("values", &npmle::GriddedDensity::values)
      .def_readwrite("bandwidth", &npmle::GriddedDensity::bandwidth)
      .def_readwrite("total_mass", &npmle::GriddedDensity::total_mass)
      .def("survival", [](const npmle::GriddedDensity& g) { return npmle::grid_to_survival(g).values; },
           "Survival at the n + 1 bin edges.");

  py::class_<smoothing::FitReport>(m, "FitReport")
      .def_readonly("bandwidth", &smoothing::FitReport::bandwidth)
      .def_readonly("log_likelihood", &smoothing::FitReport::log_likelihood)
      .def_readonly("turning_points", &smoothing::FitReport::turning_points)
      .def_readonly("penalty_weight", &smoothing::FitReport::penalty_weight)
      .def_readonly("bic_s", &smoothing::FitReport::bic_s)
      .def_readonly("n_e", &smoothing::FitReport::n_e);

  py::class_<bandwidth::SmoothedFit>(m, "SmoothedFit")
      .def_readonly("raw", &bandwidth::SmoothedFit::raw)
      .def_readonly("smoothed", &bandwidth::SmoothedFit::smoothed)
      .def_readonly("raw_report", &bandwidth::SmoothedFit::raw_report)
      .def_readonly("smoothed_report", &bandwidth::SmoothedFit::smoothed_report)
      .def_property_readonly("support",
                             [](const bandwidth::SmoothedFit& f) {
                               std::vector<std::pair<double, double>> s;
                               for (const auto& e : f.estimate.support) s.emplace_back(e.left, e.right);
                               return s;
                             })
      .def_property_readonly("masses", [](const bandwidth::SmoothedFit& f) { return f.estimate.masses; })
      .def_property_readonly("converged", [](const bandwidth::SmoothedFit& f) { return f.estimate.converged; })
      .def("to_dict", [](const bandwidth::SmoothedFit& f) { return as_python(io::fit_report_json(f)); });

  m.def(
      "turnbull",
      [](const std::vector<std::pair<double, double>>& rows, std::optional<std::pair<double, double>> frame,
         double tol, int max_iter) {
        const auto data = to_intervals(rows);
        npmle::TurnbullOptions opt;
        opt.tol = tol;
        opt.max_iter = max_iter;
        const auto est = npmle::turnbull_fit(data, frame_for(data, frame), opt);
        std::vector<std::pair<double, double>> support;
        for (const auto& e : est.support) support.emplace_back(e.left, e.right);
        return py::dict(py::arg("support") = support, py::arg("masses") = est.masses,
                        py::arg("converged") = est.converged, py::arg("iterations") = est.iterations,
                        py::arg("residual") = est.residual);
      },
      py::arg("intervals"), py::arg("frame") = py::none(), py::arg("tol") = 1e-8, py::arg("max_iter") = 20000,
      "Raw Turnbull NPMLE of (left, right) intervals.");

  m.def(
      "kaplan_meier",
      [](const std::vector<std::pair<double, bool>>& rows) {
        std::vector<npmle::KmObservation> obs;
        for (const auto& [t, e] : rows) obs.push_back({t, e});
        const auto est = npmle::km_fit(obs);
        std::vector<double> times;
        std::vector<double> survival;
        for (const auto& s : est.support) {
          if (!s.is_point()) continue;
          times.push_back(s.left);
          survival.push_back(est.survival_at(s.left));
        }
        return py::dict(py::arg("times") = times, py::arg("survival") = survival,
                        py::arg("all_censored") = est.all_censored);
      },
      py::arg("observations"), "Product-limit survival at the event times of (time, event) pairs.");

  m.def(
      "fit",
      [](const std::vector<std::pair<double, double>>& rows, std::optional<std::pair<double, double>> frame,
         const std::string& penalty, double delta_t, std::optional<double> max_bandwidth, std::uint64_t seed,
         std::optional<std::vector<int>> m_counts) {
        const auto data = to_intervals(rows);
        bandwidth::FitOptions opt;
        opt.step = delta_t;
        opt.penalty = smoothing::parse_penalty(penalty);
        opt.optimizer.upper = max_bandwidth;
        opt.optimizer.seed = seed;
        const std::vector<int> counts = m_counts.value_or(std::vector<int>{});
        py::gil_scoped_release release;
        return bandwidth::fit_turnbull(data, frame_for(data, frame), counts, opt);
      },
      py::arg("intervals"), py::arg("frame") = py::none(), py::arg("penalty") = "ne", py::arg("delta_t") = 0.01,
      py::arg("max_bandwidth") = py::none(), py::arg("seed") = 0, py::arg("m_counts") = py::none(),
      "Raw Turnbull fit plus the BIC_s-optimal Nadaraya-Watson smoothing.");

  m.def("nw_smooth", &smoothing::nw_smooth, py::arg("density"), py::arg("bandwidth"));
  m.def(
      "count_turning_points",
      [](const std::vector<double>& values, double suppression) {
        return smoothing::count_turning_points(values, suppression);
      },
      py::arg("values"), py::arg("suppression") = 0.01);

  m.def(
      "impute",
      [](const npmle::GriddedDensity& g, double left, double right) {
        return inference::impute_event_time({left, right}, g);
      },
      py::arg("density"), py::arg("left"), py::arg("right"), "Conditional mean event time inside (left, right).");

  m.def(
      "bootstrap",
      [](const std::vector<std::pair<double, double>>& rows, std::optional<std::pair<double, double>> frame,
         int replicates, std::uint64_t seed, const std::string& penalty, double delta_t, int threads) {
        const auto data = to_intervals(rows);
        const auto f = frame_for(data, frame);
        bandwidth::FitOptions opt;
        opt.step = delta_t;
        opt.penalty = smoothing::parse_penalty(penalty);
        opt.optimizer.seed = seed;
        inference::BootstrapOptions bo;
        bo.replicates = replicates;
        bo.seed = seed;
        bo.threads = threads;
        inference::BootstrapResult result;
        {
          py::gil_scoped_release release;
          const auto point = bandwidth::fit_turnbull(data, f, {}, opt);
          result = inference::bootstrap_bands(data, inference::turnbull_pipeline(f, opt), point.raw, bo);
        }
        return py::dict(py::arg("tau") = result.raw.grid, py::arg("raw_lo") = result.raw.lower,
                        py::arg("raw_hi") = result.raw.upper, py::arg("smooth_lo") = result.smoothed.lower,
                        py::arg("smooth_hi") = result.smoothed.upper, py::arg("replicates") = result.requested,
                        py::arg("excluded") = result.excluded);
      },
      py::arg("intervals"), py::arg("frame") = py::none(), py::arg("replicates") = 200, py::arg("seed") = 0,
      py::arg("penalty") = "ne", py::arg("delta_t") = 0.01, py::arg("threads") = 1,
      "Pointwise 2.5%/97.5% bootstrap bands for the raw and smoothed survival.");

  m.def(
      "simulate_cohort",
      [](const py::dict& config, std::uint64_t seed) {
        const auto cfg = config_from(config);
        const auto cohort = simbench::simulate_cohort(cfg, seed);
        std::vector<std::pair<double, double>> intervals;
        for (const auto& iv : cohort.intervals) intervals.emplace_back(iv.left, iv.right);
        return py::dict(py::arg("onsets") = cohort.true_onsets, py::arg("intervals") = intervals,
                        py::arg("m_counts") = cohort.m_counts,
                        py::arg("frame") = std::make_pair(cohort.frame.left, cohort.frame.right));
      },
      py::arg("config"), py::arg("seed") = 0, "One simulated cohort; `config` uses the ScenarioConfig JSON fields.");

  m.def(
      "run_scenario",
      [](const py::dict& config, int threads) {
        const auto cfg = config_from(config);
        simbench::ScenarioReport report;
        {
          py::gil_scoped_release release;
          report = simbench::run_scenario(cfg, {threads, {}});
        }
        return as_python(io::to_json(report));
      },
      py::arg("config"), py::arg("threads") = 1, "ScenarioReport as a dict.");

  m.def(
      "preset",
      [](const std::string& name) {
        py::list out;
        for (const auto& cfg : simbench::preset(name)) out.append(as_python(io::to_json(cfg)));
        return out;
      },
      py::arg("name"), "Built-in scenario configurations (s1-desk, s1-full, s2, s3).");
}
