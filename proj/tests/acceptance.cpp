// Acceptance checks. Prints one PASS/FAIL line per criterion; `--only N` runs a
// single one. Exit status is non-zero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sise/bandwidth.hpp"
#include "sise/inference.hpp"
#include "sise/io.hpp"
#include "sise/npmle.hpp"
#include "sise/runtime.hpp"
#include "sise/simbench.hpp"
#include "sise/smoothing.hpp"

using namespace sise;
using core::CensoredInterval;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

simbench::ScenarioConfig figure1_config() {
  simbench::ScenarioConfig c;
  c.name = "figure1";
  c.n_individuals = 100;
  c.mean_onset = 50;
  c.prevalence = 1.0;
  c.n_obs = 6;
  return c;
}

// Exact and right-censored data from a log-normal onset and uniform censoring.
std::vector<npmle::KmObservation> random_km_data(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(5, 200);
  std::lognormal_distribution<double> onset(std::log(50.0), 0.25);
  std::uniform_real_distribution<double> censor(20.0, 90.0);
  const int n = size(rng);
  std::vector<npmle::KmObservation> obs;
  for (int i = 0; i < n; ++i) {
    const double x = std::round(onset(rng) * 10.0) / 10.0;  // ties on purpose
    const double c = std::round(censor(rng) * 10.0) / 10.0;
    obs.push_back(x <= c ? npmle::KmObservation{x, true} : npmle::KmObservation{c, false});
  }
  return obs;
}

std::vector<CensoredInterval> random_interval_data(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(10, 200);
  std::normal_distribution<double> onset(50.0, 10.0);
  std::uniform_real_distribution<double> visit(25.0, 75.0);
  std::uniform_real_distribution<double> gap(1.0, 15.0);
  const int n = size(rng);
  std::vector<CensoredInterval> data;
  for (int i = 0; i < n; ++i) {
    const double x = onset(rng);
    double t = visit(rng);
    double left = 0.0;
    double right = kInf;
    for (int j = 0; j < 4; ++j, t += gap(rng)) {
      if (t < x) {
        left = t;
      } else {
        right = t;
        break;
      }
    }
    data.push_back({left, right});
  }
  return data;
}

Outcome criterion1() {
  const std::vector<CensoredInterval> data{{38, 60}, {41, 48}, {62, kInf}, {0, 36}};
  const auto t0 = Clock::now();
  const auto est = npmle::turnbull_fit(data, core::TimeFrame{0.0, 100.0});
  const double secs = seconds_since(t0);
  const std::vector<npmle::SupportInterval> want_support{{0, 36}, {41, 48}, {62, kInf}};
  const std::vector<double> want{0.25, 0.5, 0.25};
  bool ok = est.support == want_support && est.converged;
  double err = 0.0;
  for (std::size_t k = 0; ok && k < want.size(); ++k) err = std::max(err, std::abs(est.masses[k] - want[k]));
  ok = ok && err <= 1e-8 && est.residual < 1e-8 && secs < 0.1;
  return {ok, fmt("max |mass error| %.2e, residual %.2e, %.4f s", err, est.residual, secs)};
}

Outcome criterion2() {
  std::mt19937_64 rng(20240501);
  double worst = 0.0;
  int checked = 0;
  bool converged = true;
  for (int d = 0; d < 50; ++d) {
    const auto obs = random_km_data(rng);
    std::vector<CensoredInterval> data;
    for (const auto& o : obs) data.push_back(o.event ? CensoredInterval{o.time, o.time} : CensoredInterval{o.time, kInf});
    const auto km = npmle::km_fit(obs);
    // Solver tolerance well below the comparison tolerance.
    npmle::TurnbullOptions opt;
    opt.tol = 1e-12;
    const auto tb = npmle::turnbull_fit(data, std::nullopt, opt);
    converged = converged && tb.converged;
    for (const auto& o : obs) {
      if (!o.event) continue;
      worst = std::max(worst, std::abs(km.survival_at(o.time) - tb.survival_at(o.time)));
      ++checked;
    }
  }
  return {worst <= 1e-10 && converged,
          fmt("50 datasets, %d event times, max |S_TB - S_KM| %.2e, EM tol 1e-12", checked, worst)};
}

Outcome criterion3() {
  std::mt19937_64 rng(77);
  npmle::TurnbullOptions opt;
  opt.record_trace = true;
  opt.accelerate = false;
  double worst = 0.0;
  std::size_t steps = 0;
  for (int d = 0; d < 50; ++d) {
    const auto data = random_interval_data(rng);
    const auto est = npmle::turnbull_fit(data, std::nullopt, opt);
    const auto& ll = est.log_likelihood_trace;
    for (std::size_t i = 1; i < ll.size(); ++i) worst = std::max(worst, ll[i - 1] - ll[i]);
    steps += ll.size();
  }
  return {worst <= 1e-12, fmt("50 datasets, %zu EM iterations, largest ln L decrease %.2e", steps, std::max(worst, 0.0))};
}

Outcome criterion4() {
  const auto cfg = figure1_config();
  const auto cohort = simbench::simulate_cohort(cfg, derive_seed(4, 0, 0));
  const auto frame = cohort.fit_frame(cfg);
  const auto est = npmle::turnbull_fit(cohort.intervals, frame);
  const auto raw = npmle::step_to_grid(est, frame, cfg.delta_t).density;
  const auto survival = npmle::grid_to_survival(raw);
  const auto penalty = smoothing::resolve_penalty(smoothing::PenaltyKind::kEquivalentSampleSize, cohort.intervals,
                                                  cohort.m_counts, &survival);
  bandwidth::BandwidthObjective objective(cohort.intervals, raw, penalty);
  // Geometric grid from one grid step to the default upper bound.
  const double lo = cfg.delta_t;
  const double hi = raw.grid_end() * raw.step;
  std::vector<smoothing::FitReport> reports;
  for (int i = 0; i < 20; ++i) reports.push_back(objective.evaluate(lo * std::pow(hi / lo, i / 19.0)));
  int ll_ok = 0;
  int kt_ok = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    ll_ok += -2.0 * reports[i].log_likelihood >= -2.0 * reports[i - 1].log_likelihood;
    kt_ok += reports[i].turning_points <= reports[i - 1].turning_points;
  }
  const double pairs = 19.0;
  const bool ok = ll_ok / pairs >= 0.9 && kt_ok / pairs >= 0.9;
  return {ok, fmt("-2lnL non-decreasing %d/19, k_T non-increasing %d/19 (k_T %d -> %d)", ll_ok, kt_ok,
                  reports.front().turning_points, reports.back().turning_points)};
}

Outcome criterion5() {
  const auto cfg = figure1_config();
  double worst_gap = -kInf;
  double worst_base = -kInf;
  for (int d = 0; d < 10; ++d) {
    const auto cohort = simbench::simulate_cohort(cfg, derive_seed(5, d, 0));
    const auto frame = cohort.fit_frame(cfg);
    const auto est = npmle::turnbull_fit(cohort.intervals, frame);
    const auto raw = npmle::step_to_grid(est, frame, cfg.delta_t).density;
    const auto survival = npmle::grid_to_survival(raw);
    const auto penalty = smoothing::resolve_penalty(smoothing::PenaltyKind::kEquivalentSampleSize, cohort.intervals,
                                                    cohort.m_counts, &survival);
    bandwidth::OptimizerConfig oc;
    oc.seed = derive_seed(5, d, 3);
    const auto opt = bandwidth::optimize_bandwidth(cohort.intervals, raw, penalty, oc);

    // Exhaustive oracle on a fresh objective: 200 evenly spaced d in [0, upper].
    bandwidth::BandwidthObjective grid(cohort.intervals, raw, penalty);
    double grid_min = kInf;
    for (int i = 0; i < 200; ++i) grid_min = std::min(grid_min, grid.evaluate(opt.upper * i / 199.0).bic_s);
    worst_gap = std::max(worst_gap, opt.report.bic_s - grid_min);
    worst_base = std::max(worst_base, opt.report.bic_s - opt.baseline.bic_s);
  }
  const bool ok = worst_gap <= 1e-2 && worst_base <= 0.0;
  return {ok, fmt("10 datasets, max BIC_s(d*) - grid min %.4g, max BIC_s(d*) - BIC_s(0) %.4g", worst_gap, worst_base)};
}

Outcome criterion6() {
  auto cfg = simbench::preset("s1-desk").at(0);
  const auto t0 = Clock::now();
  const auto r = simbench::run_scenario(cfg, {static_cast<int>(resolve_threads()), {}});
  const double secs = seconds_since(t0);
  const double a = r.change("tb", "arise").median;
  const double w = r.change("tb", "armse_w").median;
  const double o = r.change("tb", "armse_o").median;
  const bool ok = cfg.replicates == 30 && a < -0.05 && w < 0.0 && o < 0.0 && secs < 600.0;
  return {ok, fmt("%s M=%d: median change ARISE %+.1f%%, ARMSE_w %+.1f%%, ARMSE_o %+.1f%%, %.0f s", cfg.name.c_str(),
                  cfg.replicates, 100 * a, 100 * w, 100 * o, secs)};
}

Outcome criterion7() {
  auto cfg = simbench::preset("s1-desk").at(1);
  const auto r = simbench::run_scenario(cfg, {static_cast<int>(resolve_threads()), {}});
  const double a = r.change("tb", "arise").median;
  const bool ok = cfg.replicates == 30 && cfg.n_individuals == 50 && a <= 0.05;
  return {ok, fmt("%s M=%d: median change ARISE %+.2f%% (limit +5%%)", cfg.name.c_str(), cfg.replicates, 100 * a)};
}

Outcome criterion8() {
  auto cfg = simbench::preset("s3").at(0);
  cfg.replicates = 20;
  cfg.bootstrap_replicates = 100;
  const auto t0 = Clock::now();
  const auto r = simbench::run_scenario(cfg, {static_cast<int>(resolve_threads()), {}});
  const double secs = seconds_since(t0);
  const auto& raw = r.method("tb_raw");
  const auto& smooth = r.method("tb_smooth");
  const double cr = raw.mean_coverage.value_or(0.0);
  const double cs = smooth.mean_coverage.value_or(0.0);
  const bool ok = cr >= 0.90 && cr <= 1.0 && cs >= 0.90 && cs <= 1.0 && secs < 900.0;
  return {ok, fmt("20 x B=100: mean coverage raw %.3f, smoothed %.3f (analytic curve: %.3f, %.3f), %.0f s", cr, cs,
                  raw.mean_coverage_analytic.value_or(0.0), smooth.mean_coverage_analytic.value_or(0.0), secs)};
}

Outcome criterion9() {
  auto cfg = figure1_config();
  cfg.n_individuals = 100000;
  const auto cohort = simbench::simulate_cohort(cfg, derive_seed(9, 0, 0));
  double sum = 0.0;
  for (double x : cohort.true_onsets) sum += x;
  const double n = static_cast<double>(cohort.true_onsets.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : cohort.true_onsets) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  std::size_t bracketed = 0;
  std::size_t violations = 0;
  for (std::size_t i = 0; i < cohort.intervals.size(); ++i) {
    const auto& iv = cohort.intervals[i];
    const double x = cohort.true_onsets[i];
    ++bracketed;
    if (!(iv.left < x && x < iv.right)) ++violations;
  }
  const bool ok = std::abs(mean - 50.0) <= 0.2 && std::abs(sd - 10.0) <= 0.3 && violations == 0;
  return {ok, fmt("mean %.3f, sd %.3f, %zu/%zu intervals bracket their onset", mean, sd, bracketed - violations,
                  bracketed)};
}

// Property suites.
Outcome criterion10() {
  std::vector<std::string> failures;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // NW nonnegativity and mass conservation.
  double worst_mass = 0.0;
  double most_negative = 0.0;
  for (int i = 0; i < 1000; ++i) {
    npmle::GriddedDensity g;
    g.step = 0.01 * (1 + static_cast<int>(unit(rng) * 10));
    g.grid_start = 100.0 * unit(rng);
    g.values.resize(3 + static_cast<std::size_t>(unit(rng) * 300));
    for (auto& v : g.values) v = unit(rng) < 0.3 ? 0.0 : std::pow(unit(rng), 3) * 50.0;
    g.values[static_cast<std::size_t>(unit(rng) * static_cast<double>(g.size()))] += 1.0;
    double sum = 0.0;
    for (double v : g.values) sum += v;
    g.total_mass = sum * g.step;
    const double d = unit(rng) < 0.1 ? 0.0 : std::pow(10.0, -3.0 + 4.0 * unit(rng));
    const auto s = smoothing::nw_smooth(g, d);
    double out = 0.0;
    for (double v : s.values) {
      out += v;
      most_negative = std::min(most_negative, v);
    }
    worst_mass = std::max(worst_mass, std::abs(out * s.step - g.total_mass) / g.total_mass);
  }
  if (most_negative < 0.0 || worst_mass > 1e-12) {
    failures.push_back(fmt("NW min value %.2e, mass error %.2e", most_negative, worst_mass));
  }

  // k_T is unchanged by positive rescaling.
  int kt_mismatch = 0;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(50 + static_cast<std::size_t>(unit(rng) * 200));
    double phase = 0.0;
    for (auto& x : v) x = 2.0 + std::sin(phase += 0.05 + 0.3 * unit(rng)) + 0.1 * unit(rng);
    const double scale = std::pow(10.0, -6.0 + 12.0 * unit(rng));
    auto w = v;
    for (auto& x : w) x *= scale;
    kt_mismatch += smoothing::count_turning_points(v) != smoothing::count_turning_points(w);
  }
  if (kt_mismatch > 0) failures.push_back(fmt("k_T changed under rescaling in %d cases", kt_mismatch));

  // Imputation stays inside (L, R) and shifts with the time axis.
  int outside = 0;
  double worst_shift = 0.0;
  for (int i = 0; i < 500; ++i) {
    npmle::GriddedDensity g;
    g.step = 0.01;
    g.values.resize(1000);
    for (auto& v : g.values) v = unit(rng) < 0.5 ? 0.0 : unit(rng);
    double sum = 0.0;
    for (double v : g.values) sum += v;
    g.total_mass = sum * g.step;
    const double a = 9.0 * unit(rng);
    const CensoredInterval iv{a, a + 0.05 + (9.9 - a) * unit(rng)};
    const double x = inference::impute_event_time(iv, g);
    outside += !(iv.left < x && x < iv.right);
    const double delta = 2.0 * static_cast<double>(static_cast<int>(unit(rng) * 40)) + 0.5;  // 2 dt multiples
    auto h = g;
    h.grid_start += delta;
    const double y = inference::impute_event_time({iv.left + delta, iv.right + delta}, h);
    worst_shift = std::max(worst_shift, std::abs((y - x) - delta));
  }
  if (outside > 0 || worst_shift > 1e-9) {
    failures.push_back(fmt("imputation outside (L,R) %d times, shift error %.2e", outside, worst_shift));
  }

  // RISE identities.
  {
    npmle::SurvivalCurve s;
    s.grid_start = 10.0;
    s.step = 0.01;
    for (int k = 0; k <= 2000; ++k) s.values.push_back(std::exp(-0.05 * k * 0.01));
    const auto truth = [](double t) { return std::exp(-0.05 * (t - 10.0)); };
    const core::TimeFrame frame{10.0, 30.0};
    auto shifted = s;
    for (auto& v : shifted.values) v += 0.1;
    const double r0 = simbench::rise(s, truth, frame, 1.0);
    const double r1 = simbench::rise(shifted, truth, frame, 1.0);
    const double r2 = simbench::rise(shifted, truth, frame, 0.5);
    if (r0 > 1e-12 || std::abs(r1 - 0.1) > 1e-9 || std::abs(r2 - 0.2) > 1e-9) {
      failures.push_back(fmt("RISE identities: %.3g, %.6f, %.6f", r0, r1, r2));
    }
  }

  // Seeded pipelines rerun byte for byte.
  {
    auto cfg = figure1_config();
    cfg.replicates = 2;
    cfg.bootstrap_replicates = 4;
    const auto once = [&] {
      std::string bytes = io::to_json(simbench::run_scenario(cfg)).dump();
      const auto cohort = simbench::simulate_cohort(cfg, 99);
      bandwidth::FitOptions fo;
      fo.optimizer.seed = 5;
      const auto frame = cohort.fit_frame(cfg);
      const auto fit = bandwidth::fit_turnbull(cohort.intervals, frame, cohort.m_counts, fo);
      bytes += io::fit_report_json(fit).dump() + io::curve_csv(fit.smoothed);
      inference::BootstrapOptions bo;
      bo.replicates = 5;
      bo.seed = 7;
      bo.threads = 2;
      const auto bands = inference::bootstrap_bands(
          cohort.intervals, inference::turnbull_pipeline(frame, fo, cohort.m_counts), fit.raw, bo);
      return bytes + io::bands_csv(bands);
    };
    if (once() != once()) failures.push_back("seeded pipelines are not byte-identical across runs");
  }

  std::string detail = "NW 1000 cases, k_T scaling 200, imputation 500, RISE identities, determinism";
  for (const auto& f : failures) detail += "; FAILED " + f;
  return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Turnbull correctness on the four-interval example", criterion1},
      {"Kaplan-Meier / Turnbull equivalence", criterion2},
      {"EM monotonicity", criterion3},
      {"likelihood and turning points along the bandwidth path", criterion4},
      {"optimizer versus 200-point grid", criterion5},
      {"desk-scale S1 cell N=100 u=50 p=1 m=6", criterion6},
      {"S1 cell N=50 u=30 p=0.1 m=2", criterion7},
      {"S3 bootstrap coverage", criterion8},
      {"simulation moments and brackets", criterion9},
      {"property suites", criterion10},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--only" && i + 1 < argc) only.insert(std::atoi(argv[++i]));
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && only.count(id) == 0) continue;
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failed += !out.pass;
    std::printf("[%s] %2d %s: %s\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), out.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
