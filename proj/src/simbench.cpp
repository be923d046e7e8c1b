#include "sise/simbench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <unordered_map>

#include "sise/bandwidth.hpp"
#include "sise/error.hpp"
#include "sise/inference.hpp"
#include "sise/runtime.hpp"

namespace sise::simbench {

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kInvalidConfig, field + ": " + why);
}

void require_positive(const std::string& field, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) bad_field(field, "must be a positive finite number");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double lognormal_cdf(const LogNormal& ln, double t) {
  if (t <= 0.0) return 0.0;
  if (t == kInf) return 1.0;
  return normal_cdf((std::log(t) - ln.mu) / ln.sigma);
}

// Grid points of a survival curve inside [frame.left, frame.right].
std::vector<std::size_t> evaluation_points(const npmle::SurvivalCurve& s, const core::TimeFrame& frame) {
  std::vector<std::size_t> ks;
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    const double t = s.tau(k);
    const double slack = 1e-9 * s.step;
    if (t >= frame.left - slack && t <= frame.right + slack) ks.push_back(k);
  }
  return ks;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<CensoredInterval> km_intervals(std::span<const npmle::KmObservation> obs) {
  std::vector<CensoredInterval> out;
  out.reserve(obs.size());
  for (const auto& o : obs) out.push_back(o.event ? CensoredInterval{o.time, o.time} : CensoredInterval{o.time, kInf});
  return out;
}

// Imputation with a midpoint fallback for brackets the fitted grid does not
// reach (possible out of sample, and for (0, R) with R at the frame edge).
struct Imputer {
  const npmle::GriddedDensity& g;
  int fallbacks = 0;

  double operator()(const CensoredInterval& iv) {
    try {
      return inference::impute_event_time(iv, g);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyInterval) throw;
      ++fallbacks;
      return 0.5 * (iv.left + iv.right);
    }
  }
};

struct Pairs {
  std::vector<double> imputed;
  std::vector<double> truth;
};

Pairs impute_all(std::span<const CensoredInterval> intervals, std::span<const double> truth, Imputer& imputer) {
  Pairs p;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (!intervals[i].is_interval_censored()) continue;
    p.imputed.push_back(imputer(intervals[i]));
    p.truth.push_back(truth[i]);
  }
  return p;
}

double coverage(const inference::ConfidenceBands& bands, const std::function<double(double)>& truth,
                const core::TimeFrame& evaluation) {
  std::size_t inside = 0;
  std::size_t total = 0;
  const double slack = 1e-9;
  for (std::size_t k = 0; k < bands.grid.size(); ++k) {
    const double t = bands.grid[k];
    if (t < evaluation.left - slack || t > evaluation.right + slack) continue;
    const double s = truth(t);
    if (s >= bands.lower[k] && s <= bands.upper[k]) ++inside;
    ++total;
  }
  return static_cast<double>(inside) / static_cast<double>(total);
}

struct ReplicateOutput {
  std::vector<MetricValue> values;
  int fallbacks = 0;
  int nonconverged = 0;
  int bootstrap_excluded = 0;
};

// Raw and smoothed fits evaluated against a truth curve and imputation
// targets; shared by the simulation and split-sample workflows.
void evaluate_pair(int replicate, const std::string& estimator, const bandwidth::SmoothedFit& fit,
                   const std::function<double(double)>& truth, const core::TimeFrame& evaluation, double p,
                   std::span<const CensoredInterval> in_sample, std::span<const double> in_truth,
                   std::span<const CensoredInterval> out_sample, std::span<const double> out_truth,
                   ReplicateOutput& out) {
  const std::pair<const char*, const npmle::GriddedDensity*> variants[] = {{"_raw", &fit.raw},
                                                                          {"_smooth", &fit.smoothed}};
  for (const auto& [suffix, density] : variants) {
    const std::string method = estimator + suffix;
    out.values.push_back({replicate, method, "rise", rise(npmle::grid_to_survival(*density), truth, evaluation, p)});
    Imputer imputer{*density};
    if (!in_sample.empty()) {
      const auto w = impute_all(in_sample, in_truth, imputer);
      if (!w.imputed.empty()) out.values.push_back({replicate, method, "rmse_w", rmse_imputation(w.imputed, w.truth)});
    }
    const auto o = impute_all(out_sample, out_truth, imputer);
    if (!o.imputed.empty()) out.values.push_back({replicate, method, "rmse_o", rmse_imputation(o.imputed, o.truth)});
    out.fallbacks += imputer.fallbacks;
  }
  out.values.push_back({replicate, estimator + "_smooth", "bandwidth", fit.smoothed_report.bandwidth});
  out.values.push_back({replicate, estimator + "_smooth", "turning_points",
                        static_cast<double>(fit.smoothed_report.turning_points)});
  out.values.push_back({replicate, estimator + "_raw", "turning_points",
                        static_cast<double>(fit.raw_report.turning_points)});
  if (!fit.estimate.converged) ++out.nonconverged;
}

void aggregate(ScenarioReport& report, const std::vector<std::string>& estimators) {
  std::map<std::pair<std::string, std::string>, std::map<int, double>> table;
  for (const auto& v : report.values) table[{v.method, v.metric}][v.replicate] = v.value;
  const auto average = [&](const std::string& method, const std::string& metric) -> std::optional<double> {
    const auto it = table.find({method, metric});
    if (it == table.end() || it->second.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& [r, value] : it->second) sum += value;
    return sum / static_cast<double>(it->second.size());
  };
  for (const auto& est : estimators) {
    for (const char* suffix : {"_raw", "_smooth"}) {
      const std::string method = est + suffix;
      MethodSummary s;
      s.method = method;
      s.arise = average(method, "rise");
      s.armse_w = average(method, "rmse_w");
      s.armse_o = average(method, "rmse_o");
      s.mean_coverage = average(method, "coverage");
      s.mean_coverage_analytic = average(method, "coverage_analytic");
      s.mean_bandwidth = average(method, "bandwidth");
      report.methods.push_back(s);
    }
    for (const auto& [metric, name] : {std::pair{"rise", "arise"}, {"rmse_w", "armse_w"}, {"rmse_o", "armse_o"}}) {
      const auto raw = table.find({est + "_raw", metric});
      const auto smooth = table.find({est + "_smooth", metric});
      if (raw == table.end() || smooth == table.end()) continue;
      PercentChange c;
      c.estimator = est;
      c.metric = name;
      std::vector<double> per_replicate;
      double raw_sum = 0.0;
      double smooth_sum = 0.0;
      for (const auto& [r, raw_value] : raw->second) {
        const auto s = smooth->second.find(r);
        if (s == smooth->second.end()) continue;
        raw_sum += raw_value;
        smooth_sum += s->second;
        if (s->second < raw_value) ++c.replicates_improved;
        if (raw_value > 0.0) per_replicate.push_back((s->second - raw_value) / raw_value);
      }
      if (per_replicate.empty() || !(raw_sum > 0.0)) continue;
      c.replicates = static_cast<int>(per_replicate.size());
      c.of_averages = (smooth_sum - raw_sum) / raw_sum;
      c.median = median(per_replicate);
      report.changes.push_back(c);
    }
  }
}

template <class Body>
std::vector<ReplicateOutput> run_replicates(int count, const RunOptions& options, Body body) {
  std::vector<ReplicateOutput> outputs(static_cast<std::size_t>(count));
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  parallel_for(outputs.size(), resolve_threads(options.threads), [&](std::size_t r) {
    try {
      outputs[r] = body(static_cast<int>(r));
    } catch (const Error& e) {
      throw Error(e.code(), "replicate " + std::to_string(r) + ": " + e.what());
    }
    const int finished = ++done;
    if (options.progress) {
      std::lock_guard lock(progress_mutex);
      options.progress(finished, count);
    }
  });
  return outputs;
}

void collect(ScenarioReport& report, std::vector<ReplicateOutput>& outputs) {
  for (auto& out : outputs) {
    report.values.insert(report.values.end(), out.values.begin(), out.values.end());
    report.out_of_frame_imputations += out.fallbacks;
    report.nonconverged_fits += out.nonconverged;
    report.bootstrap_excluded += out.bootstrap_excluded;
  }
}

}  // namespace

void validate(const ScenarioConfig& cfg) {
  if (cfg.n_individuals < 1) bad_field("n_individuals", "must be >= 1");
  require_positive("mean_onset", cfg.mean_onset);
  require_positive("onset_sd", cfg.onset_sd);
  if (!(cfg.prevalence >= 0.0 && cfg.prevalence <= 1.0)) bad_field("prevalence", "must lie in [0, 1]");
  if (cfg.n_obs < 2) bad_field("n_obs", "must be >= 2");
  require_positive("followup_length", cfg.followup_length);
  require_positive("baseline_mean", cfg.baseline_mean);
  require_positive("baseline_sd", cfg.baseline_sd);
  require_positive("gap_sd", cfg.gap_sd);
  require_positive("frame_right", cfg.frame_right);
  if (!(cfg.point_mass > 2.0 * cfg.frame_right)) bad_field("point_mass", "must exceed 2 * frame_right");
  if (cfg.mixture) {
    require_positive("mixture.mean_onset", cfg.mixture->mean_onset);
    if (!(cfg.mixture->weight >= 0.0 && cfg.mixture->weight <= 1.0)) bad_field("mixture.weight", "must lie in [0, 1]");
  }
  if (cfg.replicates < 1) bad_field("replicates", "must be >= 1");
  require_positive("delta_t", cfg.delta_t);
  if (cfg.bootstrap_replicates < 0 || cfg.bootstrap_replicates == 1) {
    bad_field("bootstrap_replicates", "must be 0 (off) or >= 2");
  }
  if (cfg.global_budget < 1) bad_field("global_budget", "must be >= 1");
}

LogNormal lognormal_from_moments(double mean, double sd) {
  const double u2 = mean * mean;
  const double s2 = sd * sd;
  return {std::log(u2 / std::sqrt(u2 + s2)), std::sqrt(std::log1p(s2 / u2))};
}

double true_survival(const ScenarioConfig& cfg, double t) {
  double f = lognormal_cdf(lognormal_from_moments(cfg.mean_onset, cfg.onset_sd), t);
  if (cfg.mixture) {
    const double f2 = lognormal_cdf(lognormal_from_moments(cfg.mixture->mean_onset, cfg.onset_sd), t);
    f = (1.0 - cfg.mixture->weight) * f + cfg.mixture->weight * f2;
  }
  return 1.0 - cfg.prevalence * f;
}

SimulatedCohort simulate_cohort(const ScenarioConfig& cfg, std::uint64_t replicate_seed) {
  validate(cfg);
  std::mt19937_64 rng(replicate_seed);
  std::bernoulli_distribution is_case(cfg.prevalence);
  std::bernoulli_distribution second(cfg.mixture ? cfg.mixture->weight : 0.0);
  const LogNormal first_ln = lognormal_from_moments(cfg.mean_onset, cfg.onset_sd);
  const LogNormal second_ln = lognormal_from_moments(cfg.mixture ? cfg.mixture->mean_onset : 1.0, cfg.onset_sd);
  const double gap_mean = cfg.followup_length / (cfg.n_obs - 1);
  constexpr int kMaxRestarts = 1000;

  SimulatedCohort cohort;
  const auto n = static_cast<std::size_t>(cfg.n_individuals);
  const auto m = static_cast<std::size_t>(cfg.n_obs);
  cohort.true_onsets.reserve(n);
  cohort.records.reserve(n * m);
  std::vector<double> times(m);
  for (std::size_t i = 0; i < n; ++i) {
    double x = cfg.point_mass;
    if (is_case(rng)) {
      const LogNormal& ln = cfg.mixture && second(rng) ? second_ln : first_ln;
      std::normal_distribution<double> log_onset(ln.mu, ln.sigma);
      do {
        x = round2(std::exp(log_onset(rng)));
      } while (!(x > 0.0));
    }

    // Each draw is redrawn until it lands inside its bounds; a schedule that
    // cannot be completed below B^R is started again.
    for (int restart = 0;; ++restart) {
      if (restart == kMaxRestarts) {
        throw Error(ErrorCode::kInvalidConfig, "observation schedule cannot fit below frame_right");
      }
      const auto t1 = truncated_normal(rng, cfg.baseline_mean, cfg.baseline_sd, 0.0, cfg.frame_right);
      if (!t1) {
        ++cohort.schedule_restarts;
        continue;
      }
      times[0] = *t1;
      bool complete = true;
      for (std::size_t j = 1; j < m && complete; ++j) {
        complete = false;
        for (int attempt = 0; attempt < 100; ++attempt) {
          const auto gap = truncated_normal(rng, gap_mean, cfg.gap_sd, 0.0, kInf);
          if (!gap) break;
          if (times[j - 1] + *gap < cfg.frame_right) {
            times[j] = times[j - 1] + *gap;
            complete = true;
            break;
          }
        }
      }
      if (complete) break;
      ++cohort.schedule_restarts;
    }

    const std::string id = std::to_string(i + 1);
    const auto first_record = cohort.records.size();
    for (double t : times) cohort.records.push_back({id, t, t >= x ? 1 : 0});
    cohort.intervals.push_back(core::summarize_observations(
        std::span(cohort.records).subspan(first_record, m), 0.0, kInf));
    cohort.true_onsets.push_back(x);
    cohort.m_counts.push_back(cfg.n_obs);
    cohort.last_observation.push_back(times.back());
  }
  cohort.frame = core::estimate_time_frame(cohort.records);
  return cohort;
}

core::TimeFrame SimulatedCohort::fit_frame(const ScenarioConfig& cfg) const {
  return core::make_time_frame(frame.left, std::max(frame.right, cfg.frame_right));
}

std::vector<npmle::KmObservation> km_observations(const SimulatedCohort& cohort) {
  std::vector<npmle::KmObservation> obs;
  obs.reserve(cohort.true_onsets.size());
  for (std::size_t i = 0; i < cohort.true_onsets.size(); ++i) {
    const double x = cohort.true_onsets[i];
    const double last = cohort.last_observation[i];
    obs.push_back(x <= last ? npmle::KmObservation{x, true} : npmle::KmObservation{last, false});
  }
  return obs;
}

double rise(const npmle::SurvivalCurve& estimated, const std::function<double(double)>& truth,
            const core::TimeFrame& evaluation, double p) {
  if (!(p > 0.0)) throw Error(ErrorCode::kZeroPrevalence, "RISE is undefined for p = 0");
  double sum = 0.0;
  std::size_t count = 0;
  for (const std::size_t k : evaluation_points(estimated, evaluation)) {
    const double d = estimated.values[k] - truth(estimated.tau(k));
    sum += d * d;
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::kEmptyData, "no grid points inside the evaluation frame");
  return std::sqrt(sum / static_cast<double>(count)) / p;
}

double rmse_imputation(std::span<const double> imputed, std::span<const double> truth) {
  if (imputed.size() != truth.size()) {
    throw Error(ErrorCode::kLengthMismatch, "imputed and true onsets differ in length");
  }
  if (imputed.empty()) throw Error(ErrorCode::kEmptyData, "no imputed values");
  double sum = 0.0;
  for (std::size_t k = 0; k < imputed.size(); ++k) {
    const double d = imputed[k] - truth[k];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(imputed.size()));
}

const MethodSummary& ScenarioReport::method(std::string_view name) const {
  for (const auto& m : methods) {
    if (m.method == name) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "no method '" + std::string(name) + "' in report");
}

const PercentChange& ScenarioReport::change(std::string_view estimator, std::string_view metric) const {
  for (const auto& c : changes) {
    if (c.estimator == estimator && c.metric == metric) return c;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "no change for " + std::string(estimator) + "/" + std::string(metric) + " in report");
}

ScenarioReport run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
  validate(cfg);
  const auto truth = [cfg](double t) { return true_survival(cfg, t); };
  auto outputs = run_replicates(cfg.replicates, options, [&](int r) {
    ReplicateOutput out;
    const auto rep = static_cast<std::uint64_t>(r);
    const auto est = simulate_cohort(cfg, derive_seed(cfg.seed, rep, 0));
    const auto oos = simulate_cohort(cfg, derive_seed(cfg.seed, rep, 1));

    bandwidth::FitOptions fit_options;
    fit_options.step = cfg.delta_t;
    fit_options.penalty = cfg.penalty;
    fit_options.optimizer.seed = derive_seed(cfg.seed, rep, 3);
    fit_options.optimizer.global_budget = cfg.global_budget;
    const auto frame = est.fit_frame(cfg);
    const auto tb = bandwidth::fit_turnbull(est.intervals, frame, est.m_counts, fit_options);
    evaluate_pair(r, "tb", tb, truth, est.frame, cfg.prevalence, est.intervals, est.true_onsets, oos.intervals,
                  oos.true_onsets, out);

    // The Kaplan-Meier estimate sees exact onsets, so only out-of-sample
    // imputation is meaningful for it.
    const auto km_obs = km_observations(est);
    const auto km_data = km_intervals(km_obs);
    auto km_options = fit_options;
    km_options.penalty = PenaltyKind::kEquivalentSampleSize;
    const auto km = bandwidth::smooth_step_estimate(km_data, npmle::km_fit(km_obs, frame), frame, est.m_counts,
                                                    km_options);
    evaluate_pair(r, "km", km, truth, est.frame, cfg.prevalence, {}, {}, oos.intervals, oos.true_onsets, out);

    if (cfg.bootstrap_replicates > 0) {
      inference::BootstrapOptions boot;
      boot.replicates = cfg.bootstrap_replicates;
      boot.seed = derive_seed(cfg.seed, rep, 2);
      const auto bands = inference::bootstrap_bands(
          est.intervals, inference::turnbull_pipeline(frame, fit_options, est.m_counts), tb.raw, boot);
      // Bands are scored against the survival of this replicate's own
      // simulated onsets; the analytic curve is kept alongside.
      auto onsets = est.true_onsets;
      std::sort(onsets.begin(), onsets.end());
      const auto realised = [&onsets](double t) {
        const auto above = onsets.end() - std::upper_bound(onsets.begin(), onsets.end(), t);
        return static_cast<double>(above) / static_cast<double>(onsets.size());
      };
      out.values.push_back({r, "tb_raw", "coverage", coverage(bands.raw, realised, est.frame)});
      out.values.push_back({r, "tb_smooth", "coverage", coverage(bands.smoothed, realised, est.frame)});
      out.values.push_back({r, "tb_raw", "coverage_analytic", coverage(bands.raw, truth, est.frame)});
      out.values.push_back({r, "tb_smooth", "coverage_analytic", coverage(bands.smoothed, truth, est.frame)});
      out.bootstrap_excluded += bands.excluded;
    }
    return out;
  });

  ScenarioReport report;
  report.config = cfg;
  collect(report, outputs);
  aggregate(report, {"tb", "km"});
  return report;
}

std::vector<ScenarioConfig> s1_grid(int replicates) {
  std::vector<ScenarioConfig> cells;
  for (int n : {50, 100, 1000, 5000}) {
    for (double u : {30.0, 50.0, 70.0}) {
      for (double p : {0.1, 0.5, 1.0}) {
        for (int m : {2, 4, 6}) {
          ScenarioConfig c;
          c.n_individuals = n;
          c.mean_onset = u;
          c.prevalence = p;
          c.n_obs = m;
          c.replicates = replicates;
          c.seed = 1;
          char name[64];
          std::snprintf(name, sizeof name, "s1-n%d-u%g-p%g-m%d", n, u, p, m);
          c.name = name;
          cells.push_back(c);
        }
      }
    }
  }
  return cells;
}

std::vector<ScenarioConfig> preset(std::string_view name) {
  if (name == "s1-full") return s1_grid(100);
  if (name == "s1-desk") {
    ScenarioConfig a;
    a.name = "s1-n100-u50-p1-m6";
    a.n_individuals = 100;
    a.mean_onset = 50.0;
    a.prevalence = 1.0;
    a.n_obs = 6;
    a.replicates = 30;
    a.seed = 1;
    ScenarioConfig b = a;
    b.name = "s1-n50-u30-p0.1-m2";
    b.n_individuals = 50;
    b.mean_onset = 30.0;
    b.prevalence = 0.1;
    b.n_obs = 2;
    return {a, b};
  }
  if (name == "s2") {
    ScenarioConfig c;
    c.name = "s2";
    c.n_individuals = 500;
    c.mean_onset = 30.0;
    c.mixture = MixtureComponent{60.0, 0.5};
    c.prevalence = 0.75;
    c.n_obs = 2;
    c.replicates = 50;
    c.seed = 2;
    return {c};
  }
  if (name == "s3") {
    ScenarioConfig c;
    c.name = "s3";
    c.n_individuals = 100;
    c.mean_onset = 50.0;
    c.prevalence = 1.0;
    c.n_obs = 6;
    c.replicates = 20;
    c.bootstrap_replicates = 100;
    c.seed = 3;
    return {c};
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown preset '" + std::string(name) + "' (s1-desk, s1-full, s2, s3)");
}

ScenarioReport run_split(const SplitInput& input, const SplitConfig& cfg, const RunOptions& options) {
  if (cfg.splits < 1) throw Error(ErrorCode::kInvalidConfig, "splits: must be >= 1");
  const auto series = core::validate_records(input.records);
  if (series.size() < 4) throw Error(ErrorCode::kEmptyData, "split evaluation needs at least 4 individuals");
  std::unordered_map<std::string, double> onset_of;
  for (const auto& [id, onset] : input.onsets) {
    if (!(onset >= 0.0)) throw Error(ErrorCode::kNegativeTime, "onset of '" + id + "' must be >= 0");
    onset_of[id] = onset;
  }

  // Per-individual summaries; the reported onset is the imputation target.
  const std::size_t n = series.size();
  std::vector<CensoredInterval> intervals(n);
  std::vector<double> target(n, kInf);
  std::vector<int> m_counts(n);
  std::vector<npmle::KmObservation> km_obs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = series[i];
    intervals[i] = core::summarize_observations(s.records, 0.0, kInf);
    m_counts[i] = static_cast<int>(s.records.size());
    const double last = s.records.back().time;
    const auto it = onset_of.find(s.individual_id);
    if (it != onset_of.end()) target[i] = it->second;
    km_obs[i] = target[i] <= last ? npmle::KmObservation{target[i], true} : npmle::KmObservation{last, false};
  }
  const auto full_frame = core::estimate_time_frame(input.records);
  const auto reference = npmle::km_fit(km_obs, full_frame);
  const double p = 1.0 - reference.survival_at(full_frame.right);
  if (!(p > 0.0)) throw Error(ErrorCode::kZeroPrevalence, "no reported onsets inside the observed frame");
  const auto truth = [&reference](double t) { return reference.survival_at(t); };

  auto outputs = run_replicates(cfg.splits, options, [&](int r) {
    ReplicateOutput out;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r), 0));
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t half = n / 2;
    std::sort(order.begin(), order.begin() + static_cast<long>(half));
    std::sort(order.begin() + static_cast<long>(half), order.end());

    std::vector<core::ObservationRecord> records;
    std::vector<CensoredInterval> fit_data, holdout;
    std::vector<double> fit_target, holdout_target;
    std::vector<int> fit_m;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = order[k];
      // Only individuals with a reported onset can be scored by imputation.
      if (k < half) {
        records.insert(records.end(), series[i].records.begin(), series[i].records.end());
        fit_data.push_back(intervals[i]);
        fit_target.push_back(target[i]);
        fit_m.push_back(m_counts[i]);
      } else if (target[i] != kInf) {
        holdout.push_back(intervals[i]);
        holdout_target.push_back(target[i]);
      }
    }
    bandwidth::FitOptions fit_options;
    fit_options.step = cfg.delta_t;
    fit_options.penalty = cfg.penalty;
    fit_options.optimizer.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r), 3);
    fit_options.optimizer.global_budget = cfg.global_budget;
    const auto frame = core::estimate_time_frame(records);
    const auto tb = bandwidth::fit_turnbull(fit_data, frame, fit_m, fit_options);

    std::vector<CensoredInterval> scored;
    std::vector<double> scored_target;
    for (std::size_t k = 0; k < fit_data.size(); ++k) {
      if (fit_target[k] == kInf) continue;
      scored.push_back(fit_data[k]);
      scored_target.push_back(fit_target[k]);
    }
    evaluate_pair(r, "tb", tb, truth, frame, p, scored, scored_target, holdout, holdout_target, out);
    return out;
  });

  ScenarioReport report;
  report.config.name = "split";
  report.config.n_individuals = static_cast<int>(n);
  report.config.prevalence = p;
  report.config.replicates = cfg.splits;
  report.config.seed = cfg.seed;
  report.config.delta_t = cfg.delta_t;
  report.config.penalty = cfg.penalty;
  report.config.global_budget = cfg.global_budget;
  collect(report, outputs);
  aggregate(report, {"tb"});
  return report;
}

}  // namespace sise::simbench
