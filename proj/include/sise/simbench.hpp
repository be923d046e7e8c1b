#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sise/core.hpp"
#include "sise/npmle.hpp"
#include "sise/smoothing.hpp"

namespace sise::simbench {

using core::CensoredInterval;
using smoothing::PenaltyKind;

struct MixtureComponent {
  double mean_onset = 60.0;
  double weight = 0.5;  // probability of drawing from this component
};

struct ScenarioConfig {
  std::string name;
  int n_individuals = 100;
  double mean_onset = 50.0;
  double onset_sd = 10.0;
  double prevalence = 1.0;
  int n_obs = 6;
  double followup_length = 20.0;
  double baseline_mean = 40.0;
  double baseline_sd = 10.0;
  double gap_sd = 0.2;
  double frame_right = 100.0;
  double point_mass = 1000.0;
  std::optional<MixtureComponent> mixture;
  PenaltyKind penalty = PenaltyKind::kEquivalentSampleSize;
  int replicates = 30;
  std::uint64_t seed = 0;
  double delta_t = 0.01;
  int bootstrap_replicates = 0;  // > 0 adds band coverage per replicate
  int global_budget = 100;
};

/// Throws InvalidConfig naming the offending field.
void validate(const ScenarioConfig& cfg);

/// ln-scale parameters of a log-normal with the given mean and sd.
struct LogNormal {
  double mu = 0.0;
  double sigma = 1.0;
};
LogNormal lognormal_from_moments(double mean, double sd);

/// Unconditional truth S(t) = 1 - p F(t), F the (mixture) log-normal CDF.
double true_survival(const ScenarioConfig& cfg, double t);

struct SimulatedCohort {
  std::vector<double> true_onsets;  // rounded to 0.01; K for non-cases
  std::vector<core::ObservationRecord> records;
  std::vector<CensoredInterval> intervals;
  std::vector<int> m_counts;
  std::vector<double> last_observation;
  core::TimeFrame frame;  // (min T, max T)

  /// Frame the estimators are fitted on: (min T, B^R), B^R being known in
  /// simulation. Evaluation stays on `frame`.
  core::TimeFrame fit_frame(const ScenarioConfig& cfg) const;
  int schedule_restarts = 0;
};

SimulatedCohort simulate_cohort(const ScenarioConfig& cfg, std::uint64_t replicate_seed);

/// Normal(mean, sd) restricted to (lo, hi) by rejection; nullopt after
/// `max_tries` misses.
template <class Rng>
std::optional<double> truncated_normal(Rng& rng, double mean, double sd, double lo, double hi, int max_tries = 100);

/// Exact onset when it precedes the last visit, otherwise censored there.
std::vector<npmle::KmObservation> km_observations(const SimulatedCohort& cohort);

/// (1/p) sqrt(mean_k (S_hat(tau_k) - S(tau_k))^2) over the grid points tau_k
/// of the estimate that lie inside `evaluation` (no extrapolation).
double rise(const npmle::SurvivalCurve& estimated, const std::function<double(double)>& truth,
            const core::TimeFrame& evaluation, double p);

double rmse_imputation(std::span<const double> imputed, std::span<const double> truth);

/// Per-replicate value of one metric for one method.
struct MetricValue {
  int replicate = 0;
  std::string method;  // tb_raw, tb_smooth, km_raw, km_smooth
  std::string metric;  // rise, rmse_w, rmse_o, bandwidth, coverage, ...
  double value = 0.0;
};

struct MethodSummary {
  std::string method;
  std::optional<double> arise;
  std::optional<double> armse_w;
  std::optional<double> armse_o;
  std::optional<double> mean_coverage;           // truth: empirical survival of the simulated onsets
  std::optional<double> mean_coverage_analytic;  // truth: true_survival
  std::optional<double> mean_bandwidth;
};

/// Smoothed vs raw for one estimator.
struct PercentChange {
  std::string estimator;  // tb or km
  std::string metric;     // arise, armse_w, armse_o
  double of_averages = 0.0;                  // (A_smooth - A_raw) / A_raw
  double median = 0.0;                       // median over replicates
  int replicates_improved = 0;
  int replicates = 0;
};

struct ScenarioReport {
  ScenarioConfig config;
  std::vector<MetricValue> values;
  std::vector<MethodSummary> methods;
  std::vector<PercentChange> changes;
  int out_of_frame_imputations = 0;  // out-of-sample intervals imputed by their midpoint
  int nonconverged_fits = 0;
  int bootstrap_excluded = 0;

  const MethodSummary& method(std::string_view name) const;
  const PercentChange& change(std::string_view estimator, std::string_view metric) const;
};

struct RunOptions {
  int threads = 1;
  /// Called after each finished replicate with (done, total).
  std::function<void(int, int)> progress;
};

ScenarioReport run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});

/// Built-in configurations: "s1-desk", "s2", "s3", "s1-full" (all 108 cells).
std::vector<ScenarioConfig> preset(std::string_view name);
std::vector<ScenarioConfig> s1_grid(int replicates);

/// Repeated 50-50 splits of a real dataset with self-reported onsets: one
/// half fits raw and smoothed Turnbull, compared with the Kaplan-Meier curve
/// of the full sample (RISE) and by imputation in both halves.
struct SplitInput {
  std::vector<core::ObservationRecord> records;
  /// Reported onset per individual id; missing ids never had the event.
  std::vector<std::pair<std::string, double>> onsets;
};

struct SplitConfig {
  int splits = 100;
  std::uint64_t seed = 0;
  double delta_t = 0.01;
  PenaltyKind penalty = PenaltyKind::kEquivalentSampleSize;
  int global_budget = 100;
};

ScenarioReport run_split(const SplitInput& input, const SplitConfig& cfg, const RunOptions& options = {});

}  // namespace sise::simbench

#include "sise/detail/truncated_normal.ipp"
