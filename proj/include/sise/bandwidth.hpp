#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "sise/core.hpp"
#include "sise/npmle.hpp"
#include "sise/smoothing.hpp"

namespace sise::bandwidth {

using core::CensoredInterval;
using npmle::GriddedDensity;
using smoothing::FitReport;
using smoothing::PenaltyBase;
using smoothing::PenaltyKind;

struct OptimizerConfig {
  double lower = 0.0;
  /// Defaults to B^R * step, B^R read as the raw grid's right edge.
  std::optional<double> upper;
  int global_budget = 100;
  int global_population = 20;
  double local_tol = 1e-4;
  std::uint64_t seed = 0;
  int max_local_iter = 200;
};

/// Checks budgets and bounds; throws InvalidConfig.
void validate(const OptimizerConfig& cfg);

/// Memoised BIC_s(d) on a fixed raw density and a fixed penalty base:
/// nw_smooth -> count_turning_points -> interval_log_likelihood -> bic_s.
class BandwidthObjective {
 public:
  BandwidthObjective(std::span<const CensoredInterval> data, const GriddedDensity& raw, PenaltyBase penalty);

  /// BIC_s is +inf when some observation gets zero probability.
  const FitReport& evaluate(double bandwidth);
  GriddedDensity smooth(double bandwidth) const;

  std::size_t unique_evaluations() const noexcept { return memo_.size(); }
  const PenaltyBase& penalty() const noexcept { return penalty_; }
  /// Lowest BIC_s seen so far; ties go to the smaller bandwidth.
  const FitReport& best() const;

 private:
  std::span<const CensoredInterval> data_;
  const GriddedDensity& raw_;
  PenaltyBase penalty_;
  std::map<std::int64_t, FitReport> memo_;
};

struct OptimizationResult {
  double bandwidth = 0.0;
  FitReport report;
  FitReport baseline;  // d = 0
  GriddedDensity smoothed;
  double upper = 0.0;
  double global_best = 0.0;
  int global_generations = 0;
  int local_iterations = 0;
  std::size_t evaluations = 0;
};

/// Minimises BIC_s over d in [lower, upper]: d = 0 first, then a
/// stochastic-ranking evolution strategy for `global_budget` evaluations, then
/// one Nelder-Mead descent from the global best. Deterministic given the seed.
OptimizationResult optimize_bandwidth(std::span<const CensoredInterval> data, const GriddedDensity& raw,
                                      const PenaltyBase& penalty, const OptimizerConfig& cfg = {});

/// Resolves the penalty from the raw estimate (held fixed during the search).
OptimizationResult optimize_bandwidth(std::span<const CensoredInterval> data, const GriddedDensity& raw,
                                      PenaltyKind kind, std::span<const int> m_counts,
                                      const OptimizerConfig& cfg = {});

/// Stochastic ranking of candidates by objective `f` and constraint violation
/// `phi` (bubble-sort sweeps, objective comparison with probability `pf`
/// unless both are feasible). Returns indices, best first.
template <class Rng>
std::vector<std::size_t> stochastic_rank(std::span<const double> f, std::span<const double> phi, double pf,
                                         Rng& rng);

struct FitOptions {
  double step = 0.01;
  PenaltyKind penalty = PenaltyKind::kEquivalentSampleSize;
  npmle::TurnbullOptions turnbull;
  OptimizerConfig optimizer;
  /// Skip the search and smooth at this bandwidth.
  std::optional<double> fixed_bandwidth;
};

/// Raw NPMLE, its grid, and the BIC_s-optimal smoothing of that grid.
struct SmoothedFit {
  npmle::StepEstimate estimate;
  GriddedDensity raw;
  GriddedDensity smoothed;
  FitReport raw_report;
  FitReport smoothed_report;
  bool step_too_coarse = false;
};

SmoothedFit smooth_step_estimate(std::span<const CensoredInterval> data, npmle::StepEstimate estimate,
                                 const core::TimeFrame& frame, std::span<const int> m_counts,
                                 const FitOptions& options);

SmoothedFit fit_turnbull(std::span<const CensoredInterval> data, const core::TimeFrame& frame,
                         std::span<const int> m_counts, const FitOptions& options);

}  // namespace sise::bandwidth

#include "sise/detail/stochastic_rank.ipp"
