#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sise/bandwidth.hpp"
#include "sise/core.hpp"
#include "sise/npmle.hpp"

namespace sise::inference {

using core::CensoredInterval;
using npmle::GriddedDensity;
using npmle::SurvivalCurve;

/// Conditional mean of the event time inside (L, R) under g, by midpoint sums
/// over the bins the clamped interval overlaps. Zero bins are raised to `eps`
/// (default 1e-12 * total_mass / step) so every interval has mass.
/// Exact intervals return L. Throws EmptyInterval when the clamped interval
/// covers no bins.
double impute_event_time(const CensoredInterval& iv, const GriddedDensity& g,
                         std::optional<double> eps = std::nullopt);

struct ConfidenceBands {
  std::vector<double> grid;
  std::vector<double> lower;  // 2.5% quantile
  std::vector<double> upper;  // 97.5% quantile
  int replicates = 0;         // replicates that entered the quantiles
};

/// Fits one resample. `picked[i]` is the original index of sample[i]; the seed
/// is derived per replicate for the randomness inside the fit.
using FitPipeline = std::function<bandwidth::SmoothedFit(std::span<const CensoredInterval> sample,
                                                         std::span<const std::size_t> picked, std::uint64_t seed)>;

struct BootstrapOptions {
  int replicates = 200;
  std::uint64_t seed = 0;
  int threads = 1;
  double lower_quantile = 0.025;
  double upper_quantile = 0.975;
};

struct BootstrapResult {
  ConfidenceBands raw;
  ConfidenceBands smoothed;
  int requested = 0;
  int excluded = 0;
  std::vector<int> excluded_replicates;
  std::vector<std::string> failure_messages;
  std::vector<double> bandwidths;  // per included replicate
};

/// Resamples individuals with replacement, refits each resample through
/// `pipeline`, and takes pointwise quantiles of the raw and smoothed survival
/// at the bin edges of `grid`. Replicates that throw or whose EM did not
/// converge are excluded and counted.
BootstrapResult bootstrap_bands(std::span<const CensoredInterval> data, const FitPipeline& pipeline,
                                const GriddedDensity& grid, const BootstrapOptions& options);

/// Pipeline used by the CLI and the benchmarks: Turnbull on a fixed frame,
/// then the BIC_s search (or the fixed bandwidth, when reusing d*).
/// `m_counts` (original order) is only needed for the ln N_m penalty.
FitPipeline turnbull_pipeline(core::TimeFrame frame, bandwidth::FitOptions options,
                              std::vector<int> m_counts = {});

/// Sample quantile, linear interpolation between order statistics (type 7).
double quantile(std::span<const double> sorted, double q);

struct PrevalenceEstimate {
  double p_hat = 0.0;
  double survival_at_right = 0.0;  // unconditional S(B^R) = 1 - p
  bool unconditional_unidentified = false;
};

/// With a hint, p is the supplied unconditional mass. Without one, the mass
/// of g inside the frame is returned and flagged as not identified, since
/// truncated data only determine the conditional distribution.
PrevalenceEstimate prevalence_from_fit(const GriddedDensity& g, const core::TimeFrame& frame,
                                       std::optional<double> p_hint = std::nullopt);

}  // namespace sise::inference
