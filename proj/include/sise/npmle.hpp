#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sise/core.hpp"

namespace sise::npmle {

using core::CensoredInterval;
using core::TimeFrame;

/// One support element of a step estimate. `left == right` is a point mass;
/// otherwise the open interval (left, right), `right` possibly +inf.
struct SupportInterval {
  double left = 0.0;
  double right = 0.0;

  bool is_point() const noexcept { return left == right; }
  friend bool operator==(const SupportInterval&, const SupportInterval&) = default;
};

/// Raw NPMLE: masses on ordered, disjoint support elements.
struct StepEstimate {
  std::vector<SupportInterval> support;
  std::vector<double> masses;
  TimeFrame frame;
  bool converged = true;
  int iterations = 0;
  double residual = 0.0;     // last max |delta mass| (Turnbull)
  bool all_censored = false;  // KM with no events: S == 1
  std::vector<double> log_likelihood_trace;  // filled when requested

  /// 1 - total mass of support elements lying entirely at or before t.
  double survival_at(double t) const;
};

struct KmObservation {
  double time = 0.0;
  bool event = false;
};

/// Product-limit estimate. Survival left after the largest time is kept on a
/// terminal element (t_max, +inf) so the estimate stays a distribution over
/// the frame once clamped.
StepEstimate km_fit(std::span<const KmObservation> observations,
                    std::optional<TimeFrame> frame = std::nullopt);

/// Maximal intersections of the observation sets, in increasing order.
std::vector<SupportInterval> turnbull_intervals(std::span<const CensoredInterval> data);

struct TurnbullOptions {
  double tol = 1e-8;
  int max_iter = 20000;
  bool record_trace = false;
  /// SQUAREM extrapolation between self-consistency steps, guarded so ln L
  /// never decreases. Off gives the plain EM sequence.
  bool accelerate = true;
};

/// Self-consistency EM on the Turnbull intervals, started from uniform masses.
/// Converged when one plain EM step moves no mass by `tol` or more. On
/// non-convergence the last iterate is returned with `converged == false`.
StepEstimate turnbull_fit(std::span<const CensoredInterval> data,
                          std::optional<TimeFrame> frame = std::nullopt,
                          const TurnbullOptions& options = {});

/// Log-likelihood sum_i w_i ln(sum of masses on elements inside interval i).
double step_log_likelihood(std::span<const CensoredInterval> data,
                           std::span<const SupportInterval> support,
                           std::span<const double> masses);

/// Density tabulated on bins [grid_start + j*step, grid_start + (j+1)*step).
struct GriddedDensity {
  double grid_start = 0.0;
  double step = 0.01;
  std::vector<double> values;
  double bandwidth = 0.0;
  double total_mass = 0.0;

  std::size_t size() const noexcept { return values.size(); }
  double grid_end() const noexcept { return grid_start + static_cast<double>(values.size()) * step; }
  double bin_left(std::size_t j) const noexcept { return grid_start + static_cast<double>(j) * step; }
  double bin_center(std::size_t j) const noexcept { return grid_start + (static_cast<double>(j) + 0.5) * step; }

  /// (t - grid_start) / step, snapped to an integer within 1e-9.
  double position(double t) const noexcept;
  /// Bin containing t, clamped to the grid.
  std::size_t bin_of(double t) const noexcept;
  /// Integral of the density from grid_start to each bin edge (size n + 1).
  std::vector<double> cumulative() const;
};

/// Integral of the density over [a, b] (clamped to the grid) with linear
/// proration of partial bins, using a precomputed cumulative table.
double integrate(const GriddedDensity& g, std::span<const double> cumulative, double a, double b);

/// Number of bins spanning [left, right] at the given step.
std::size_t bin_count(double left, double right, double step);

/// Validates the documented invariants; throws InvalidArgument.
void check_density(const GriddedDensity& g);

struct GridConversion {
  GriddedDensity density;
  bool step_too_coarse = false;  // a support element narrower than step shares a bin
};

/// Spreads every support element's mass uniformly over the bins it covers.
/// Support is clamped to the frame first; degenerate elements go to the bin
/// containing them.
GridConversion step_to_grid(const StepEstimate& estimate, const TimeFrame& frame, double step = 0.01);

/// Survival tabulated at the n + 1 bin edges.
struct SurvivalCurve {
  double grid_start = 0.0;
  double step = 0.01;
  std::vector<double> values;

  double tau(std::size_t k) const noexcept { return grid_start + static_cast<double>(k) * step; }
  /// Right-continuous step lookup; clamps outside the grid.
  double at(double t) const noexcept;
};

/// S(tau_k) = total_mass - integral up to tau_k.
SurvivalCurve grid_to_survival(const GriddedDensity& g);

}  // namespace sise::npmle
