#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sise/core.hpp"
#include "sise/error.hpp"
#include "sise/npmle.hpp"

namespace sise::smoothing {

using core::CensoredInterval;
using npmle::GriddedDensity;
using npmle::SurvivalCurve;

/// Which sample-size quantity weights the turning-point penalty.
enum class PenaltyKind {
  kSampleSize,            // ln N
  kObservationCount,      // ln sum_i m_i
  kEquivalentSampleSize,  // ln N_e
};

/// CLI spelling: "n", "nm", "ne".
std::string_view to_string(PenaltyKind kind) noexcept;
PenaltyKind parse_penalty(std::string_view text);

/// Resolved ln N_s for one dataset.
struct PenaltyBase {
  PenaltyKind kind = PenaltyKind::kEquivalentSampleSize;
  double sample_quantity = 0.0;  // N, N_m or N_e
  double weight = 0.0;           // max(0, ln sample_quantity)
  bool floored = false;          // ZeroPenaltyBase: ln N_s <= 0 was floored to 0
  std::optional<double> n_e;
};

struct FitReport {
  double bandwidth = 0.0;
  double log_likelihood = 0.0;
  int turning_points = 0;
  double penalty_weight = 0.0;
  double bic_s = 0.0;
  std::optional<double> n_e;
  bool zero_penalty_base = false;
};

/// Raised when an observation receives zero probability under a density.
class ZeroLikelihoodError : public Error {
 public:
  explicit ZeroLikelihoodError(const CensoredInterval& interval);
  const CensoredInterval& interval() const noexcept { return interval_; }

 private:
  CensoredInterval interval_;
};

/// Nadaraya-Watson regression of the bin values on bin centres with a
/// standard normal kernel of scale d, renormalised to the input's total mass.
/// d == 0 returns the input unchanged.
GriddedDensity nw_smooth(const GriddedDensity& g, double bandwidth);

/// Sign changes of the finite-difference slope. Differences smaller than
/// `suppression` times the mean absolute difference count as flat; a flat
/// stretch between two sloped stretches counts once whatever the signs.
int count_turning_points(std::span<const double> values, double suppression = 0.01);
int count_turning_points(const GriddedDensity& g, double suppression = 0.01);

/// N_e = sum_i w_i [1 - (S(L_i) - S(R_i))], S(+inf) read at the grid end.
double effective_sample_size(std::span<const CensoredInterval> data, const SurvivalCurve& survival);

/// ln L = sum_i w_i ln f(L_i, R_i) with f the density value (exact) or the
/// interval integral, both divided by the truncation probability.
double interval_log_likelihood(std::span<const CensoredInterval> data, const GriddedDensity& g,
                               double truncation_prob = 1.0);

/// `m_counts` is required for kObservationCount, `survival` for
/// kEquivalentSampleSize.
PenaltyBase resolve_penalty(PenaltyKind kind, std::span<const CensoredInterval> data,
                            std::span<const int> m_counts = {},
                            const SurvivalCurve* survival = nullptr);

/// BIC_s = -2 ln L + k_T ln N_s.
FitReport bic_s(double log_likelihood, int turning_points, const PenaltyBase& penalty,
                double bandwidth = 0.0);

FitReport bic_s(double log_likelihood, int turning_points, std::span<const CensoredInterval> data,
                std::span<const int> m_counts, PenaltyKind kind, const SurvivalCurve* survival);

}  // namespace sise::smoothing
