#include "sise/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sise::smoothing {

std::string_view to_string(PenaltyKind kind) noexcept {
  switch (kind) {
    case PenaltyKind::kSampleSize: return "n";
    case PenaltyKind::kObservationCount: return "nm";
    case PenaltyKind::kEquivalentSampleSize: return "ne";
  }
  return "ne";
}

PenaltyKind parse_penalty(std::string_view text) {
  if (text == "n") return PenaltyKind::kSampleSize;
  if (text == "nm") return PenaltyKind::kObservationCount;
  if (text == "ne") return PenaltyKind::kEquivalentSampleSize;
  throw Error(ErrorCode::kInvalidArgument, "unknown penalty '" + std::string(text) + "' (expected n, nm or ne)");
}

ZeroLikelihoodError::ZeroLikelihoodError(const CensoredInterval& interval)
    : Error(ErrorCode::kZeroLikelihoodObservation,
            "observation (" + std::to_string(interval.left) + ", " + std::to_string(interval.right) +
                ") has zero probability under the density"),
      interval_(interval) {}

namespace {

// Tail sums T[s] = sum_{t >= s} w_t of the kernel weights by bin offset, with
// T[n] = 0. Differences of tail sums keep full relative precision far from the
// kernel centre.
struct KernelTails {
  std::vector<double> tail;
  std::size_t reach = 0;  // largest offset with a non-zero weight

  KernelTails(std::size_t n, double step, double bandwidth) : tail(n + 1, 0.0) {
    const double h = step / bandwidth;
    std::vector<double> w(n);
    for (std::size_t s = 0; s < n; ++s) {
      const double u = static_cast<double>(s) * h;
      w[s] = std::exp(-0.5 * u * u);
      if (w[s] > 0.0) reach = s;
    }
    for (std::size_t s = n; s-- > 0;) tail[s] = w[s] + tail[s + 1];
  }

  // Sum of weights over integer offsets [a, b], a <= b.
  double range(long a, long b) const {
    const auto t = [&](long s) { return tail[static_cast<std::size_t>(s)]; };
    if (a >= 0) return t(a) - t(b + 1);
    if (b <= 0) return t(-b) - t(-a + 1);
    return (t(0) - t(b + 1)) + (t(1) - t(-a + 1));
  }
};

}  // namespace

GriddedDensity nw_smooth(const GriddedDensity& g, double bandwidth) {
  if (!(bandwidth >= 0.0)) {
    throw Error(ErrorCode::kNegativeBandwidth, "bandwidth must be >= 0, got " + std::to_string(bandwidth));
  }
  npmle::check_density(g);
  if (bandwidth == 0.0) {
    GriddedDensity out = g;
    out.bandwidth = 0.0;
    return out;
  }
  const std::size_t n = g.size();
  const long last = static_cast<long>(n) - 1;
  const KernelTails kernel(n, g.step, bandwidth);
  const long reach = static_cast<long>(kernel.reach);

  // The input is usually piecewise constant (a gridded step estimate), so the
  // numerator is accumulated run by run.
  std::vector<double> numerator(n, 0.0);
  for (std::size_t p = 0; p < n;) {
    std::size_t q = p;
    while (q + 1 < n && g.values[q + 1] == g.values[p]) ++q;
    const double c = g.values[p];
    if (c != 0.0) {
      const long lp = static_cast<long>(p);
      const long lq = static_cast<long>(q);
      const long lo = std::max(0L, lp - reach);
      const long hi = std::min(last, lq + reach);
      for (long j = lo; j <= hi; ++j) numerator[static_cast<std::size_t>(j)] += c * kernel.range(j - lq, j - lp);
    }
    p = q + 1;
  }

  GriddedDensity out;
  out.grid_start = g.grid_start;
  out.step = g.step;
  out.bandwidth = bandwidth;
  out.values.resize(n);
  double sum = 0.0;
  for (long j = 0; j <= last; ++j) {
    const double denominator = kernel.range(j - last, j);
    const double v = std::max(0.0, numerator[static_cast<std::size_t>(j)] / denominator);
    out.values[static_cast<std::size_t>(j)] = v;
    sum += v;
  }
  if (sum > 0.0) {
    const double scale = g.total_mass / (sum * g.step);
    for (double& v : out.values) v *= scale;
  }
  out.total_mass = g.total_mass;
  return out;
}

int count_turning_points(std::span<const double> values, double suppression) {
  if (values.size() < 3) {
    throw Error(ErrorCode::kTooFewBins, "need at least 3 bins to count turning points");
  }
  std::vector<double> diff(values.size() - 1);
  for (std::size_t j = 0; j + 1 < values.size(); ++j) diff[j] = values[j + 1] - values[j];
  double mean_abs = 0.0;
  for (double d : diff) mean_abs += std::abs(d);
  mean_abs /= static_cast<double>(diff.size());
  const double threshold = suppression * mean_abs;

  int runs = 0;
  int previous = 0;
  for (double d : diff) {
    const int sign = std::abs(d) < threshold || d == 0.0 ? 0 : (d > 0.0 ? 1 : -1);
    if (sign != 0 && sign != previous) ++runs;
    previous = sign;
  }
  return std::max(0, runs - 1);
}

int count_turning_points(const GriddedDensity& g, double suppression) {
  return count_turning_points(std::span<const double>(g.values), suppression);
}

double effective_sample_size(std::span<const CensoredInterval> data, const SurvivalCurve& survival) {
  double n_e = 0.0;
  for (const auto& iv : data) {
    const double informativeness = iv.is_exact() ? 1.0 : 1.0 - (survival.at(iv.left) - survival.at(iv.right));
    n_e += iv.multiplicity * informativeness;
  }
  return n_e;
}

double interval_log_likelihood(std::span<const CensoredInterval> data, const GriddedDensity& g,
                               double truncation_prob) {
  if (!(truncation_prob > 0.0 && truncation_prob <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "truncation probability must lie in (0, 1]");
  }
  if (!(g.total_mass > 0.0)) throw Error(ErrorCode::kDegenerateDensity, "density has zero mass");
  const auto cum = g.cumulative();
  const double lo = g.grid_start;
  const double hi = g.grid_end();
  double ll = 0.0;
  for (const auto& iv : data) {
    double f = 0.0;
    if (iv.is_exact()) {
      f = g.values[g.bin_of(iv.left)];
    } else {
      const double a = std::clamp(iv.left, lo, hi);
      const double b = std::clamp(iv.right, lo, hi);
      if (g.position(b) > g.position(a)) {
        f = npmle::integrate(g, cum, a, b);
      } else {
        // Bracket lies at or beyond a grid edge: it owns the edge bin's mass.
        f = g.values[g.bin_of(a)] * g.step;
      }
    }
    if (!(f > 0.0)) throw ZeroLikelihoodError(iv);
    ll += iv.multiplicity * std::log(f / truncation_prob);
  }
  return ll;
}

PenaltyBase resolve_penalty(PenaltyKind kind, std::span<const CensoredInterval> data,
                            std::span<const int> m_counts, const SurvivalCurve* survival) {
  if (data.empty()) throw Error(ErrorCode::kEmptyData, "penalty needs at least one observation");
  PenaltyBase base;
  base.kind = kind;
  switch (kind) {
    case PenaltyKind::kSampleSize:
      for (const auto& iv : data) base.sample_quantity += iv.multiplicity;
      break;
    case PenaltyKind::kObservationCount:
      if (m_counts.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "the ln N_m penalty needs per-individual observation counts");
      }
      base.sample_quantity = std::accumulate(m_counts.begin(), m_counts.end(), 0.0);
      break;
    case PenaltyKind::kEquivalentSampleSize:
      if (survival == nullptr) {
        throw Error(ErrorCode::kInvalidArgument, "the ln N_e penalty needs a survival curve");
      }
      base.sample_quantity = effective_sample_size(data, *survival);
      base.n_e = base.sample_quantity;
      break;
  }
  if (base.sample_quantity > 1.0) {
    base.weight = std::log(base.sample_quantity);
  } else {
    base.weight = 0.0;
    base.floored = true;
  }
  return base;
}

FitReport bic_s(double log_likelihood, int turning_points, const PenaltyBase& penalty, double bandwidth) {
  FitReport r;
  r.bandwidth = bandwidth;
  r.log_likelihood = log_likelihood;
  r.turning_points = turning_points;
  r.penalty_weight = penalty.weight;
  r.bic_s = -2.0 * log_likelihood + turning_points * penalty.weight;
  r.n_e = penalty.n_e;
  r.zero_penalty_base = penalty.floored;
  return r;
}

FitReport bic_s(double log_likelihood, int turning_points, std::span<const CensoredInterval> data,
                std::span<const int> m_counts, PenaltyKind kind, const SurvivalCurve* survival) {
  return bic_s(log_likelihood, turning_points, resolve_penalty(kind, data, m_counts, survival));
}

}  // namespace sise::smoothing
