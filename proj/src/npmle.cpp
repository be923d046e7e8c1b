#include "sise/npmle.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <string>

#include "sise/error.hpp"

namespace sise::npmle {

namespace {

constexpr double kSnap = 1e-9;

// Coordinate ordering used to sweep endpoints. At a shared coordinate an open
// interval closes before a point opens, and a point closes before an open
// interval starts, so (a, x) and (x, b) never intersect while [x, x] does.
enum EndpointRank : int { kOpenEnd = 0, kPointStart = 1, kPointEnd = 2, kOpenStart = 3 };

struct Endpoint {
  double x;
  int rank;
};

struct CoverRange {
  std::size_t lo;
  std::size_t hi;  // inclusive
};

// Contiguous run of support elements contained in one observation.
CoverRange cover_range(const CensoredInterval& iv, std::span<const SupportInterval> support) {
  if (iv.is_exact()) {
    auto it = std::lower_bound(support.begin(), support.end(), iv.left,
                               [](const SupportInterval& s, double x) { return s.left < x; });
    while (it != support.end() && it->left == iv.left && !it->is_point()) ++it;
    if (it == support.end() || !it->is_point() || it->left != iv.left) {
      throw Error(ErrorCode::kNoFeasibleSupport,
                  "exact observation at " + std::to_string(iv.left) + " has no support point");
    }
    const auto k = static_cast<std::size_t>(it - support.begin());
    return {k, k};
  }
  const auto starts_inside = [&](const SupportInterval& s) {
    return s.is_point() ? s.left > iv.left : s.left >= iv.left;
  };
  const auto ends_inside = [&](const SupportInterval& s) {
    return s.is_point() ? s.right < iv.right : s.right <= iv.right;
  };
  const auto first = std::partition_point(support.begin(), support.end(),
                                          [&](const SupportInterval& s) { return !starts_inside(s); });
  const auto last = std::partition_point(support.begin(), support.end(), ends_inside);
  if (first >= last) {
    throw Error(ErrorCode::kNoFeasibleSupport, "interval (" + std::to_string(iv.left) + ", " +
                                                   std::to_string(iv.right) +
                                                   ") contains no Turnbull interval");
  }
  return {static_cast<std::size_t>(first - support.begin()),
          static_cast<std::size_t>(last - support.begin()) - 1};
}

std::vector<CoverRange> cover_ranges(std::span<const CensoredInterval> data,
                                     std::span<const SupportInterval> support) {
  std::vector<CoverRange> ranges;
  ranges.reserve(data.size());
  for (const auto& iv : data) ranges.push_back(cover_range(iv, support));
  return ranges;
}

double snapped(double u) noexcept {
  const double r = std::round(u);
  return std::abs(u - r) < kSnap ? r : u;
}

}  // namespace

double StepEstimate::survival_at(double t) const {
  double dropped = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (support[k].right <= t) dropped += masses[k];
  }
  return std::clamp(1.0 - dropped, 0.0, 1.0);
}

StepEstimate km_fit(std::span<const KmObservation> observations, std::optional<TimeFrame> frame) {
  if (observations.empty()) throw Error(ErrorCode::kEmptyData, "km_fit needs at least one observation");
  std::vector<KmObservation> obs(observations.begin(), observations.end());
  for (const auto& o : obs) {
    if (!(o.time >= 0.0) || !std::isfinite(o.time)) {
      throw Error(ErrorCode::kNegativeTime, "km_fit times must be finite and >= 0");
    }
  }
  std::sort(obs.begin(), obs.end(), [](const KmObservation& a, const KmObservation& b) { return a.time < b.time; });

  StepEstimate est;
  est.frame = frame ? *frame : core::make_time_frame(obs.front().time, obs.back().time);

  double survival = 1.0;
  auto at_risk = static_cast<double>(obs.size());
  for (std::size_t i = 0; i < obs.size();) {
    const double t = obs[i].time;
    double events = 0.0;
    double censored = 0.0;
    for (; i < obs.size() && obs[i].time == t; ++i) (obs[i].event ? events : censored) += 1.0;
    if (events > 0.0) {
      const double next = survival * (1.0 - events / at_risk);
      est.support.push_back({t, t});
      est.masses.push_back(survival - next);
      survival = next;
    }
    at_risk -= events + censored;
  }
  est.all_censored = est.support.empty();
  if (survival > 0.0) {
    // Survival left after the largest (censored) time is not located further.
    est.support.push_back({obs.back().time, kInf});
    est.masses.push_back(survival);
  }
  return est;
}

std::vector<SupportInterval> turnbull_intervals(std::span<const CensoredInterval> data) {
  if (data.empty()) throw Error(ErrorCode::kEmptyData, "turnbull_intervals needs data");
  std::vector<Endpoint> ends;
  ends.reserve(2 * data.size());
  for (const auto& iv : data) {
    core::validate_interval(iv);
    if (iv.is_exact()) {
      ends.push_back({iv.left, kPointStart});
      ends.push_back({iv.left, kPointEnd});
    } else {
      ends.push_back({iv.left, kOpenStart});
      ends.push_back({iv.right, kOpenEnd});
    }
  }
  std::sort(ends.begin(), ends.end(), [](const Endpoint& a, const Endpoint& b) {
    return a.x < b.x || (a.x == b.x && a.rank < b.rank);
  });
  const auto is_start = [](int rank) { return rank == kPointStart || rank == kOpenStart; };
  std::vector<SupportInterval> out;
  for (std::size_t i = 0; i + 1 < ends.size(); ++i) {
    if (is_start(ends[i].rank) && !is_start(ends[i + 1].rank)) {
      out.push_back({ends[i].x, ends[i + 1].x});
    }
  }
  return out;
}

double step_log_likelihood(std::span<const CensoredInterval> data,
                           std::span<const SupportInterval> support, std::span<const double> masses) {
  double ll = 0.0;
  for (const auto& iv : data) {
    const auto r = cover_range(iv, support);
    double p = 0.0;
    for (std::size_t k = r.lo; k <= r.hi; ++k) p += masses[k];
    ll += iv.multiplicity * std::log(p);
  }
  return ll;
}

StepEstimate turnbull_fit(std::span<const CensoredInterval> data, std::optional<TimeFrame> frame,
                          const TurnbullOptions& options) {
  if (data.empty()) throw Error(ErrorCode::kEmptyData, "turnbull_fit needs data");
  if (!(options.tol > 0.0) || options.max_iter < 1) {
    throw Error(ErrorCode::kInvalidArgument, "turnbull_fit needs tol > 0 and max_iter >= 1");
  }
  StepEstimate est;
  est.frame = frame ? *frame : core::frame_from_intervals(data);
  est.support = turnbull_intervals(data);
  const auto ranges = cover_ranges(data, est.support);

  const std::size_t k_count = est.support.size();
  double total_weight = 0.0;
  for (const auto& iv : data) total_weight += iv.multiplicity;

  std::vector<double> masses(k_count, 1.0 / static_cast<double>(k_count));
  const bool want_ll = options.record_trace;

  // One self-consistency update from `from` into `to`; returns ln L(from).
  // Range sums are accumulated directly; prefix-sum differences lose the
  // relative precision of tiny masses.
  const auto em_step = [&](const std::vector<double>& from, std::vector<double>& to) {
    std::fill(to.begin(), to.end(), 0.0);
    double ll = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto [lo, hi] = ranges[i];
      double denom = 0.0;
      for (std::size_t k = lo; k <= hi; ++k) denom += from[k];
      const double w = data[i].multiplicity / denom;
      for (std::size_t k = lo; k <= hi; ++k) to[k] += w;
      ll += data[i].multiplicity * std::log(denom);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      to[k] *= from[k] / total_weight;
      sum += to[k];
    }
    for (double& m : to) m /= sum;
    return ll;
  };
  const auto max_diff = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
  };

  std::vector<double> p1(k_count), p2(k_count), jump(k_count), p3(k_count);
#ifndef NDEBUG
  double previous_ll = -kInf;
#endif
  est.converged = false;
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    const double ll = em_step(masses, p1);
    if (want_ll) est.log_likelihood_trace.push_back(ll);
#ifndef NDEBUG
    assert(ll >= previous_ll - 1e-12 * std::max(1.0, std::abs(ll)));
    previous_ll = ll;
#endif
    est.iterations = iter;
    est.residual = max_diff(p1, masses);
    if (est.residual < options.tol || !options.accelerate) {
      masses.swap(p1);
      if (est.residual < options.tol) {
        est.converged = true;
        break;
      }
      continue;
    }
    // Squared extrapolation (SQUAREM) over two EM steps, kept only when the
    // extrapolated point is a valid distribution that does not lower ln L.
    const double ll1 = em_step(p1, p2);
    double rr = 0.0;
    double vv = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      const double r = p1[k] - masses[k];
      const double v = p2[k] - 2.0 * p1[k] + masses[k];
      rr += r * r;
      vv += v * v;
    }
    const double alpha = vv > 0.0 ? std::min(-1.0, -std::sqrt(rr / vv)) : -1.0;
    bool valid = alpha < -1.0;
    double jump_sum = 0.0;
    for (std::size_t k = 0; k < k_count && valid; ++k) {
      const double r = p1[k] - masses[k];
      const double v = p2[k] - 2.0 * p1[k] + masses[k];
      jump[k] = masses[k] - 2.0 * alpha * r + alpha * alpha * v;
      valid = jump[k] > 0.0 && std::isfinite(jump[k]);
      jump_sum += jump[k];
    }
    if (valid) {
      for (double& m : jump) m /= jump_sum;
      const double ll_jump = em_step(jump, p3);
      if (ll_jump >= ll1) {
        masses.swap(p3);
        continue;
      }
    }
    masses.swap(p2);
  }
  if (want_ll) est.log_likelihood_trace.push_back(step_log_likelihood(data, est.support, masses));
  est.masses = std::move(masses);
  return est;
}

double GriddedDensity::position(double t) const noexcept { return snapped((t - grid_start) / step); }

std::size_t GriddedDensity::bin_of(double t) const noexcept {
  const double p = std::floor(position(t));
  if (!(p > 0.0)) return 0;
  if (p >= static_cast<double>(values.size() - 1)) return values.size() - 1;
  return static_cast<std::size_t>(p);
}

std::vector<double> GriddedDensity::cumulative() const {
  std::vector<double> cum(values.size() + 1, 0.0);
  for (std::size_t j = 0; j < values.size(); ++j) cum[j + 1] = cum[j] + values[j] * step;
  return cum;
}

double integrate(const GriddedDensity& g, std::span<const double> cumulative, double a, double b) {
  const auto n = static_cast<double>(g.size());
  const double pa = std::clamp(g.position(a), 0.0, n);
  const double pb = std::clamp(g.position(b), 0.0, n);
  if (!(pb > pa)) return 0.0;
  const auto at = [&](double p) {
    const auto k = std::min(static_cast<std::size_t>(p), g.size() - 1);
    return cumulative[k] + (p - static_cast<double>(k)) * g.values[k] * g.step;
  };
  return std::max(0.0, at(pb) - at(pa));
}

std::size_t bin_count(double left, double right, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::kInvalidArgument, "grid step must be positive");
  const double cells = std::ceil((right - left) / step - kSnap);
  return cells < 1.0 ? 1 : static_cast<std::size_t>(cells);
}

void check_density(const GriddedDensity& g) {
  if (!(g.step > 0.0)) throw Error(ErrorCode::kInvalidArgument, "density step must be positive");
  if (g.values.empty()) throw Error(ErrorCode::kInvalidArgument, "density has no bins");
  if (!(g.bandwidth >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "density bandwidth must be >= 0");
  for (double v : g.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "density values must be finite and >= 0");
    }
  }
}

GridConversion step_to_grid(const StepEstimate& estimate, const TimeFrame& frame, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::kInvalidArgument, "grid step must be positive");
  if (estimate.support.size() != estimate.masses.size()) {
    throw Error(ErrorCode::kLengthMismatch, "support and masses differ in length");
  }
  GridConversion out;
  GriddedDensity& g = out.density;
  g.grid_start = frame.left;
  g.step = step;
  g.values.assign(bin_count(frame.left, frame.right, step), 0.0);
  const auto n = static_cast<double>(g.size());

  std::vector<std::pair<std::size_t, std::size_t>> bins;  // occupied bin range per element
  bins.reserve(estimate.support.size());
  std::vector<bool> narrow;
  for (std::size_t k = 0; k < estimate.support.size(); ++k) {
    const double mass = estimate.masses[k];
    const double a = std::clamp(estimate.support[k].left, frame.left, frame.right);
    const double b = std::clamp(estimate.support[k].right, frame.left, frame.right);
    const double pa = std::clamp(g.position(a), 0.0, n);
    const double pb = std::clamp(g.position(b), 0.0, n);
    if (!(pb > pa)) {
      const std::size_t j = g.bin_of(a);
      g.values[j] += mass / step;
      bins.emplace_back(j, j);
      narrow.push_back(true);
      continue;
    }
    const auto first = static_cast<std::size_t>(std::floor(pa));
    const auto last = std::min(static_cast<std::size_t>(std::ceil(pb)), g.size()) - 1;
    for (std::size_t j = first; j <= last; ++j) {
      const double overlap = std::min(pb, static_cast<double>(j + 1)) - std::max(pa, static_cast<double>(j));
      if (overlap > 0.0) g.values[j] += mass * overlap / (pb - pa) / step;
    }
    bins.emplace_back(first, last);
    narrow.push_back(pb - pa < 1.0);
  }
  for (std::size_t k = 0; k < bins.size(); ++k) {
    if (!narrow[k]) continue;
    const bool left_shared = k > 0 && bins[k - 1].second >= bins[k].first;
    const bool right_shared = k + 1 < bins.size() && bins[k + 1].first <= bins[k].second;
    if (left_shared || right_shared) out.step_too_coarse = true;
  }
  g.total_mass = std::accumulate(g.values.begin(), g.values.end(), 0.0) * step;
  return out;
}

double SurvivalCurve::at(double t) const noexcept {
  const double p = std::floor(snapped((t - grid_start) / step));
  if (!(p > 0.0)) return values.front();
  if (p >= static_cast<double>(values.size() - 1)) return values.back();
  return values[static_cast<std::size_t>(p)];
}

SurvivalCurve grid_to_survival(const GriddedDensity& g) {
  SurvivalCurve s;
  s.grid_start = g.grid_start;
  s.step = g.step;
  s.values.resize(g.size() + 1);
  s.values[0] = g.total_mass;
  double integral = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    integral += g.values[j] * g.step;
    s.values[j + 1] = std::max(0.0, g.total_mass - integral);
  }
  return s;
}

}  // namespace sise::npmle
