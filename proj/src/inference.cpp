#include "sise/inference.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sise/error.hpp"
#include "sise/runtime.hpp"

namespace sise::inference {

double impute_event_time(const CensoredInterval& iv, const GriddedDensity& g, std::optional<double> eps) {
  core::validate_interval(iv);
  if (iv.is_exact()) return iv.left;
  npmle::check_density(g);
  const double floor = eps.value_or(1e-12 * g.total_mass / g.step);
  if (!(floor >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be >= 0");

  const double a = std::clamp(iv.left, g.grid_start, g.grid_end());
  const double b = std::clamp(iv.right, g.grid_start, g.grid_end());
  if (!(g.position(b) > g.position(a))) {
    throw Error(ErrorCode::kEmptyInterval, "interval (" + std::to_string(iv.left) + ", " +
                                               std::to_string(iv.right) + ") covers no bins of the density");
  }
  const std::size_t first = g.bin_of(a);
  const std::size_t last = std::min(g.size() - 1, static_cast<std::size_t>(std::ceil(g.position(b))) - 1);
  double mass = 0.0;
  double moment = 0.0;
  for (std::size_t j = first; j <= last; ++j) {
    const double lo = std::max(a, g.bin_left(j));
    const double hi = std::min(b, g.bin_left(j) + g.step);
    if (!(hi > lo)) continue;
    const double w = (g.values[j] > 0.0 ? g.values[j] : floor) * (hi - lo);
    mass += w;
    moment += w * 0.5 * (lo + hi);
  }
  if (!(mass > 0.0)) {
    throw Error(ErrorCode::kEmptyInterval, "interval has no mass after zero inflation (eps = 0?)");
  }
  return std::clamp(moment / mass, a, b);
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::kEmptyData, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

ConfidenceBands make_bands(const std::vector<double>& grid, const std::vector<std::vector<double>>& curves,
                           const std::vector<char>& ok, const BootstrapOptions& options) {
  ConfidenceBands bands;
  bands.grid = grid;
  bands.lower.resize(grid.size());
  bands.upper.resize(grid.size());
  std::vector<double> column;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    column.clear();
    for (std::size_t b = 0; b < curves.size(); ++b) {
      if (ok[b]) column.push_back(curves[b][k]);
    }
    std::sort(column.begin(), column.end());
    bands.lower[k] = std::clamp(quantile(column, options.lower_quantile), 0.0, 1.0);
    bands.upper[k] = std::clamp(quantile(column, options.upper_quantile), bands.lower[k], 1.0);
  }
  bands.replicates = static_cast<int>(std::count(ok.begin(), ok.end(), 1));
  return bands;
}

}  // namespace

BootstrapResult bootstrap_bands(std::span<const CensoredInterval> data, const FitPipeline& pipeline,
                                const GriddedDensity& grid, const BootstrapOptions& options) {
  if (options.replicates < 2) throw Error(ErrorCode::kInvalidArgument, "bootstrap needs B >= 2");
  if (data.empty()) throw Error(ErrorCode::kEmptyData, "bootstrap needs data");
  if (!(options.lower_quantile >= 0.0 && options.lower_quantile < options.upper_quantile &&
        options.upper_quantile <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bootstrap quantiles must satisfy 0 <= lo < hi <= 1");
  }
  const auto n_rep = static_cast<std::size_t>(options.replicates);
  std::vector<double> taus(grid.size() + 1);
  for (std::size_t k = 0; k < taus.size(); ++k) taus[k] = grid.bin_left(k);

  std::vector<std::vector<double>> raw(n_rep), smooth(n_rep);
  std::vector<char> ok(n_rep, 0);
  std::vector<std::string> messages(n_rep);
  std::vector<double> bandwidths(n_rep, 0.0);
  const auto one = [&](std::size_t b) {
    std::mt19937_64 rng(derive_seed(options.seed, b, 2));
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    std::vector<std::size_t> picked(data.size());
    std::vector<CensoredInterval> sample(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      picked[i] = pick(rng);
      sample[i] = data[picked[i]];
    }
    try {
      const auto fit = pipeline(sample, picked, derive_seed(options.seed, b, 3));
      if (!fit.estimate.converged) {
        messages[b] = "EM did not converge";
        return;
      }
      const auto s_raw = npmle::grid_to_survival(fit.raw);
      const auto s_smooth = npmle::grid_to_survival(fit.smoothed);
      raw[b].resize(taus.size());
      smooth[b].resize(taus.size());
      for (std::size_t k = 0; k < taus.size(); ++k) {
        raw[b][k] = s_raw.at(taus[k]);
        smooth[b][k] = s_smooth.at(taus[k]);
      }
      bandwidths[b] = fit.smoothed_report.bandwidth;
      ok[b] = 1;
    } catch (const Error& e) {
      messages[b] = e.what();
    }
  };
  parallel_for(n_rep, resolve_threads(options.threads), one);

  BootstrapResult result;
  result.requested = options.replicates;
  for (std::size_t b = 0; b < n_rep; ++b) {
    if (ok[b]) {
      result.bandwidths.push_back(bandwidths[b]);
    } else {
      result.excluded_replicates.push_back(static_cast<int>(b));
      result.failure_messages.push_back(messages[b]);
    }
  }
  result.excluded = static_cast<int>(result.excluded_replicates.size());
  if (result.excluded == options.replicates) {
    throw Error(ErrorCode::kDegenerateDensity, "every bootstrap replicate failed: " + messages.front());
  }
  result.raw = make_bands(taus, raw, ok, options);
  result.smoothed = make_bands(taus, smooth, ok, options);
  return result;
}

FitPipeline turnbull_pipeline(core::TimeFrame frame, bandwidth::FitOptions options, std::vector<int> m_counts) {
  return [frame, options, m_counts = std::move(m_counts)](std::span<const CensoredInterval> sample,
                                                         std::span<const std::size_t> picked, std::uint64_t seed) {
    auto opts = options;
    opts.optimizer.seed = seed;
    std::vector<int> m;
    if (!m_counts.empty()) {
      m.reserve(picked.size());
      for (std::size_t i : picked) m.push_back(m_counts.at(i));
    }
    return bandwidth::fit_turnbull(sample, frame, m, opts);
  };
}

PrevalenceEstimate prevalence_from_fit(const GriddedDensity& g, const core::TimeFrame& frame,
                                       std::optional<double> p_hint) {
  PrevalenceEstimate out;
  if (p_hint) {
    if (!(*p_hint >= 0.0 && *p_hint <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "prevalence hint must lie in [0, 1]");
    }
    out.p_hat = *p_hint;
  } else {
    const auto cum = g.cumulative();
    out.p_hat = std::clamp(npmle::integrate(g, cum, frame.left, frame.right), 0.0, 1.0);
    out.unconditional_unidentified = true;
  }
  out.survival_at_right = 1.0 - out.p_hat;
  return out;
}

}  // namespace sise::inference
