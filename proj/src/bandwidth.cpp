#include "sise/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "sise/error.hpp"

namespace sise::bandwidth {

void validate(const OptimizerConfig& cfg) {
  if (cfg.lower != 0.0) throw Error(ErrorCode::kInvalidConfig, "bandwidth lower bound must be 0");
  if (cfg.upper && !(*cfg.upper >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "bandwidth upper bound must be >= 0");
  if (cfg.global_budget < 1 || cfg.global_population < 1 || cfg.max_local_iter < 1) {
    throw Error(ErrorCode::kInvalidConfig, "optimizer budgets must be >= 1");
  }
  if (!(cfg.local_tol > 0.0)) throw Error(ErrorCode::kInvalidConfig, "local_tol must be positive");
}

BandwidthObjective::BandwidthObjective(std::span<const CensoredInterval> data, const GriddedDensity& raw,
                                       PenaltyBase penalty)
    : data_(data), raw_(raw), penalty_(std::move(penalty)) {}

GriddedDensity BandwidthObjective::smooth(double bandwidth) const { return smoothing::nw_smooth(raw_, bandwidth); }

const FitReport& BandwidthObjective::evaluate(double bandwidth) {
  const auto key = static_cast<std::int64_t>(std::llround(bandwidth * 1e10));
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  const double d = static_cast<double>(key) * 1e-10;
  const GriddedDensity g = smooth(d);
  const int k_t = smoothing::count_turning_points(g);
  double ll = -kInf;
  try {
    ll = smoothing::interval_log_likelihood(data_, g);
  } catch (const smoothing::ZeroLikelihoodError&) {
  }
  FitReport report = smoothing::bic_s(ll, k_t, penalty_, d);
  if (!std::isfinite(ll)) report.bic_s = kInf;
  return memo_.emplace(key, report).first->second;
}

const FitReport& BandwidthObjective::best() const {
  if (memo_.empty()) throw Error(ErrorCode::kInvalidArgument, "objective has not been evaluated");
  const FitReport* best = nullptr;
  for (const auto& [key, report] : memo_) {  // ascending bandwidth
    if (best == nullptr || report.bic_s < best->bic_s) best = &report;
  }
  return *best;
}

namespace {

struct Individual {
  double x;
  double sigma;
};

// Improved stochastic-ranking evolution strategy on a 1-D box.
struct EvolutionResult {
  double best_x = 0.0;
  int generations = 0;
};

EvolutionResult evolve(BandwidthObjective& objective, double lower, double upper, const OptimizerConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto lambda = static_cast<std::size_t>(std::max(2, cfg.global_population));
  const std::size_t mu = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(lambda / 7.0)));
  constexpr double kGamma = 0.85;
  constexpr double kAlpha = 0.2;
  constexpr double kProbObjective = 0.45;
  const double tau = 1.0 / std::sqrt(2.0);        // 1 / sqrt(2 sqrt(n)), n = 1
  const double tau_prime = 1.0 / std::sqrt(2.0);  // 1 / sqrt(2 n)
  const double width = upper - lower;

  // Stratified start; the first individual sits at d = 0.
  std::vector<Individual> pop(lambda);
  for (std::size_t i = 0; i < lambda; ++i) {
    const double x = i == 0 ? lower : lower + width * (static_cast<double>(i) + unit(rng)) / static_cast<double>(lambda);
    pop[i] = {std::min(x, upper), width};
  }

  EvolutionResult result;
  double best_f = kInf;
  int calls = 0;
  std::vector<double> f(lambda);
  const std::vector<double> phi(lambda, 0.0);
  const auto inside = [&](double x) { return x >= lower && x <= upper; };
  while (true) {
    for (std::size_t i = 0; i < lambda; ++i) {
      f[i] = objective.evaluate(pop[i].x).bic_s;
      if (f[i] < best_f || (f[i] == best_f && pop[i].x < result.best_x)) {
        best_f = f[i];
        result.best_x = pop[i].x;
      }
    }
    calls += static_cast<int>(lambda);
    ++result.generations;
    if (calls >= cfg.global_budget) break;

    const auto order = stochastic_rank(std::span<const double>(f), std::span<const double>(phi), kProbObjective, rng);
    std::vector<Individual> parents(mu);
    for (std::size_t i = 0; i < mu; ++i) parents[i] = pop[order[i]];

    const double global_step = normal(rng);
    for (std::size_t k = 0; k < lambda; ++k) {
      const std::size_t i = k % mu;
      Individual child = parents[i];
      bool placed = false;
      if (k + 1 < mu) {
        const double x = parents[i].x + kGamma * (parents[0].x - parents[i + 1].x);
        if (inside(x)) {
          child.x = x;
          placed = true;
        }
      }
      if (!placed) {
        const double sigma = parents[i].sigma * std::exp(tau_prime * global_step + tau * normal(rng));
        double x = parents[i].x;
        for (int attempt = 0; attempt < 10; ++attempt) {
          x = parents[i].x + sigma * normal(rng);
          if (inside(x)) break;
        }
        child.x = std::clamp(x, lower, upper);
        child.sigma = parents[i].sigma + kAlpha * (sigma - parents[i].sigma);
      }
      pop[k] = child;
    }
  }
  return result;
}

struct Vertex {
  double x;
  double f;
};

// One-dimensional Nelder-Mead on a two-point simplex, clamped to the box.
int nelder_mead(BandwidthObjective& objective, double start, double lower, double upper, const OptimizerConfig& cfg) {
  const double h = std::max(0.05 * (upper - lower), 1e-8);
  const double second = start + h <= upper ? start + h : std::max(lower, start - h);
  const auto eval = [&](double x) {
    x = std::clamp(x, lower, upper);
    return Vertex{x, objective.evaluate(x).bic_s};
  };
  Vertex best = eval(start);
  Vertex worst = eval(second);
  const auto order = [&] {
    if (worst.f < best.f || (worst.f == best.f && worst.x < best.x)) std::swap(best, worst);
  };
  order();
  int iter = 0;
  const double min_width = 1e-12 * std::max(1.0, upper);
  for (; iter < cfg.max_local_iter; ++iter) {
    if (std::abs(worst.f - best.f) < cfg.local_tol || std::abs(worst.x - best.x) < min_width) break;
    const double c = best.x;
    const Vertex reflected = eval(c + (c - worst.x));
    if (reflected.f < best.f) {
      const Vertex expanded = eval(c + 2.0 * (c - worst.x));
      worst = expanded.f < reflected.f ? expanded : reflected;
    } else {
      const bool outside = reflected.f < worst.f;
      const Vertex contracted = outside ? eval(c + 0.5 * (reflected.x - c)) : eval(c + 0.5 * (worst.x - c));
      const bool accept = outside ? contracted.f <= reflected.f : contracted.f < worst.f;
      worst = accept ? contracted : eval(best.x + 0.5 * (worst.x - best.x));
    }
    order();
  }
  return iter;
}

}  // namespace

OptimizationResult optimize_bandwidth(std::span<const CensoredInterval> data, const GriddedDensity& raw,
                                      const PenaltyBase& penalty, const OptimizerConfig& cfg) {
  validate(cfg);
  if (raw.size() < 3 || !(raw.total_mass > 0.0)) {
    throw Error(ErrorCode::kDegenerateDensity, "raw density needs >= 3 bins and positive mass");
  }
  if (data.empty()) throw Error(ErrorCode::kEmptyData, "bandwidth optimisation needs data");
  const double upper = cfg.upper.value_or(raw.grid_end() * raw.step);

  BandwidthObjective objective(data, raw, penalty);
  OptimizationResult out;
  out.upper = upper;
  out.baseline = objective.evaluate(0.0);
  if (upper > cfg.lower) {
    const auto global = evolve(objective, cfg.lower, upper, cfg);
    out.global_best = global.best_x;
    out.global_generations = global.generations;
    out.local_iterations = nelder_mead(objective, global.best_x, cfg.lower, upper, cfg);
  }
  out.report = objective.best();
  out.bandwidth = out.report.bandwidth;
  out.evaluations = objective.unique_evaluations();
  out.smoothed = objective.smooth(out.bandwidth);
  return out;
}

OptimizationResult optimize_bandwidth(std::span<const CensoredInterval> data, const GriddedDensity& raw,
                                      PenaltyKind kind, std::span<const int> m_counts,
                                      const OptimizerConfig& cfg) {
  const auto survival = npmle::grid_to_survival(raw);
  return optimize_bandwidth(data, raw, smoothing::resolve_penalty(kind, data, m_counts, &survival), cfg);
}

SmoothedFit smooth_step_estimate(std::span<const CensoredInterval> data, npmle::StepEstimate estimate,
                                 const core::TimeFrame& frame, std::span<const int> m_counts,
                                 const FitOptions& options) {
  SmoothedFit fit;
  auto grid = npmle::step_to_grid(estimate, frame, options.step);
  fit.estimate = std::move(estimate);
  fit.raw = std::move(grid.density);
  fit.step_too_coarse = grid.step_too_coarse;
  const auto survival = npmle::grid_to_survival(fit.raw);
  const auto penalty = smoothing::resolve_penalty(options.penalty, data, m_counts, &survival);
  if (options.fixed_bandwidth) {
    BandwidthObjective objective(data, fit.raw, penalty);
    fit.raw_report = objective.evaluate(0.0);
    fit.smoothed_report = objective.evaluate(*options.fixed_bandwidth);
    fit.smoothed = objective.smooth(fit.smoothed_report.bandwidth);
    return fit;
  }
  auto opt = optimize_bandwidth(data, fit.raw, penalty, options.optimizer);
  fit.raw_report = opt.baseline;
  fit.smoothed_report = opt.report;
  fit.smoothed = std::move(opt.smoothed);
  return fit;
}

SmoothedFit fit_turnbull(std::span<const CensoredInterval> data, const core::TimeFrame& frame,
                         std::span<const int> m_counts, const FitOptions& options) {
  auto estimate = npmle::turnbull_fit(data, frame, options.turnbull);
  return smooth_step_estimate(data, std::move(estimate), frame, m_counts, options);
}

}  // namespace sise::bandwidth
