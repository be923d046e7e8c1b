#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sise/bandwidth.hpp"
#include "sise/error.hpp"
#include "sise/runtime.hpp"
#include "sise/simbench.hpp"

using namespace sise;
using core::CensoredInterval;
using smoothing::PenaltyKind;

namespace {

struct Problem {
  std::vector<CensoredInterval> data;
  std::vector<int> m_counts;
  npmle::GriddedDensity raw;
  smoothing::PenaltyBase penalty;
};

Problem figure_one(std::uint64_t seed) {
  simbench::ScenarioConfig cfg;
  const auto cohort = simbench::simulate_cohort(cfg, seed);
  const auto frame = cohort.fit_frame(cfg);
  Problem p{cohort.intervals, cohort.m_counts, {}, {}};
  p.raw = npmle::step_to_grid(npmle::turnbull_fit(p.data, frame), frame, 0.01).density;
  const auto s = npmle::grid_to_survival(p.raw);
  p.penalty = smoothing::resolve_penalty(PenaltyKind::kEquivalentSampleSize, p.data, p.m_counts, &s);
  return p;
}

}  // namespace

TEST_CASE("stochastic_rank sorts feasible candidates by objective") {
  std::mt19937_64 rng(1);
  const std::vector<double> f{5, 1, 4, 2, 3};
  const std::vector<double> phi(5, 0.0);
  const auto order = bandwidth::stochastic_rank(std::span<const double>(f), std::span<const double>(phi), 0.45, rng);
  CHECK(order == std::vector<std::size_t>{1, 3, 4, 2, 0});
}

TEST_CASE("stochastic_rank with pf = 0 orders infeasible candidates by violation") {
  std::mt19937_64 rng(1);
  const std::vector<double> f{1, 2, 3};
  const std::vector<double> phi{3, 1, 2};
  const auto order = bandwidth::stochastic_rank(std::span<const double>(f), std::span<const double>(phi), 0.0, rng);
  CHECK(order == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("optimizer config validation") {
  bandwidth::OptimizerConfig c;
  CHECK_NOTHROW(bandwidth::validate(c));
  c.upper = -1.0;
  CHECK_THROWS_AS(bandwidth::validate(c), Error);
  c.upper.reset();
  c.global_budget = 0;
  CHECK_THROWS_AS(bandwidth::validate(c), Error);
}

TEST_CASE("objective memo returns identical reports") {
  auto p = figure_one(3);
  bandwidth::BandwidthObjective obj(p.data, p.raw, p.penalty);
  const auto first = obj.evaluate(0.37);
  const auto again = obj.evaluate(0.37 + 1e-12);  // same 1e-10 cell
  CHECK(obj.unique_evaluations() == 1);
  CHECK(first.bic_s == again.bic_s);
  CHECK(first.bic_s == -2.0 * first.log_likelihood + first.turning_points * first.penalty_weight);
}

TEST_CASE("optimize_bandwidth never does worse than d = 0 and beats a 200-point grid") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    auto p = figure_one(derive_seed(42, s, 0));
    bandwidth::OptimizerConfig cfg;
    cfg.seed = s;
    const auto r = bandwidth::optimize_bandwidth(p.data, p.raw, p.penalty, cfg);
    CHECK(r.report.bic_s <= r.baseline.bic_s);
    CHECK(r.bandwidth >= 0.0);
    CHECK(r.bandwidth <= r.upper);
    CHECK(r.upper == doctest::Approx(p.raw.grid_end() * p.raw.step));
    bandwidth::BandwidthObjective grid(p.data, p.raw, p.penalty);
    double best = kInf;
    for (int i = 0; i < 200; ++i) best = std::min(best, grid.evaluate(r.upper * i / 199.0).bic_s);
    CHECK(r.report.bic_s <= best + 1e-2);
  }
}

TEST_CASE("optimize_bandwidth is deterministic given the seed") {
  auto p = figure_one(7);
  bandwidth::OptimizerConfig cfg;
  cfg.seed = 99;
  const auto a = bandwidth::optimize_bandwidth(p.data, p.raw, p.penalty, cfg);
  const auto b = bandwidth::optimize_bandwidth(p.data, p.raw, p.penalty, cfg);
  CHECK(a.bandwidth == b.bandwidth);
  CHECK(a.report.bic_s == b.report.bic_s);
  CHECK(a.smoothed.values == b.smoothed.values);
}

TEST_CASE("forcing upper = 0 returns the raw fit") {
  auto p = figure_one(11);
  bandwidth::OptimizerConfig cfg;
  cfg.upper = 0.0;
  const auto r = bandwidth::optimize_bandwidth(p.data, p.raw, p.penalty, cfg);
  CHECK(r.bandwidth == 0.0);
  CHECK(r.report.bic_s == r.baseline.bic_s);
  CHECK(r.smoothed.values == p.raw.values);
}

TEST_CASE("monotone raw density keeps a zero-complexity optimum") {
  // Decreasing density on (0, 10) and exact data spread across it.
  npmle::GriddedDensity g;
  g.step = 0.01;
  g.values.resize(1000);
  double sum = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) sum += g.values[j] = 2.0 - 0.0015 * static_cast<double>(j);
  g.total_mass = sum * g.step;
  std::vector<CensoredInterval> data;
  for (int i = 0; i < 50; ++i) data.push_back({0.1 + 0.19 * i, 0.1 + 0.19 * i + 0.5});
  const auto s = npmle::grid_to_survival(g);
  const auto base = smoothing::resolve_penalty(PenaltyKind::kSampleSize, data, {}, &s);
  const auto r = bandwidth::optimize_bandwidth(data, g, base);
  CHECK(r.baseline.turning_points == 0);
  CHECK(r.report.bic_s <= r.baseline.bic_s);
  CHECK(r.baseline.bic_s - r.report.bic_s <= 1e-2);
}

TEST_CASE("optimize_bandwidth rejects degenerate input") {
  npmle::GriddedDensity g;
  g.values = {1.0, 2.0};
  g.total_mass = 0.03;
  const std::vector<CensoredInterval> data{{0, 0.01}};
  smoothing::PenaltyBase base;
  try {
    bandwidth::optimize_bandwidth(data, g, base);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateDensity);
  }
}

TEST_CASE("fit_turnbull with a fixed bandwidth skips the search") {
  simbench::ScenarioConfig cfg;
  const auto cohort = simbench::simulate_cohort(cfg, 5);
  bandwidth::FitOptions opt;
  opt.fixed_bandwidth = 0.5;
  const auto fit = bandwidth::fit_turnbull(cohort.intervals, cohort.fit_frame(cfg), cohort.m_counts, opt);
  CHECK(fit.smoothed_report.bandwidth == doctest::Approx(0.5));
  CHECK(fit.smoothed.bandwidth == doctest::Approx(0.5));
  CHECK(fit.raw_report.bandwidth == 0.0);
}
