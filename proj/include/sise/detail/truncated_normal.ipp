#pragma once

#include <random>

namespace sise::simbench {

template <class Rng>
std::optional<double> truncated_normal(Rng& rng, double mean, double sd, double lo, double hi, int max_tries) {
  std::normal_distribution<double> normal(mean, sd);
  for (int i = 0; i < max_tries; ++i) {
    const double x = normal(rng);
    if (x > lo && x < hi) return x;
  }
  return std::nullopt;
}

}  // namespace sise::simbench
