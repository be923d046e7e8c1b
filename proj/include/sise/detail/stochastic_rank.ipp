#pragma once

#include <numeric>
#include <random>
#include <utility>

namespace sise::bandwidth {

template <class Rng>
std::vector<std::size_t> stochastic_rank(std::span<const double> f, std::span<const double> phi, double pf,
                                         Rng& rng) {
  std::vector<std::size_t> idx(f.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t sweep = 0; sweep < idx.size(); ++sweep) {
    bool swapped = false;
    for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
      const std::size_t a = idx[j];
      const std::size_t b = idx[j + 1];
      const double u = unit(rng);
      const bool by_objective = (phi[a] == 0.0 && phi[b] == 0.0) || u < pf;
      const bool out_of_order = by_objective ? f[a] > f[b] : phi[a] > phi[b];
      if (out_of_order) {
        std::swap(idx[j], idx[j + 1]);
        swapped = true;
      }
    }
    if (!swapped) break;
  }
  return idx;
}

}  // namespace sise::bandwidth
