#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace sise {

/// Seed for stream `stream` of replicate `replicate`, mixed with SplitMix64 so
/// neighbouring replicates get unrelated generators.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replicate, std::uint64_t stream) noexcept;

/// Worker count: `requested` if positive, else SISE_THREADS, else the hardware
/// concurrency (at least 1).
std::size_t resolve_threads(int requested = 0);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Bodies write to
/// their own slot, so the outcome does not depend on scheduling. The first
/// exception thrown is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace sise
