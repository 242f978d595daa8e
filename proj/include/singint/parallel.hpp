#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>

namespace singint {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream, shard). Results depend only on these three values.
Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t shard = 0);

/// Worker count from SINGINT_WORKERS, else hardware concurrency (at least 1).
int worker_count();

/// Runs fn(shard) for shard in [0, n_shards) on worker_count() threads. Shard results must be
/// written to per-shard slots and reduced by the caller in shard order; that keeps outputs
/// identical for any worker count.
void parallel_shards(int n_shards, const std::function<void(int)>& fn);

/// Fixed shard count used by the Monte Carlo estimators.
inline constexpr int kDefaultShards = 32;

/// Splits n items into n_shards contiguous ranges; returns [begin, end) of `shard`.
std::pair<std::int64_t, std::int64_t> shard_range(std::int64_t n, int n_shards, int shard);

/// Uniform point on the unit sphere S^{n-1} written into out (size n).
void uniform_on_sphere(Rng& rng, std::span<double> out);

}  // namespace singint
