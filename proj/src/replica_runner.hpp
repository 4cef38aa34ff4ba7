#ifndef RUNTUMBLE_SRC_REPLICA_RUNNER_HPP
#define RUNTUMBLE_SRC_REPLICA_RUNNER_HPP

#include <cstdint>
#include <thread>
#include <vector>

#include "runtumble/rng.hpp"
#include "runtumble/stats.hpp"

namespace rtp::detail {

/// Runs `fill(replica, rng, batch)` for replicas 0..n-1, each with its own
/// (seed, replica) random stream. Work is split by whole batches, so every
/// batch is filled by exactly one worker in replica order and the merged
/// result is bit-identical for any thread count.
template <typename Fill>
ReplicaStats run_replicas(int dimension, int n_tilts, long n,
                          std::uint64_t seed, int threads, const Fill& fill) {
  const int n_batches = ReplicaStats::default_batches(n);
  ReplicaStats stats = ReplicaStats::create(dimension, n_tilts, n_batches);
  stats.total = n;

  auto run_batch = [&](BatchStats& batch, int b) {
    const long lo = (static_cast<long>(b) * n + n_batches - 1) / n_batches;
    const long hi =
        ((static_cast<long>(b) + 1) * n + n_batches - 1) / n_batches;
    for (long i = lo; i < hi; ++i) {
      Pcg64 rng(seed, static_cast<std::uint64_t>(i));
      fill(i, rng, batch);
      ++batch.count;
    }
  };

  if (threads <= 1) {
    for (int b = 0; b < n_batches; ++b) run_batch(stats.batches[b], b);
    return stats;
  }

  std::vector<ReplicaStats> partial(
      threads, ReplicaStats::create(dimension, n_tilts, n_batches));
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (int b = w; b < n_batches; b += threads)
        run_batch(partial[w].batches[b], b);
    });
  }
  for (auto& t : pool) t.join();
  for (auto& p : partial) {
    p.total = 0;
    stats.merge(p);
  }
  stats.total = n;
  return stats;
}

}  // namespace rtp::detail

#endif
