#pragma once

#include <cstdint>
#include <random>

namespace synql {

/// Seedable random stream with a fixed, platform-independent output sequence.
///
/// The engine is std::mt19937_64, whose sequence is pinned by the standard.
/// The std distributions are implementation-defined, so all bounded draws are
/// done here. Query i of a workload uses for_query(seed, i), which makes each
/// query independent of the others and of evaluation order.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  static RandomStream for_query(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, bound). bound must be > 0.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// Uniform in [lo, hi], inclusive on both ends.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01();

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace synql
