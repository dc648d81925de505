#pragma once

#include <cstdint>
#include <random>

namespace hrmt {

/// Deterministic random stream addressed by (master_seed, stream_index).
/// Distinct pairs yield statistically independent sequences; equal pairs
/// reproduce the same sequence bit for bit. Gaussian variates come from an
/// explicit Box-Muller transform rather than std::normal_distribution, whose
/// algorithm is implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 significant bits.
  double uniform01();

  /// Uniform double in [a, b).
  double uniform(double a, double b);

  /// Standard normal variate, one per call.
  double gaussian();

  /// N(0, sigma^2) variate.
  double gaussian(double sigma) { return sigma * gaussian(); }

  /// Uniform integer in [0, bound), bound > 0. Rejection-sampled, unbiased.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 gen_;
  double cached_gaussian_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace hrmt
