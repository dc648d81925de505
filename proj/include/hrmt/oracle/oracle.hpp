#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hrmt::oracle {

/// Brute-force oracles used by tests. Every function here is written in the
/// slowest, most literal formulation available and shares no code with the
/// primary implementations it checks.

/// Minimal r such that x and y lie in a common block of the r-th dyadic
/// partition, found by literally building the partitions P_0..P_n as block
/// lists. Exhaustive scale only (n <= 8).
unsigned partition_distance(unsigned n, std::uint64_t x, std::uint64_t y);

/// Closed-form eigenvalues of [[a, b], [b, d]], ascending.
std::pair<double, double> eig2(double a, double b, double d);

enum class GapLaw { ExponentialGaps, GoeSmall, EquallySpaced };

/// Monte Carlo mean consecutive-spacing ratio of a reference point process:
/// i.i.d. exponential gaps (-> 2 ln 2 - 1), small-GOE bulk (N=512, -> about
/// 0.5307), or an arithmetic progression (-> 1 exactly). `samples` is the
/// number of ratio draws to average (>= 10^4 for the quoted precisions).
double reference_gap_ratio(GapLaw law, std::uint64_t samples,
                           std::uint64_t seed);

/// Entry-variance matrix assembled term by term from the model definition:
/// for each level r the literal per-block variance contribution, using the
/// co-block test ceil(x/2^r) == ceil(y/2^r) rather than the bit trick.
std::vector<double> variance_profile_termwise(unsigned n, double c,
                                              bool normalized);

/// (1/N) sum_{u<=v} <delta_y, R P_uv R P_uv R delta_x> evaluated by building
/// every P_uv as a dense matrix, inverting (H - z) by Gauss-Jordan
/// elimination, and chaining naive matrix-vector products.
std::complex<double> drift_pair_sum(const std::vector<double>& entries,
                                    std::uint64_t N, std::complex<double> z,
                                    std::uint64_t x, std::uint64_t y);

/// Reference Poisson(lambda) counts via Knuth multiplication.
std::vector<std::uint64_t> poisson_counts(double lambda, std::uint64_t count,
                                          std::uint64_t seed);

/// Echo record for the debug CLI.
struct OracleResult {
  std::string name;
  std::string inputs;
  std::string values;
  std::string method;
};

}  // namespace hrmt::oracle
