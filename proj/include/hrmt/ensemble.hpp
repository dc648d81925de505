#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hrmt/index_space.hpp"
#include "hrmt/rng.hpp"

namespace hrmt {

/// Law of the random diagonal potential V(x), together with the uniform
/// bound on its density.
struct PotentialSpec {
  enum class Kind { Uniform, Gaussian };

  Kind kind = Kind::Uniform;
  /// Halfwidth for Uniform, sigma for Gaussian.
  double param = 1.0;

  /// Density sup: 1/(2*halfwidth) for Uniform, 1/(sigma*sqrt(2*pi)) for
  /// Gaussian.
  double density_bound() const;

  double sample(RngStream& rng) const;

  std::string name() const;
};

enum class Model { Ultrametric, Truncated, RosenzweigPorter };

std::string model_name(Model model);

/// Full description of one random-matrix law. N = 2^n throughout.
struct EnsembleConfig {
  Model model = Model::Ultrametric;
  unsigned n = 0;
  double c = 1.0;
  /// Divide by Z_{n,c} (Ultrametric only; Truncated is never normalized).
  bool normalized = true;
  /// Truncation level, 0 <= m <= n (Truncated only).
  unsigned m = 0;
  /// Interpolation time (RosenzweigPorter only), t >= 0.
  double t = 0.0;
  PotentialSpec potential{};

  std::uint64_t size() const { return std::uint64_t{1} << n; }

  /// Throws DomainError naming the first offending field.
  void validate() const;
  /// Every violation at once, one message per offending field.
  std::vector<std::string> validate_all() const;
};

/// One dense real symmetric realization. entries[x*N + y] == entries[y*N + x]
/// exactly: each independent entry is drawn once and mirrored.
struct Hamiltonian {
  std::uint64_t size = 0;
  std::vector<double> entries;  // row-major, size*size
  EnsembleConfig config;
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  double operator()(std::uint64_t i, std::uint64_t j) const {
    return entries[i * size + j];
  }
  double& operator()(std::uint64_t i, std::uint64_t j) {
    return entries[i * size + j];
  }
  /// 1-based accessor matching the index-space convention.
  double at1(std::uint64_t x, std::uint64_t y) const {
    return entries[(x - 1) * size + (y - 1)];
  }
};

/// Z_{n,c} = sqrt( sum_{r=0}^{n} 2^{-(1+c)r} (1 + 2^{-r}) ), the exact
/// finite sum that makes every row of the variance matrix of H_n sum to 1.
double normalization_Z(unsigned n, double c);

/// Block-diagonal direct sum of 2^(n-r) independent GOE blocks of size 2^r:
/// entry variance 2^(-r) * (2 on the diagonal, 1 for 1 <= d(x,y) <= r, 0
/// beyond).
Hamiltonian sample_phi(const IndexSpace& space, unsigned r, RngStream& rng);

/// Sample one realization of the configured model.
///  - Ultrametric: (1/Z) sum_r 2^{-(1+c)r/2} Phi_{n,r} (Z omitted when
///    normalized == false).
///  - Truncated: the same sum stopped at r = m, never normalized.
///  - RosenzweigPorter: diag(V) + sqrt(t) * GOE with entry variance
///    (1 + delta_xy)/N.
Hamiltonian assemble(const EnsembleConfig& config, RngStream& rng);

/// Closed-form entry-variance matrix Sigma_n(x,y) = E|H_n(x,y)|^2.
std::vector<double> variance_profile(unsigned n, double c, bool normalized);

/// Spread M_n = 1 / max_{x,y} Sigma_n(x,y) of the normalized ensemble.
double spread_M(unsigned n, double c);

}  // namespace hrmt
