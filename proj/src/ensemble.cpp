#include "hrmt/ensemble.hpp"

#include <cmath>
#include <numbers>

#include "hrmt/errors.hpp"

namespace hrmt {

namespace {

constexpr unsigned kMaxDepth = 14;  // dense storage; 2^14 x 2^14 doubles

/// Adds weight * (one GOE block of side K at row/column offset `base`) into a
/// row-major N x N buffer. The block's entry variance before weighting is
/// var_off * (1 + delta_ij). Draw order is fixed: upper triangle, row-major,
/// diagonal included; each independent entry is drawn once and mirrored so
/// the buffer stays exactly symmetric.
void add_goe_block(std::vector<double>& entries, std::uint64_t N,
                   std::uint64_t base, std::uint64_t K, double var_off,
                   double weight, RngStream& rng) {
  const double sd_off = std::sqrt(var_off);
  const double sd_diag = std::sqrt(2.0 * var_off);
  for (std::uint64_t i = 0; i < K; ++i) {
    for (std::uint64_t j = i; j < K; ++j) {
      const double sd = (i == j) ? sd_diag : sd_off;
      const double v = weight * sd * rng.gaussian();
      entries[(base + i) * N + (base + j)] += v;
      if (i != j) entries[(base + j) * N + (base + i)] += v;
    }
  }
}

/// Adds weight * Phi_{n,r} into the buffer: 2^(n-r) GOE blocks of side 2^r
/// with entry variance 2^(-r) * (1 + delta), blocks visited in increasing
/// order of their offset.
void add_phi_scaled(std::vector<double>& entries, unsigned n, unsigned r,
                    double weight, RngStream& rng) {
  const std::uint64_t N = std::uint64_t{1} << n;
  const std::uint64_t K = std::uint64_t{1} << r;
  const double var_off = std::exp2(-static_cast<double>(r));
  for (std::uint64_t base = 0; base < N; base += K) {
    add_goe_block(entries, N, base, K, var_off, weight, rng);
  }
}

/// Suffix sums tail[d] = sum_{r=d}^{n} 2^{-(2+c) r} of the squared coupling
/// weights, accumulated from the far end so small terms add first.
std::vector<double> coupling_tails(unsigned n, double c) {
  std::vector<double> tail(n + 2, 0.0);
  for (unsigned d = n + 1; d-- > 0;) {
    const double term =
        (d <= n) ? std::exp2(-(2.0 + c) * static_cast<double>(d)) : 0.0;
    tail[d] = tail[d + 1] + term;
  }
  tail.pop_back();
  return tail;
}

double z_squared(unsigned n, double c) {
  double sum = 0.0;
  for (unsigned r = n + 1; r-- > 0;) {
    const double rr = static_cast<double>(r);
    sum += std::exp2(-(1.0 + c) * rr) * (1.0 + std::exp2(-rr));
  }
  return sum;
}

}  // namespace

double PotentialSpec::density_bound() const {
  if (kind == Kind::Uniform) return 1.0 / (2.0 * param);
  return 1.0 / (param * std::sqrt(2.0 * std::numbers::pi));
}

double PotentialSpec::sample(RngStream& rng) const {
  if (kind == Kind::Uniform) return rng.uniform(-param, param);
  return rng.gaussian(param);
}

std::string PotentialSpec::name() const {
  return kind == Kind::Uniform ? "uniform" : "gaussian";
}

std::string model_name(Model model) {
  switch (model) {
    case Model::Ultrametric: return "ultrametric";
    case Model::Truncated: return "truncated";
    case Model::RosenzweigPorter: return "rosenzweig_porter";
  }
  return "unknown";
}

std::vector<std::string> EnsembleConfig::validate_all() const {
  std::vector<std::string> problems;
  if (n > kMaxDepth) {
    problems.push_back("n: hierarchy depth " + std::to_string(n) +
                       " exceeds dense-storage limit " +
                       std::to_string(kMaxDepth));
  }
  if (!std::isfinite(c)) {
    problems.push_back("c: coupling exponent must be finite");
  }
  if (model == Model::Truncated) {
    if (m > n) {
      problems.push_back("m: truncation level " + std::to_string(m) +
                         " exceeds depth n = " + std::to_string(n));
    }
    if (normalized) {
      problems.push_back("normalized: the truncated model is never divided "
                         "by Z");
    }
  }
  if (model == Model::RosenzweigPorter) {
    if (normalized) {
      problems.push_back("normalized: not applicable to rosenzweig_porter");
    }
    if (!(t >= 0.0) || !std::isfinite(t)) {
      problems.push_back("t: interpolation time must be finite and >= 0");
    }
    if (!(potential.param > 0.0) || !std::isfinite(potential.param)) {
      problems.push_back("potential: width parameter must be finite and > 0");
    }
  }
  return problems;
}

void EnsembleConfig::validate() const {
  const std::vector<std::string> problems = validate_all();
  if (!problems.empty()) throw DomainError(problems.front());
}

double normalization_Z(unsigned n, double c) {
  return std::sqrt(z_squared(n, c));
}

Hamiltonian sample_phi(const IndexSpace& space, unsigned r, RngStream& rng) {
  if (r > space.depth()) {
    throw DomainError("r: block level " + std::to_string(r) +
                      " exceeds depth n = " + std::to_string(space.depth()));
  }
  Hamiltonian h;
  h.size = space.size();
  h.entries.assign(h.size * h.size, 0.0);
  h.config.model = Model::Ultrametric;
  h.config.n = space.depth();
  h.config.normalized = false;
  h.master_seed = rng.master_seed();
  h.stream_index = rng.stream_index();
  add_phi_scaled(h.entries, space.depth(), r, 1.0, rng);
  return h;
}

Hamiltonian assemble(const EnsembleConfig& config, RngStream& rng) {
  config.validate();
  Hamiltonian h;
  h.size = config.size();
  h.entries.assign(h.size * h.size, 0.0);
  h.config = config;
  h.master_seed = rng.master_seed();
  h.stream_index = rng.stream_index();

  switch (config.model) {
    case Model::Ultrametric: {
      const double z = config.normalized ? normalization_Z(config.n, config.c)
                                         : 1.0;
      for (unsigned r = 0; r <= config.n; ++r) {
        const double w =
            std::exp2(-0.5 * (1.0 + config.c) * static_cast<double>(r)) / z;
        add_phi_scaled(h.entries, config.n, r, w, rng);
      }
      break;
    }
    case Model::Truncated: {
      for (unsigned r = 0; r <= config.m; ++r) {
        const double w =
            std::exp2(-0.5 * (1.0 + config.c) * static_cast<double>(r));
        add_phi_scaled(h.entries, config.n, r, w, rng);
      }
      break;
    }
    case Model::RosenzweigPorter: {
      for (std::uint64_t x = 0; x < h.size; ++x) {
        h.entries[x * h.size + x] = config.potential.sample(rng);
      }
      if (config.t > 0.0) {
        // GOE perturbation with entry variance (1 + delta_xy)/N is exactly
        // Phi_{n,n}; t == 0 skips the draw so the matrix stays diagonal
        // without signed zeros.
        add_phi_scaled(h.entries, config.n, config.n, std::sqrt(config.t),
                       rng);
      }
      break;
    }
  }
  return h;
}

std::vector<double> variance_profile(unsigned n, double c, bool normalized) {
  if (n > kMaxDepth) {
    throw DomainError("n: hierarchy depth " + std::to_string(n) +
                      " exceeds dense-storage limit " +
                      std::to_string(kMaxDepth));
  }
  const IndexSpace space(n);
  const std::vector<double> tail = coupling_tails(n, c);
  const double pref = normalized ? 1.0 / z_squared(n, c) : 1.0;
  const std::uint64_t N = space.size();
  std::vector<double> sigma(N * N);
  for (std::uint64_t x = 1; x <= N; ++x) {
    for (std::uint64_t y = x; y <= N; ++y) {
      const unsigned d = space.distance(x, y);
      const double value = (d == 0) ? 2.0 * pref * tail[0] : pref * tail[d];
      sigma[(x - 1) * N + (y - 1)] = value;
      sigma[(y - 1) * N + (x - 1)] = value;
    }
  }
  return sigma;
}

double spread_M(unsigned n, double c) {
  const std::vector<double> tail = coupling_tails(n, c);
  const double pref = 1.0 / z_squared(n, c);
  double max_entry = 2.0 * pref * tail[0];
  for (unsigned d = 1; d <= n; ++d) {
    max_entry = std::max(max_entry, pref * tail[d]);
  }
  return 1.0 / max_entry;
}

}  // namespace hrmt
