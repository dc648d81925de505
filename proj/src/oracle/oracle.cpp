#include "hrmt/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <lapacke.h>

namespace hrmt::oracle {

namespace {

/// Blocks of the r-th dyadic partition of {1..2^n}, built literally.
std::vector<std::vector<std::uint64_t>> partition_blocks(unsigned n,
                                                         unsigned r) {
  const std::uint64_t size = std::uint64_t{1} << n;
  const std::uint64_t block = std::uint64_t{1} << r;
  std::vector<std::vector<std::uint64_t>> blocks;
  for (std::uint64_t start = 1; start <= size; start += block) {
    std::vector<std::uint64_t> members;
    for (std::uint64_t idx = start; idx < start + block; ++idx) {
      members.push_back(idx);
    }
    blocks.push_back(std::move(members));
  }
  return blocks;
}

bool co_blocked(const std::vector<std::vector<std::uint64_t>>& blocks,
                std::uint64_t x, std::uint64_t y) {
  for (const auto& members : blocks) {
    const bool has_x =
        std::find(members.begin(), members.end(), x) != members.end();
    const bool has_y =
        std::find(members.begin(), members.end(), y) != members.end();
    if (has_x && has_y) return true;
    if (has_x || has_y) return false;  // partitions: x and y each in one block
  }
  return false;
}

/// Naive dense complex matrix-vector product.
std::vector<std::complex<double>> matvec(
    const std::vector<std::complex<double>>& mat, std::uint64_t N,
    const std::vector<std::complex<double>>& v) {
  std::vector<std::complex<double>> out(N, 0.0);
  for (std::uint64_t i = 0; i < N; ++i) {
    for (std::uint64_t j = 0; j < N; ++j) {
      out[i] += mat[i * N + j] * v[j];
    }
  }
  return out;
}

/// Gauss-Jordan inverse with partial pivoting.
std::vector<std::complex<double>> invert(
    std::vector<std::complex<double>> a, std::uint64_t N) {
  std::vector<std::complex<double>> inv(N * N, 0.0);
  for (std::uint64_t i = 0; i < N; ++i) inv[i * N + i] = 1.0;
  for (std::uint64_t col = 0; col < N; ++col) {
    std::uint64_t pivot = col;
    for (std::uint64_t row = col + 1; row < N; ++row) {
      if (std::abs(a[row * N + col]) > std::abs(a[pivot * N + col])) {
        pivot = row;
      }
    }
    if (std::abs(a[pivot * N + col]) == 0.0) {
      throw std::runtime_error("oracle invert: singular matrix");
    }
    if (pivot != col) {
      for (std::uint64_t j = 0; j < N; ++j) {
        std::swap(a[pivot * N + j], a[col * N + j]);
        std::swap(inv[pivot * N + j], inv[col * N + j]);
      }
    }
    const std::complex<double> lead = a[col * N + col];
    for (std::uint64_t j = 0; j < N; ++j) {
      a[col * N + j] /= lead;
      inv[col * N + j] /= lead;
    }
    for (std::uint64_t row = 0; row < N; ++row) {
      if (row == col) continue;
      const std::complex<double> factor = a[row * N + col];
      if (factor == 0.0) continue;
      for (std::uint64_t j = 0; j < N; ++j) {
        a[row * N + j] -= factor * a[col * N + j];
        inv[row * N + j] -= factor * inv[col * N + j];
      }
    }
  }
  return inv;
}

void append_spacing_ratios(const std::vector<double>& points, std::size_t lo,
                           std::size_t hi, std::vector<double>& ratios) {
  for (std::size_t i = lo; i + 2 < hi; ++i) {
    const double s0 = points[i + 1] - points[i];
    const double s1 = points[i + 2] - points[i + 1];
    const double mx = std::max(s0, s1);
    ratios.push_back(mx == 0.0 ? 1.0 : std::min(s0, s1) / mx);
  }
}

}  // namespace

unsigned partition_distance(unsigned n, std::uint64_t x, std::uint64_t y) {
  if (n > 8) throw std::invalid_argument("partition oracle: n > 8");
  const std::uint64_t size = std::uint64_t{1} << n;
  if (x < 1 || x > size || y < 1 || y > size) {
    throw std::invalid_argument("partition oracle: index out of range");
  }
  for (unsigned r = 0; r <= n; ++r) {
    if (co_blocked(partition_blocks(n, r), x, y)) return r;
  }
  throw std::logic_error("partition oracle: P_n must co-block everything");
}

std::pair<double, double> eig2(double a, double b, double d) {
  const double mid = (a + d) / 2.0;
  const double rad = std::sqrt((a - d) * (a - d) / 4.0 + b * b);
  return {mid - rad, mid + rad};
}

double reference_gap_ratio(GapLaw law, std::uint64_t samples,
                           std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<double> ratios;
  ratios.reserve(samples);

  switch (law) {
    case GapLaw::EquallySpaced: {
      std::vector<double> points(samples + 2);
      for (std::size_t i = 0; i < points.size(); ++i) {
        points[i] = 0.25 * static_cast<double>(i);
      }
      append_spacing_ratios(points, 0, points.size(), ratios);
      break;
    }
    case GapLaw::ExponentialGaps: {
      std::exponential_distribution<double> exp1(1.0);
      double prev = exp1(gen);
      for (std::uint64_t i = 0; i < samples; ++i) {
        const double next = exp1(gen);
        const double mx = std::max(prev, next);
        ratios.push_back(mx == 0.0 ? 1.0 : std::min(prev, next) / mx);
        prev = next;
      }
      break;
    }
    case GapLaw::GoeSmall: {
      constexpr lapack_int kN = 512;
      std::normal_distribution<double> normal(0.0, 1.0);
      const double sd_off = std::sqrt(1.0 / static_cast<double>(kN));
      const double sd_diag = std::sqrt(2.0 / static_cast<double>(kN));
      std::vector<double> a(static_cast<std::size_t>(kN) * kN);
      std::vector<double> w(kN);
      while (ratios.size() < samples) {
        for (lapack_int i = 0; i < kN; ++i) {
          for (lapack_int j = i; j < kN; ++j) {
            const double v = (i == j ? sd_diag : sd_off) * normal(gen);
            a[static_cast<std::size_t>(i) * kN + j] = v;
            a[static_cast<std::size_t>(j) * kN + i] = v;
          }
        }
        // QR-iteration routine, deliberately not the divide-and-conquer one
        // used by the primary path.
        const lapack_int info = LAPACKE_dsyev(LAPACK_ROW_MAJOR, 'N', 'U', kN,
                                              a.data(), kN, w.data());
        if (info != 0) {
          throw std::runtime_error("oracle gap ratio: dsyev failed");
        }
        std::vector<double> bulk(w.begin() + (2 * kN) / 5,
                                 w.begin() + (3 * kN) / 5);
        append_spacing_ratios(bulk, 0, bulk.size(), ratios);
      }
      ratios.resize(samples);
      break;
    }
  }

  double sum = 0.0;
  for (const double r : ratios) sum += r;
  return sum / static_cast<double>(ratios.size());
}

std::vector<double> variance_profile_termwise(unsigned n, double c,
                                              bool normalized) {
  const std::uint64_t N = std::uint64_t{1} << n;
  double z_sq = 0.0;
  for (unsigned r = 0; r <= n; ++r) {
    z_sq += std::pow(2.0, -(1.0 + c) * r) * (1.0 + std::pow(2.0, -double(r)));
  }
  const double pref = normalized ? 1.0 / z_sq : 1.0;

  std::vector<double> sigma(N * N, 0.0);
  for (std::uint64_t x = 1; x <= N; ++x) {
    for (std::uint64_t y = 1; y <= N; ++y) {
      double total = 0.0;
      for (unsigned r = 0; r <= n; ++r) {
        const std::uint64_t block = std::uint64_t{1} << r;
        const std::uint64_t bx = (x + block - 1) / block;  // ceil(x / 2^r)
        const std::uint64_t by = (y + block - 1) / block;
        double level_var = 0.0;
        if (x == y) {
          level_var = 2.0 * std::pow(2.0, -double(r));
        } else if (bx == by) {
          level_var = std::pow(2.0, -double(r));
        }
        total += std::pow(2.0, -(1.0 + c) * r) * level_var;
      }
      sigma[(x - 1) * N + (y - 1)] = pref * total;
    }
  }
  return sigma;
}

std::complex<double> drift_pair_sum(const std::vector<double>& entries,
                                    std::uint64_t N, std::complex<double> z,
                                    std::uint64_t x, std::uint64_t y) {
  std::vector<std::complex<double>> a(N * N);
  for (std::uint64_t i = 0; i < N; ++i) {
    for (std::uint64_t j = 0; j < N; ++j) {
      a[i * N + j] = entries[i * N + j] - (i == j ? z : 0.0);
    }
  }
  const std::vector<std::complex<double>> r = invert(std::move(a), N);

  std::vector<std::complex<double>> ex(N, 0.0);
  ex[x - 1] = 1.0;
  const std::vector<std::complex<double>> w1 = matvec(r, N, ex);

  std::complex<double> sum = 0.0;
  std::vector<std::complex<double>> p(N * N);
  for (std::uint64_t u = 0; u < N; ++u) {
    for (std::uint64_t v = u; v < N; ++v) {
      std::fill(p.begin(), p.end(), std::complex<double>(0.0));
      const double norm = 1.0 / std::sqrt(u == v ? 2.0 : 1.0);
      p[u * N + v] += norm;
      p[v * N + u] += norm;
      const auto w2 = matvec(p, N, w1);
      const auto w3 = matvec(r, N, w2);
      const auto w4 = matvec(p, N, w3);
      const auto w5 = matvec(r, N, w4);
      sum += w5[y - 1];
    }
  }
  return sum / static_cast<double>(N);
}

std::vector<std::uint64_t> poisson_counts(double lambda, std::uint64_t count,
                                          std::uint64_t seed) {
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument("poisson oracle: lambda must be >= 0");
  }
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double limit = std::exp(-lambda);
  std::vector<std::uint64_t> out(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= unif(gen);
    } while (p > limit);
    out[i] = k - 1;
  }
  return out;
}

}  // namespace hrmt::oracle
