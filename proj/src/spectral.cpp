#include "hrmt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include <cblas.h>
#include <lapacke.h>

#include "hrmt/errors.hpp"
#include "hrmt/simd/kernels.hpp"

extern "C" void openblas_set_num_threads(int);

namespace hrmt {

void pin_blas_single_thread() {
  static std::once_flag flag;
  std::call_once(flag, [] { openblas_set_num_threads(1); });
}

namespace {

void require_eta(ComplexEnergy z) {
  if (!(z.eta > 0.0) || !std::isfinite(z.eta) || !std::isfinite(z.E)) {
    throw DomainError("eta: energy must satisfy eta > 0 and be finite");
  }
}

void require_site(const SpectralData& sd, std::uint64_t x) {
  if (x < 1 || x > sd.size) {
    throw DomainError("x: site index " + std::to_string(x) +
                      " outside 1.." + std::to_string(sd.size));
  }
}

void check_input(const Hamiltonian& h) {
  const std::uint64_t N = h.size;
  if (N == 0 || h.entries.size() != N * N) {
    throw DomainError("H: entry buffer does not match the stated size");
  }
  for (std::uint64_t i = 0; i < N; ++i) {
    for (std::uint64_t j = i; j < N; ++j) {
      const double a = h.entries[i * N + j];
      if (!std::isfinite(a)) {
        throw DomainError("H: non-finite entry at (" + std::to_string(i + 1) +
                          "," + std::to_string(j + 1) + ")");
      }
      if (a != h.entries[j * N + i]) {
        throw DomainError("H: asymmetric entry at (" + std::to_string(i + 1) +
                          "," + std::to_string(j + 1) + ")");
      }
    }
  }
}

SpectralData decompose_impl(const Hamiltonian& h, bool want_vectors) {
  pin_blas_single_thread();
  check_input(h);
  SpectralData sd;
  sd.size = h.size;
  sd.master_seed = h.master_seed;
  sd.stream_index = h.stream_index;
  sd.eigenvalues.resize(h.size);

  const auto n = static_cast<lapack_int>(h.size);
  // The matrix is exactly symmetric, so handing the row-major buffer to a
  // column-major routine is a no-op transpose.
  std::vector<double> a = h.entries;
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'L', n,
                     a.data(), n, sd.eigenvalues.data());
  if (info != 0) {
    throw SolverError("symmetric eigensolver did not converge (info " +
                          std::to_string(info) + ")",
                      h.master_seed);
  }
  if (want_vectors) {
    // Fix each eigenvector's overall sign: first nonzero component positive.
    const std::uint64_t N = h.size;
    for (std::uint64_t j = 0; j < N; ++j) {
      double* col = a.data() + j * N;
      for (std::uint64_t i = 0; i < N; ++i) {
        if (col[i] != 0.0) {
          if (col[i] < 0.0) {
            for (std::uint64_t k = 0; k < N; ++k) col[k] = -col[k];
          }
          break;
        }
      }
    }
    sd.eigenvectors = std::move(a);
  }
  return sd;
}

}  // namespace

SpectralData eigendecompose(const Hamiltonian& h) {
  return decompose_impl(h, true);
}

SpectralData eigenvalues_only(const Hamiltonian& h) {
  return decompose_impl(h, false);
}

std::complex<double> green_function(const SpectralData& sd, std::uint64_t x,
                                    std::uint64_t y, ComplexEnergy z) {
  require_eta(z);
  require_site(sd, x);
  require_site(sd, y);
  const std::uint64_t N = sd.size;
  std::vector<double> vx(N), vy(N);
  for (std::uint64_t j = 0; j < N; ++j) {
    vx[j] = sd.psi(j, x);
    vy[j] = sd.psi(j, y);
  }
  double re = 0.0, im = 0.0;
  simd::active().resolvent_pair(vx.data(), vy.data(), sd.eigenvalues.data(),
                                N, z.E, z.eta, &re, &im);
  return {re, im};
}

void green_row(const SpectralData& sd, std::uint64_t x, ComplexEnergy z,
               double* out_re, double* out_im) {
  require_eta(z);
  require_site(sd, x);
  const std::uint64_t N = sd.size;
  // G(x,y) = sum_j psi_j(y) * [psi_j(x) / (lambda_j - z)]; the bracket is a
  // complex vector d + i e, so the row is two matrix-vector products.
  std::vector<double> d(N), e(N);
  for (std::uint64_t j = 0; j < N; ++j) {
    const double cj = sd.psi(j, x);
    const double dl = sd.eigenvalues[j] - z.E;
    const double den = dl * dl + z.eta * z.eta;
    d[j] = cj * dl / den;
    e[j] = cj * z.eta / den;
  }
  const auto n = static_cast<int>(N);
  cblas_dgemv(CblasColMajor, CblasNoTrans, n, n, 1.0, sd.eigenvectors.data(),
              n, d.data(), 1, 0.0, out_re, 1);
  cblas_dgemv(CblasColMajor, CblasNoTrans, n, n, 1.0, sd.eigenvectors.data(),
              n, e.data(), 1, 0.0, out_im, 1);
}

void green_matrix(const SpectralData& sd, ComplexEnergy z,
                  std::vector<double>& out_re, std::vector<double>& out_im) {
  require_eta(z);
  const std::uint64_t N = sd.size;
  out_re.assign(N * N, 0.0);
  out_im.assign(N * N, 0.0);
  // R(z) = V diag(1/(lambda-z)) V^T: scale the eigenvector columns by the
  // real/imaginary parts of 1/(lambda-z), then multiply by V^T.
  std::vector<double> scaled(N * N);
  const auto n = static_cast<int>(N);
  for (int part = 0; part < 2; ++part) {
    for (std::uint64_t j = 0; j < N; ++j) {
      const double dl = sd.eigenvalues[j] - z.E;
      const double den = dl * dl + z.eta * z.eta;
      const double w = (part == 0) ? dl / den : z.eta / den;
      const double* col = sd.eigenvectors.data() + j * N;
      double* dst = scaled.data() + j * N;
      for (std::uint64_t i = 0; i < N; ++i) dst[i] = w * col[i];
    }
    cblas_dgemm(CblasColMajor, CblasNoTrans, CblasTrans, n, n, n, 1.0,
                scaled.data(), n, sd.eigenvectors.data(), n, 0.0,
                (part == 0 ? out_re : out_im).data(), n);
  }
}

std::complex<double> green_power_entry(const SpectralData& sd,
                                       std::uint64_t x, std::uint64_t y,
                                       ComplexEnergy z, unsigned p) {
  require_eta(z);
  require_site(sd, x);
  require_site(sd, y);
  if (p == 0) throw DomainError("p: resolvent power must be >= 1");
  const std::complex<double> zc = z.value();
  std::complex<double> sum = 0.0;
  for (std::uint64_t j = 0; j < sd.size; ++j) {
    const std::complex<double> inv = 1.0 / (sd.eigenvalues[j] - zc);
    std::complex<double> invp = inv;
    for (unsigned q = 1; q < p; ++q) invp *= inv;
    sum += sd.psi(j, x) * sd.psi(j, y) * invp;
  }
  return sum;
}

std::complex<double> stieltjes(const SpectralData& sd, ComplexEnergy z) {
  return stieltjes(sd.eigenvalues, z);
}

std::complex<double> stieltjes(const std::vector<double>& eigenvalues,
                               ComplexEnergy z) {
  require_eta(z);
  double re = 0.0, im = 0.0;
  simd::active().resolvent_trace(eigenvalues.data(), eigenvalues.size(), z.E,
                                 z.eta, &re, &im);
  const double N = static_cast<double>(eigenvalues.size());
  return {re / N, im / N};
}

std::complex<double> stieltjes_power(const std::vector<double>& eigenvalues,
                                     ComplexEnergy z, unsigned p) {
  require_eta(z);
  if (p == 0) throw DomainError("p: resolvent power must be >= 1");
  const std::complex<double> zc = z.value();
  std::complex<double> sum = 0.0;
  for (const double lambda : eigenvalues) {
    const std::complex<double> inv = 1.0 / (lambda - zc);
    std::complex<double> invp = inv;
    for (unsigned q = 1; q < p; ++q) invp *= inv;
    sum += invp;
  }
  return sum / static_cast<double>(eigenvalues.size());
}

DosCount dos_measure(const SpectralData& sd, double a, double b) {
  return dos_measure(sd.eigenvalues, a, b);
}

DosCount dos_measure(const std::vector<double>& eigenvalues, double a,
                     double b) {
  if (!(a <= b)) throw DomainError("interval: requires a <= b");
  const auto lo = std::lower_bound(eigenvalues.begin(), eigenvalues.end(), a);
  const auto hi = std::upper_bound(eigenvalues.begin(), eigenvalues.end(), b);
  DosCount out;
  out.count = static_cast<std::uint64_t>(hi - lo);
  out.fraction =
      static_cast<double>(out.count) / static_cast<double>(eigenvalues.size());
  return out;
}

}  // namespace hrmt
