#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "hrmt/ensemble.hpp"

namespace hrmt {

/// A point z = E + i*eta in the upper half-plane.
struct ComplexEnergy {
  double E = 0.0;
  double eta = 1.0;  // must stay > 0

  std::complex<double> value() const { return {E, eta}; }
};

/// Full spectrum and orthonormal eigenbasis of one realization. Eigenvector
/// j occupies the contiguous block eigenvectors[j*size .. j*size + size);
/// i.e. the matrix is stored column-major with column j = psi_j.
struct SpectralData {
  std::uint64_t size = 0;
  std::vector<double> eigenvalues;   // ascending
  std::vector<double> eigenvectors;  // empty when values-only
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  bool has_vectors() const { return !eigenvectors.empty(); }

  /// Component of eigenvector j at 1-based site x.
  double psi(std::uint64_t j, std::uint64_t x) const {
    return eigenvectors[j * size + (x - 1)];
  }
};

/// Count of eigenvalues in a closed interval, and that count over N.
struct DosCount {
  std::uint64_t count = 0;
  double fraction = 0.0;
};

/// Forces the BLAS/LAPACK backend into single-threaded mode (idempotent).
/// Called by every solver entry point so results are bit-identical no matter
/// how many worker threads the harness runs.
void pin_blas_single_thread();

/// Dense symmetric eigendecomposition (divide and conquer), values ascending,
/// eigenvectors orthonormal with each vector's first nonzero component made
/// positive. Throws SolverError carrying the realization seed on failure.
SpectralData eigendecompose(const Hamiltonian& h);

/// Eigenvalues only (same backend, no vector accumulation).
SpectralData eigenvalues_only(const Hamiltonian& h);

/// G(x,y;z) = sum_j psi_j(x) psi_j(y) / (lambda_j - z), 1-based indices.
std::complex<double> green_function(const SpectralData& sd, std::uint64_t x,
                                    std::uint64_t y, ComplexEnergy z);

/// Full row G(x, . ; z) in one shot (two matrix-vector products).
/// out_re/out_im must hold size doubles; entry y-1 is G(x,y;z).
void green_row(const SpectralData& sd, std::uint64_t x, ComplexEnergy z,
               double* out_re, double* out_im);

/// Full resolvent matrix R(z) = (H - z)^{-1}, row-major real and imaginary
/// parts (each size*size), via two symmetric rank-N products.
void green_matrix(const SpectralData& sd, ComplexEnergy z,
                  std::vector<double>& out_re, std::vector<double>& out_im);

/// <delta_y, R(z)^p delta_x> = sum_j psi_j(x) psi_j(y) / (lambda_j - z)^p.
std::complex<double> green_power_entry(const SpectralData& sd,
                                       std::uint64_t x, std::uint64_t y,
                                       ComplexEnergy z, unsigned p);

/// S(z) = (1/N) sum_j 1/(lambda_j - z).
std::complex<double> stieltjes(const SpectralData& sd, ComplexEnergy z);
std::complex<double> stieltjes(const std::vector<double>& eigenvalues,
                               ComplexEnergy z);

/// (1/N) sum_j 1/(lambda_j - z)^p; p=2 gives dS/dz, p=3 gives (1/2) d2S/dz2.
std::complex<double> stieltjes_power(const std::vector<double>& eigenvalues,
                                     ComplexEnergy z, unsigned p);

/// Eigenvalue count and fraction in the closed interval [a, b].
DosCount dos_measure(const SpectralData& sd, double a, double b);
DosCount dos_measure(const std::vector<double>& eigenvalues, double a,
                     double b);

}  // namespace hrmt
