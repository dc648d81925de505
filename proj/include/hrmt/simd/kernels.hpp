#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace hrmt::simd {

/// Vectorizable inner loops of the spectral estimators. Every entry has a
/// scalar reference implementation; AVX2 and NEON variants are selected at
/// runtime and must agree with the reference to rounding accuracy
/// (equivalence-tested in test_simd.cpp).
///
/// Complex data is passed as split re/im arrays. z = E + i*eta with eta > 0.
struct KernelTable {
  const char* name;

  /// re + i*im = Sum_j 1 / (lambda_j - z)
  void (*resolvent_trace)(const double* lambda, std::size_t n, double E,
                          double eta, double* re, double* im);

  /// re + i*im = Sum_j vx_j * vy_j / (lambda_j - z)
  void (*resolvent_pair)(const double* vx, const double* vy,
                         const double* lambda, std::size_t n, double E,
                         double eta, double* re, double* im);

  /// Sum_j eta / ((p_j - center)^2 + eta^2)
  double (*poisson_sum)(const double* points, std::size_t n, double center,
                        double eta);

  /// out_i += a * |v_i|
  void (*axpy_abs)(double a, const double* v, std::size_t n, double* out);

  /// Sum_i sqrt(re_i^2 + im_i^2)
  double (*norm1_complex)(const double* re, const double* im, std::size_t n);

  /// Sum_i (re_i^2 + im_i^2)
  double (*norm2sq_complex)(const double* re, const double* im, std::size_t n);

  /// Sum_i |(re1_i + i*im1_i) - (re2_i + i*im2_i)|
  double (*diff_norm1_complex)(const double* re1, const double* im1,
                               const double* re2, const double* im2,
                               std::size_t n);
};

extern const KernelTable kScalarKernels;
#ifdef HRMT_BUILD_AVX2
extern const KernelTable kAvx2Kernels;
#endif
#ifdef HRMT_BUILD_NEON
extern const KernelTable kNeonKernels;
#endif

/// The table in use. First call picks the widest variant the CPU supports,
/// unless the environment variable HRMT_SIMD names one of {scalar, avx2,
/// neon} explicitly.
const KernelTable& active();

/// Force a variant by name; false if that variant is not built or not
/// supported by this CPU.
bool select(std::string_view name);

/// All variants usable on this machine, scalar first.
std::vector<const KernelTable*> available();

}  // namespace hrmt::simd
