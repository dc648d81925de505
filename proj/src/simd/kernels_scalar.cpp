#include <cmath>
#include <cstddef>

#include "hrmt/simd/kernels.hpp"

// Reference kernels. Plain loops, one accumulator, no reassociation beyond
// what -O3 does without -ffast-math; these define the semantics the vector
// variants are tested against.

namespace hrmt::simd {
namespace {

void resolvent_trace_scalar(const double* lambda, std::size_t n, double E,
                            double eta, double* re, double* im) {
  double sr = 0.0, si = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = lambda[j] - E;
    const double inv = 1.0 / (d * d + eta * eta);
    sr += d * inv;
    si += eta * inv;
  }
  *re = sr;
  *im = si;
}

void resolvent_pair_scalar(const double* vx, const double* vy,
                           const double* lambda, std::size_t n, double E,
                           double eta, double* re, double* im) {
  double sr = 0.0, si = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = vx[j] * vy[j];
    const double d = lambda[j] - E;
    const double inv = w / (d * d + eta * eta);
    sr += d * inv;
    si += eta * inv;
  }
  *re = sr;
  *im = si;
}

double poisson_sum_scalar(const double* points, std::size_t n, double center,
                          double eta) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = points[j] - center;
    s += eta / (d * d + eta * eta);
  }
  return s;
}

void axpy_abs_scalar(double a, const double* v, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a * std::fabs(v[i]);
}

double norm1_complex_scalar(const double* re, const double* im,
                            std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += std::sqrt(re[i] * re[i] + im[i] * im[i]);
  return s;
}

double norm2sq_complex_scalar(const double* re, const double* im,
                              std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += re[i] * re[i] + im[i] * im[i];
  return s;
}

double diff_norm1_complex_scalar(const double* re1, const double* im1,
                                 const double* re2, const double* im2,
                                 std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dr = re1[i] - re2[i];
    const double di = im1[i] - im2[i];
    s += std::sqrt(dr * dr + di * di);
  }
  return s;
}

}  // namespace

const KernelTable kScalarKernels = {
    "scalar",
    resolvent_trace_scalar,
    resolvent_pair_scalar,
    poisson_sum_scalar,
    axpy_abs_scalar,
    norm1_complex_scalar,
    norm2sq_complex_scalar,
    diff_norm1_complex_scalar,
};

}  // namespace hrmt::simd
