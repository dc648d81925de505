#include <arm_neon.h>

#include <cmath>
#include <cstddef>

#include "hrmt/simd/kernels.hpp"

// NEON variants, 2 doubles per lane (aarch64).

namespace hrmt::simd {
namespace {

inline double hsum(float64x2_t v) { return vaddvq_f64(v); }

void resolvent_trace_neon(const double* lambda, std::size_t n, double E,
                          double eta, double* re, double* im) {
  const float64x2_t vE = vdupq_n_f64(E);
  const float64x2_t veta2 = vdupq_n_f64(eta * eta);
  float64x2_t ar = vdupq_n_f64(0.0), ai = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(lambda + j), vE);
    const float64x2_t den = vfmaq_f64(veta2, d, d);
    const float64x2_t inv = vdivq_f64(vdupq_n_f64(1.0), den);
    ar = vfmaq_f64(ar, d, inv);
    ai = vaddq_f64(ai, inv);
  }
  double sr = hsum(ar), si = eta * hsum(ai);
  for (; j < n; ++j) {
    const double d = lambda[j] - E;
    const double inv = 1.0 / (d * d + eta * eta);
    sr += d * inv;
    si += eta * inv;
  }
  *re = sr;
  *im = si;
}

void resolvent_pair_neon(const double* vx, const double* vy,
                         const double* lambda, std::size_t n, double E,
                         double eta, double* re, double* im) {
  const float64x2_t vE = vdupq_n_f64(E);
  const float64x2_t veta2 = vdupq_n_f64(eta * eta);
  float64x2_t ar = vdupq_n_f64(0.0), ai = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t w = vmulq_f64(vld1q_f64(vx + j), vld1q_f64(vy + j));
    const float64x2_t d = vsubq_f64(vld1q_f64(lambda + j), vE);
    const float64x2_t den = vfmaq_f64(veta2, d, d);
    const float64x2_t inv = vdivq_f64(w, den);
    ar = vfmaq_f64(ar, d, inv);
    ai = vaddq_f64(ai, inv);
  }
  double sr = hsum(ar), si = eta * hsum(ai);
  for (; j < n; ++j) {
    const double w = vx[j] * vy[j];
    const double d = lambda[j] - E;
    const double inv = w / (d * d + eta * eta);
    sr += d * inv;
    si += eta * inv;
  }
  *re = sr;
  *im = si;
}

double poisson_sum_neon(const double* points, std::size_t n, double center,
                        double eta) {
  const float64x2_t vc = vdupq_n_f64(center);
  const float64x2_t veta2 = vdupq_n_f64(eta * eta);
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(points + j), vc);
    const float64x2_t den = vfmaq_f64(veta2, d, d);
    acc = vaddq_f64(acc, vdivq_f64(vdupq_n_f64(1.0), den));
  }
  double s = eta * hsum(acc);
  for (; j < n; ++j) {
    const double d = points[j] - center;
    s += eta / (d * d + eta * eta);
  }
  return s;
}

void axpy_abs_neon(double a, const double* v, std::size_t n, double* out) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t absv = vabsq_f64(vld1q_f64(v + i));
    vst1q_f64(out + i, vfmaq_f64(vld1q_f64(out + i), va, absv));
  }
  for (; i < n; ++i) out[i] += a * std::fabs(v[i]);
}

double norm1_complex_neon(const double* re, const double* im, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t r = vld1q_f64(re + i);
    const float64x2_t m = vld1q_f64(im + i);
    acc = vaddq_f64(acc, vsqrtq_f64(vfmaq_f64(vmulq_f64(m, m), r, r)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::sqrt(re[i] * re[i] + im[i] * im[i]);
  return s;
}

double norm2sq_complex_neon(const double* re, const double* im,
                            std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t r = vld1q_f64(re + i);
    const float64x2_t m = vld1q_f64(im + i);
    acc = vaddq_f64(acc, vfmaq_f64(vmulq_f64(m, m), r, r));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += re[i] * re[i] + im[i] * im[i];
  return s;
}

double diff_norm1_complex_neon(const double* re1, const double* im1,
                               const double* re2, const double* im2,
                               std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dr = vsubq_f64(vld1q_f64(re1 + i), vld1q_f64(re2 + i));
    const float64x2_t di = vsubq_f64(vld1q_f64(im1 + i), vld1q_f64(im2 + i));
    acc = vaddq_f64(acc, vsqrtq_f64(vfmaq_f64(vmulq_f64(di, di), dr, dr)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double dr = re1[i] - re2[i];
    const double di = im1[i] - im2[i];
    s += std::sqrt(dr * dr + di * di);
  }
  return s;
}

}  // namespace

const KernelTable kNeonKernels = {
    "neon",
    resolvent_trace_neon,
    resolvent_pair_neon,
    poisson_sum_neon,
    axpy_abs_neon,
    norm1_complex_neon,
    norm2sq_complex_neon,
    diff_norm1_complex_neon,
};

}  // namespace hrmt::simd
