#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "hrmt/simd/kernels.hpp"

// AVX2 + FMA variants, 4 doubles per lane. Each kernel keeps a vector
// accumulator and reduces once at the end, so the summation order differs
// from the scalar reference by reassociation only.

namespace hrmt::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void resolvent_trace_avx2(const double* lambda, std::size_t n, double E,
                          double eta, double* re, double* im) {
  const __m256d vE = _mm256_set1_pd(E);
  const __m256d veta2 = _mm256_set1_pd(eta * eta);
  __m256d ar = _mm256_setzero_pd(), ai = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(lambda + j), vE);
    const __m256d den = _mm256_fmadd_pd(d, d, veta2);
    const __m256d inv = _mm256_div_pd(_mm256_set1_pd(1.0), den);
    ar = _mm256_fmadd_pd(d, inv, ar);
    ai = _mm256_add_pd(ai, inv);
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

void resolvent_pair_avx2(const double* vx, const double* vy,
                         const double* lambda, std::size_t n, double E,
                         double eta, double* re, double* im) {
  const __m256d vE = _mm256_set1_pd(E);
  const __m256d veta2 = _mm256_set1_pd(eta * eta);
  __m256d ar = _mm256_setzero_pd(), ai = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d w =
        _mm256_mul_pd(_mm256_loadu_pd(vx + j), _mm256_loadu_pd(vy + j));
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(lambda + j), vE);
    const __m256d den = _mm256_fmadd_pd(d, d, veta2);
    const __m256d inv = _mm256_div_pd(w, den);
    ar = _mm256_fmadd_pd(d, inv, ar);
    ai = _mm256_add_pd(ai, inv);
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

double poisson_sum_avx2(const double* points, std::size_t n, double center,
                        double eta) {
  const __m256d vc = _mm256_set1_pd(center);
  const __m256d veta2 = _mm256_set1_pd(eta * eta);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(points + j), vc);
    const __m256d den = _mm256_fmadd_pd(d, d, veta2);
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_set1_pd(1.0), den));
  }
  double s = eta * hsum(acc);
  for (; j < n; ++j) {
    const double d = points[j] - center;
    s += eta / (d * d + eta * eta);
  }
  return s;
}

void axpy_abs_avx2(double a, const double* v, std::size_t n, double* out) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d absv = _mm256_and_pd(_mm256_loadu_pd(v + i), mask);
    _mm256_storeu_pd(out + i,
                     _mm256_fmadd_pd(va, absv, _mm256_loadu_pd(out + i)));
  }
  for (; i < n; ++i) out[i] += a * std::fabs(v[i]);
}

double norm1_complex_avx2(const double* re, const double* im, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_loadu_pd(re + i);
    const __m256d m = _mm256_loadu_pd(im + i);
    acc = _mm256_add_pd(acc,
                        _mm256_sqrt_pd(_mm256_fmadd_pd(r, r, _mm256_mul_pd(m, m))));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::sqrt(re[i] * re[i] + im[i] * im[i]);
  return s;
}

double norm2sq_complex_avx2(const double* re, const double* im,
                            std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_loadu_pd(re + i);
    const __m256d m = _mm256_loadu_pd(im + i);
    acc = _mm256_add_pd(acc, _mm256_fmadd_pd(r, r, _mm256_mul_pd(m, m)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += re[i] * re[i] + im[i] * im[i];
  return s;
}

double diff_norm1_complex_avx2(const double* re1, const double* im1,
                               const double* re2, const double* im2,
                               std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dr =
        _mm256_sub_pd(_mm256_loadu_pd(re1 + i), _mm256_loadu_pd(re2 + i));
    const __m256d di =
        _mm256_sub_pd(_mm256_loadu_pd(im1 + i), _mm256_loadu_pd(im2 + i));
    acc = _mm256_add_pd(
        acc, _mm256_sqrt_pd(_mm256_fmadd_pd(dr, dr, _mm256_mul_pd(di, di))));
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

const KernelTable kAvx2Kernels = {
    "avx2",
    resolvent_trace_avx2,
    resolvent_pair_avx2,
    poisson_sum_avx2,
    axpy_abs_avx2,
    norm1_complex_avx2,
    norm2sq_complex_avx2,
    diff_norm1_complex_avx2,
};

}  // namespace hrmt::simd
