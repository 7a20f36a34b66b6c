// SPDX-License-Identifier: Apache-2.0
#include "kernels_internal.hpp"

#ifdef __AVX2__
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#endif

namespace oodkit::kern::avx2 {

#ifdef __AVX2__

bool compiled() { return true; }

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_shuffle_pd(s, s, 1);
  return _mm_cvtsd_f64(_mm_add_pd(s, shuf));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d m = _mm_max_pd(lo, hi);
  __m128d shuf = _mm_shuffle_pd(m, m, 1);
  return _mm_cvtsd_f64(_mm_max_pd(m, shuf));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  const std::size_t tail = n % 4;
  const std::size_t main = n - tail;
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < main; i += 4) {
    __m256d va = _mm256_loadu_pd(a + i);
    __m256d vb = _mm256_loadu_pd(b + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
  }
  double r = hsum(acc);
  for (std::size_t i = main; i < n; ++i) r += a[i] * b[i];
  return r;
}

void axpy(double* y, const double* x, double a, std::size_t n) {
  const std::size_t tail = n % 4;
  const std::size_t main = n - tail;
  __m256d va = _mm256_set1_pd(a);
  for (std::size_t i = 0; i < main; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    __m256d vx = _mm256_loadu_pd(x + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, vx));
    _mm256_storeu_pd(y + i, vy);
  }
  for (std::size_t i = main; i < n; ++i) y[i] += a * x[i];
}

void scale(double* y, double a, std::size_t n) {
  const std::size_t tail = n % 4;
  const std::size_t main = n - tail;
  __m256d va = _mm256_set1_pd(a);
  for (std::size_t i = 0; i < main; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(y + i)));
  }
  for (std::size_t i = main; i < n; ++i) y[i] *= a;
}

double sum(const double* a, std::size_t n) {
  const std::size_t tail = n % 4;
  const std::size_t main = n - tail;
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < main; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  }
  double r = hsum(acc);
  for (std::size_t i = main; i < n; ++i) r += a[i];
  return r;
}

double vmax(const double* a, std::size_t n) {
  const std::size_t tail = n % 4;
  const std::size_t main = n - tail;
  double r;
  if (main > 0) {
    __m256d acc = _mm256_loadu_pd(a);
    for (std::size_t i = 4; i < main; i += 4) {
      acc = _mm256_max_pd(acc, _mm256_loadu_pd(a + i));
    }
    r = hmax(acc);
  } else {
    r = a[0];
  }
  for (std::size_t i = main > 0 ? main : 1; i < n; ++i) r = std::max(r, a[i]);
  return r;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
  const std::size_t tail = n % 4;
  const std::size_t main = n - tail;
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < main; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign_mask, d));
  }
  double r = hmax(acc);
  for (std::size_t i = main; i < n; ++i) r = std::max(r, std::fabs(a[i] - b[i]));
  return r;
}

#else  // !__AVX2__

// Built without AVX2 support; the dispatcher never routes here.
bool compiled() { return false; }
double dot(const double*, const double*, std::size_t) { return 0.0; }
void axpy(double*, const double*, double, std::size_t) {}
void scale(double*, double, std::size_t) {}
double sum(const double*, std::size_t) { return 0.0; }
double vmax(const double*, std::size_t) { return 0.0; }
double max_abs_diff(const double*, const double*, std::size_t) { return 0.0; }

#endif

}  // namespace oodkit::kern::avx2
