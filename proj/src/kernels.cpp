// SPDX-License-Identifier: Apache-2.0
#include "oodkit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kernels_internal.hpp"

namespace oodkit::kern {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double* y, const double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double* y, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= a;
}

double sum(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double vmax(const double* a, std::size_t n) {
  double m = a[0];
  for (std::size_t i = 1; i < n; ++i) m = std::max(m, a[i]);
  return m;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace scalar

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Backend g_requested = Backend::Auto;

bool use_avx2() {
  if (g_requested == Backend::Scalar) return false;
  return avx2::compiled() && cpu_has_avx2();
}

// SIMD pays off only past a few vector widths.
constexpr std::size_t kMinSimdLen = 8;

}  // namespace

bool avx2_supported() { return avx2::compiled() && cpu_has_avx2(); }

void set_backend(Backend backend) {
  if (backend == Backend::Avx2 && !avx2_supported()) {
    throw std::runtime_error("kern: AVX2 backend requested but not available");
  }
  g_requested = backend;
}

Backend active_backend() { return use_avx2() ? Backend::Avx2 : Backend::Scalar; }

double dot(const double* a, const double* b, std::size_t n) {
  if (use_avx2() && n >= kMinSimdLen) return avx2::dot(a, b, n);
  return scalar::dot(a, b, n);
}

void axpy(double* y, const double* x, double a, std::size_t n) {
  if (use_avx2() && n >= kMinSimdLen) return avx2::axpy(y, x, a, n);
  scalar::axpy(y, x, a, n);
}

void scale(double* y, double a, std::size_t n) {
  if (use_avx2() && n >= kMinSimdLen) return avx2::scale(y, a, n);
  scalar::scale(y, a, n);
}

double sum(const double* a, std::size_t n) {
  if (use_avx2() && n >= kMinSimdLen) return avx2::sum(a, n);
  return scalar::sum(a, n);
}

double vmax(const double* a, std::size_t n) {
  if (use_avx2() && n >= kMinSimdLen) return avx2::vmax(a, n);
  return scalar::vmax(a, n);
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
  if (use_avx2() && n >= kMinSimdLen) return avx2::max_abs_diff(a, b, n);
  return scalar::max_abs_diff(a, b, n);
}

}  // namespace oodkit::kern
