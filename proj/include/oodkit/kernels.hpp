// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

// Dense double-precision kernels used by the training inner loops.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant selected at runtime. The two are equivalence-tested against each
// other; results may differ by reassociation rounding only.

namespace oodkit::kern {

enum class Backend {
  Auto,    // AVX2 when the CPU and build support it
  Scalar,  // force the reference path
  Avx2,    // force AVX2 (throws if unavailable)
};

void set_backend(Backend backend);
Backend active_backend();  // resolved: Scalar or Avx2
bool avx2_supported();     // CPU + build both provide AVX2

double dot(const double* a, const double* b, std::size_t n);
void axpy(double* y, const double* x, double a, std::size_t n);  // y += a*x
void scale(double* y, double a, std::size_t n);
double sum(const double* a, std::size_t n);
double vmax(const double* a, std::size_t n);  // n >= 1
double max_abs_diff(const double* a, const double* b, std::size_t n);

// Reference implementations, exposed for equivalence tests.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double* y, const double* x, double a, std::size_t n);
void scale(double* y, double a, std::size_t n);
double sum(const double* a, std::size_t n);
double vmax(const double* a, std::size_t n);
double max_abs_diff(const double* a, const double* b, std::size_t n);
}  // namespace scalar

}  // namespace oodkit::kern
