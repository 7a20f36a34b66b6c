// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace oodkit::kern::avx2 {

// Defined in kernels_avx2.cpp (compiled with -mavx2 on x86-64).
bool compiled();
double dot(const double* a, const double* b, std::size_t n);
void axpy(double* y, const double* x, double a, std::size_t n);
void scale(double* y, double a, std::size_t n);
double sum(const double* a, std::size_t n);
double vmax(const double* a, std::size_t n);
double max_abs_diff(const double* a, const double* b, std::size_t n);

}  // namespace oodkit::kern::avx2
