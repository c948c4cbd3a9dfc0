#pragma once
// Dense inner loops shared by training and normalization. A scalar reference
// implementation always exists; an AVX2+FMA variant is selected at runtime
// when the CPU supports it. The two variants agree up to floating-point
// reduction order; within one process the selection is fixed, so repeated
// invocations produce bit-identical results.

#include <cstddef>
#include <span>
#include <string_view>

namespace fairlr::kernels {

enum class Mode { automatic, scalar, avx2 };

// Force a specific implementation (tests and the --kernel CLI flag). Throws
// ConfigError when the requested variant is unsupported on this CPU.
void set_mode(Mode m);
Mode mode();
std::string_view active_name();
bool avx2_supported();

// <a, b>
double dot(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// Reference kernels, always available; these are the oracle side of the
// scalar/SIMD equivalence tests.
double dot_scalar(std::span<const double> a, std::span<const double> b);
void axpy_scalar(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace fairlr::kernels
