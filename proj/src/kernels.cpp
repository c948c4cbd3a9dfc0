#include "fairlr/kernels.hpp"

#include <cassert>

#include "fairlr/errors.hpp"

#if defined(__x86_64__) || defined(__i386__)
#define FAIRLR_X86 1
#include <immintrin.h>
#else
#define FAIRLR_X86 0
#endif

namespace fairlr::kernels {

double dot_scalar(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

#if FAIRLR_X86

// Four independent accumulators, combined in a fixed order so the reduction
// is deterministic for a given length.
__attribute__((target("avx2,fma"))) static double dot_avx2(std::span<const double> a,
                                                           std::span<const double> b) {
  const double* pa = a.data();
  const double* pb = b.data();
  const std::size_t n = a.size();

  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();

  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 8), _mm256_loadu_pd(pb + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 12), _mm256_loadu_pd(pb + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
  }

  __m256d acc = _mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3));
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  __m128d sum2 = _mm_add_pd(lo, hi);
  double s = _mm_cvtsd_f64(_mm_add_sd(sum2, _mm_unpackhi_pd(sum2, sum2)));

  for (; i < n; ++i) s += pa[i] * pb[i];
  return s;
}

__attribute__((target("avx2,fma"))) static void axpy_avx2(double alpha, std::span<const double> x,
                                                          std::span<double> y) {
  const double* px = x.data();
  double* py = y.data();
  const std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(alpha);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(py + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(px + i), vy);
    _mm256_storeu_pd(py + i, vy);
  }
  for (; i < n; ++i) py[i] += alpha * px[i];
}

bool avx2_supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

#else

bool avx2_supported() { return false; }

#endif  // FAIRLR_X86

namespace {

using DotFn = double (*)(std::span<const double>, std::span<const double>);
using AxpyFn = void (*)(double, std::span<const double>, std::span<double>);

struct Dispatch {
  Mode requested = Mode::automatic;
  DotFn dot = nullptr;
  AxpyFn axpy = nullptr;
  std::string_view name = "scalar";
};

Dispatch make_dispatch(Mode m) {
  Dispatch d;
  d.requested = m;
  const bool want_avx2 = (m == Mode::avx2) || (m == Mode::automatic && avx2_supported());
  if (want_avx2) {
    if (!avx2_supported()) throw ConfigError("AVX2 kernels requested but unsupported on this CPU");
#if FAIRLR_X86
    d.dot = dot_avx2;
    d.axpy = axpy_avx2;
    d.name = "avx2";
    return d;
#endif
  }
  d.dot = dot_scalar;
  d.axpy = axpy_scalar;
  d.name = "scalar";
  return d;
}

Dispatch& dispatch() {
  static Dispatch d = make_dispatch(Mode::automatic);
  return d;
}

}  // namespace

void set_mode(Mode m) { dispatch() = make_dispatch(m); }
Mode mode() { return dispatch().requested; }
std::string_view active_name() { return dispatch().name; }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimMismatchError("dot operands differ in length");
  return dispatch().dot(a, b);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimMismatchError("axpy operands differ in length");
  dispatch().axpy(alpha, x, y);
}

}  // namespace fairlr::kernels
