#include "decouple/kernels.hpp"

#include <atomic>
#include <cmath>

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
#define DECOUPLE_X86 1
#include <immintrin.h>
#else
#define DECOUPLE_X86 0
#endif

namespace decouple::kernels {

namespace {

std::atomic<bool> g_force_scalar{false};

bool cpu_has_avx2_fma() noexcept {
#if DECOUPLE_X86 && (defined(__GNUC__) || defined(__clang__))
  static const bool has =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return has;
#else
  return false;
#endif
}

// ---------------------------------------------------------------------------
// scalar reference kernels
// ---------------------------------------------------------------------------

double sum_scalar(const double* x, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sum_sq_scalar(const double* x, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double sum_quart_scalar(const double* x, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = x[i] * x[i];
    acc += s * s;
  }
  return acc;
}

double dot_scalar(const double* x, const double* w, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i];
  return acc;
}

double weighted_sq_scalar(const double* x, const double* w, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i] * x[i];
  return acc;
}

double weighted_centered_sq_scalar(const double* x, const double* w, std::size_t n,
                                   double c) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - c;
    acc += w[i] * d * d;
  }
  return acc;
}

double weighted_prod_scalar(const double* a, const double* b, const double* w,
                            std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * a[i] * b[i];
  return acc;
}

double mass_above_scalar(const double* x, const double* w, std::size_t n,
                         double thr) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] > thr) acc += w[i];
  return acc;
}

double mass_abs_dev_scalar(const double* x, const double* w, std::size_t n,
                           double c, double thr) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::fabs(x[i] - c) > thr) acc += w[i];
  return acc;
}

std::size_t count_above_scalar(const double* x, std::size_t n, double thr) noexcept {
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] > thr) ++cnt;
  return cnt;
}

std::size_t count_abs_dev_scalar(const double* x, std::size_t n, double c,
                                 double thr) noexcept {
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::fabs(x[i] - c) > thr) ++cnt;
  return cnt;
}

// ---------------------------------------------------------------------------
// AVX2 variants (compiled per-function; never required at baseline ISA)
// ---------------------------------------------------------------------------

#if DECOUPLE_X86

__attribute__((target("avx2,fma"))) inline double hsum256(__m256d v) noexcept {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

__attribute__((target("avx2,fma"))) double sum_avx2(const double* x,
                                                    std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  if (i + 4 <= n) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    i += 4;
  }
  double out = hsum256(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) out += x[i];
  return out;
}

__attribute__((target("avx2,fma"))) double sum_sq_avx2(const double* x,
                                                       std::size_t n) noexcept {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double out = hsum256(acc);
  for (; i < n; ++i) out += x[i] * x[i];
  return out;
}

__attribute__((target("avx2,fma"))) double sum_quart_avx2(const double* x,
                                                          std::size_t n) noexcept {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    __m256d s = _mm256_mul_pd(v, v);
    acc = _mm256_fmadd_pd(s, s, acc);
  }
  double out = hsum256(acc);
  for (; i < n; ++i) {
    const double s = x[i] * x[i];
    out += s * s;
  }
  return out;
}

__attribute__((target("avx2,fma"))) double dot_avx2(const double* x, const double* w,
                                                    std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(x + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i), acc0);
    i += 4;
  }
  double out = hsum256(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) out += w[i] * x[i];
  return out;
}

__attribute__((target("avx2,fma"))) double weighted_sq_avx2(const double* x,
                                                            const double* w,
                                                            std::size_t n) noexcept {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(v, v), _mm256_loadu_pd(w + i), acc);
  }
  double out = hsum256(acc);
  for (; i < n; ++i) out += w[i] * x[i] * x[i];
  return out;
}

__attribute__((target("avx2,fma"))) double weighted_centered_sq_avx2(
    const double* x, const double* w, std::size_t n, double c) noexcept {
  const __m256d cv = _mm256_set1_pd(c);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), cv);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(d, d), _mm256_loadu_pd(w + i), acc);
  }
  double out = hsum256(acc);
  for (; i < n; ++i) {
    const double d = x[i] - c;
    out += w[i] * d * d;
  }
  return out;
}

__attribute__((target("avx2,fma"))) double weighted_prod_avx2(const double* a,
                                                              const double* b,
                                                              const double* w,
                                                              std::size_t n) noexcept {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(p, _mm256_loadu_pd(w + i), acc);
  }
  double out = hsum256(acc);
  for (; i < n; ++i) out += w[i] * a[i] * b[i];
  return out;
}

__attribute__((target("avx2,fma"))) double mass_above_avx2(const double* x,
                                                           const double* w,
                                                           std::size_t n,
                                                           double thr) noexcept {
  const __m256d tv = _mm256_set1_pd(thr);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d m = _mm256_cmp_pd(_mm256_loadu_pd(x + i), tv, _CMP_GT_OQ);
    acc = _mm256_add_pd(acc, _mm256_and_pd(m, _mm256_loadu_pd(w + i)));
  }
  double out = hsum256(acc);
  for (; i < n; ++i)
    if (x[i] > thr) out += w[i];
  return out;
}

__attribute__((target("avx2,fma"))) double mass_abs_dev_avx2(const double* x,
                                                             const double* w,
                                                             std::size_t n, double c,
                                                             double thr) noexcept {
  const __m256d cv = _mm256_set1_pd(c);
  const __m256d tv = _mm256_set1_pd(thr);
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_and_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), cv), abs_mask);
    __m256d m = _mm256_cmp_pd(d, tv, _CMP_GT_OQ);
    acc = _mm256_add_pd(acc, _mm256_and_pd(m, _mm256_loadu_pd(w + i)));
  }
  double out = hsum256(acc);
  for (; i < n; ++i)
    if (std::fabs(x[i] - c) > thr) out += w[i];
  return out;
}

__attribute__((target("avx2,fma"))) std::size_t count_above_avx2(const double* x,
                                                                 std::size_t n,
                                                                 double thr) noexcept {
  const __m256d tv = _mm256_set1_pd(thr);
  std::size_t cnt = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d m = _mm256_cmp_pd(_mm256_loadu_pd(x + i), tv, _CMP_GT_OQ);
    cnt += static_cast<std::size_t>(__builtin_popcount(
        static_cast<unsigned>(_mm256_movemask_pd(m))));
  }
  for (; i < n; ++i)
    if (x[i] > thr) ++cnt;
  return cnt;
}

__attribute__((target("avx2,fma"))) std::size_t count_abs_dev_avx2(
    const double* x, std::size_t n, double c, double thr) noexcept {
  const __m256d cv = _mm256_set1_pd(c);
  const __m256d tv = _mm256_set1_pd(thr);
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  std::size_t cnt = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_and_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), cv), abs_mask);
    __m256d m = _mm256_cmp_pd(d, tv, _CMP_GT_OQ);
    cnt += static_cast<std::size_t>(__builtin_popcount(
        static_cast<unsigned>(_mm256_movemask_pd(m))));
  }
  for (; i < n; ++i)
    if (std::fabs(x[i] - c) > thr) ++cnt;
  return cnt;
}

#endif  // DECOUPLE_X86

inline bool use_avx2() noexcept {
  return !g_force_scalar.load(std::memory_order_relaxed) && cpu_has_avx2_fma();
}

}  // namespace

bool avx2_available() noexcept { return cpu_has_avx2_fma(); }

void set_force_scalar(bool force) noexcept {
  g_force_scalar.store(force, std::memory_order_relaxed);
}

bool scalar_forced() noexcept { return g_force_scalar.load(std::memory_order_relaxed); }

const char* active_variant() noexcept { return use_avx2() ? "avx2" : "scalar"; }

double sum(std::span<const double> x) noexcept {
#if DECOUPLE_X86
  if (use_avx2()) return sum_avx2(x.data(), x.size());
#endif
  return sum_scalar(x.data(), x.size());
}

double sum_sq(std::span<const double> x) noexcept {
#if DECOUPLE_X86
  if (use_avx2()) return sum_sq_avx2(x.data(), x.size());
#endif
  return sum_sq_scalar(x.data(), x.size());
}

double sum_quart(std::span<const double> x) noexcept {
#if DECOUPLE_X86
  if (use_avx2()) return sum_quart_avx2(x.data(), x.size());
#endif
  return sum_quart_scalar(x.data(), x.size());
}

double dot(std::span<const double> x, std::span<const double> w) noexcept {
#if DECOUPLE_X86
  if (use_avx2()) return dot_avx2(x.data(), w.data(), x.size());
#endif
  return dot_scalar(x.data(), w.data(), x.size());
}

double weighted_sq(std::span<const double> x, std::span<const double> w) noexcept {
#if DECOUPLE_X86
  if (use_avx2()) return weighted_sq_avx2(x.data(), w.data(), x.size());
#endif
  return weighted_sq_scalar(x.data(), w.data(), x.size());
}

double weighted_centered_sq(std::span<const double> x, std::span<const double> w,
                            double center) noexcept {
#if DECOUPLE_X86
  if (use_avx2()) return weighted_centered_sq_avx2(x.data(), w.data(), x.size(), center);
#endif
  return weighted_centered_sq_scalar(x.data(), w.data(), x.size(), center);
}

double weighted_prod(std::span<const double> a, std::span<const double> b,
                     std::span<const double> w) noexcept {
#if DECOUPLE_X86
  if (use_avx2()) return weighted_prod_avx2(a.data(), b.data(), w.data(), a.size());
#endif
  return weighted_prod_scalar(a.data(), b.data(), w.data(), a.size());
}

double mass_above(std::span<const double> x, std::span<const double> w,
                  double threshold) noexcept {
#if DECOUPLE_X86
  if (use_avx2()) return mass_above_avx2(x.data(), w.data(), x.size(), threshold);
#endif
  return mass_above_scalar(x.data(), w.data(), x.size(), threshold);
}

double mass_abs_deviation_above(std::span<const double> x, std::span<const double> w,
                                double center, double threshold) noexcept {
#if DECOUPLE_X86
  if (use_avx2())
    return mass_abs_dev_avx2(x.data(), w.data(), x.size(), center, threshold);
#endif
  return mass_abs_dev_scalar(x.data(), w.data(), x.size(), center, threshold);
}

std::size_t count_above(std::span<const double> x, double threshold) noexcept {
#if DECOUPLE_X86
  if (use_avx2()) return count_above_avx2(x.data(), x.size(), threshold);
#endif
  return count_above_scalar(x.data(), x.size(), threshold);
}

std::size_t count_abs_deviation_above(std::span<const double> x, double center,
                                      double threshold) noexcept {
#if DECOUPLE_X86
  if (use_avx2()) return count_abs_dev_avx2(x.data(), x.size(), center, threshold);
#endif
  return count_abs_dev_scalar(x.data(), x.size(), center, threshold);
}

}  // namespace decouple::kernels
