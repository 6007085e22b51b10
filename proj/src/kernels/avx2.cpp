// AVX2 variants. This translation unit is compiled with -mavx2 (but not
// -mfma, so products and sums round exactly like the scalar reference) and
// must only be entered after a runtime CPU check. Keep it free of inline
// library templates: anything instantiated here could be merged with the
// baseline copy by the linker.

#include <immintrin.h>

#include <cmath>

#include "kvt/kernels.hpp"

namespace kvt::kernels {
namespace {

// Lanes are folded in a fixed order: (l0 + l1) + (l2 + l3).
inline double fold(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(x + i + 4),
                                             _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  double acc = fold(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double weighted_dot_avx2(const double* w, const double* x, const double* y,
                         std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wx = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(wx, _mm256_loadu_pd(y + i)));
  }
  double s = fold(acc);
  for (; i < n; ++i) s += w[i] * x[i] * y[i];
  return s;
}

double weighted_sum_avx2(const double* w, const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i)));
  }
  double s = fold(acc);
  for (; i < n; ++i) s += w[i] * x[i];
  return s;
}

double max_abs_avx2(const double* x, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = lanes[0];
  for (int k = 1; k < 4; ++k) r = lanes[k] > r ? lanes[k] : r;
  for (; i < n; ++i) {
    const double a = std::fabs(x[i]);
    if (a > r) r = a;
  }
  return r;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i),
                                          _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void xpay_avx2(const double* x, double a, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(x + i),
                                          _mm256_mul_pd(va, _mm256_loadu_pd(y + i))));
  }
  for (; i < n; ++i) y[i] = x[i] + a * y[i];
}

void hadamard_avx2(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

// Row-wise gather. Stencil rows are short (5 to 15 entries), so each row
// takes at most a few 4-wide passes plus a scalar tail.
void spmv_avx2(const CsrView& a, const double* x, double* y) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    std::int64_t k = a.row_ptr[r];
    const std::int64_t end = a.row_ptr[r + 1];
    __m256d acc = _mm256_setzero_pd();
    for (; k + 4 <= end; k += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.cols + k));
      const __m256d xv = _mm256_i32gather_pd(x, idx, 8);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a.vals + k), xv));
    }
    double s = fold(acc);
    for (; k < end; ++k) s += a.vals[k] * x[a.cols[k]];
    y[r] = s;
  }
}

constexpr Table kAvx2{dot_avx2,      weighted_dot_avx2, weighted_sum_avx2,
                      max_abs_avx2,  axpy_avx2,         xpay_avx2,
                      hadamard_avx2, spmv_avx2};

}  // namespace

namespace detail {
const Table* avx2_table() noexcept { return &kAvx2; }
}  // namespace detail

}  // namespace kvt::kernels
