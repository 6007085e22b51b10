// Portable reference kernels. Reductions accumulate strictly left to right.

#include <cmath>

#include "kvt/kernels.hpp"

namespace kvt::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double weighted_dot_scalar(const double* w, const double* x, const double* y,
                           std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i] * y[i];
  return acc;
}

double weighted_sum_scalar(const double* w, const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i];
  return acc;
}

double max_abs_scalar(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::fabs(x[i]);
    if (a > m) m = a;
  }
  return m;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void xpay_scalar(const double* x, double a, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + a * y[i];
}

void hadamard_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void spmv_scalar(const CsrView& a, const double* x, double* y) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    double acc = 0.0;
    for (std::int64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      acc += a.vals[k] * x[a.cols[k]];
    }
    y[r] = acc;
  }
}

constexpr Table kScalar{dot_scalar,  weighted_dot_scalar, weighted_sum_scalar,
                        max_abs_scalar, axpy_scalar,     xpay_scalar,
                        hadamard_scalar, spmv_scalar};

}  // namespace

namespace detail {
const Table& scalar_table() noexcept { return kScalar; }
}  // namespace detail

}  // namespace kvt::kernels
