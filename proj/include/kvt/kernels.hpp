#pragma once

// Dense vector kernels used by the Krylov solver and the quadrature
// reductions. Every kernel has a portable scalar reference implementation
// and, on x86-64, an AVX2 variant. The active table is chosen once at
// startup from the CPU features (override with KVT_SIMD=scalar|avx2) and can
// be swapped explicitly in tests.
//
// Elementwise kernels are bit-identical across variants. Reductions differ
// only in summation order; each variant uses a fixed order, so results are
// reproducible run to run on the same variant.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace kvt::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view name(Isa isa) noexcept;

/// True when the running CPU can execute the given variant.
bool supported(Isa isa) noexcept;

/// Variant currently used by the free functions below.
Isa active() noexcept;

/// Switch the active variant. Throws UsageError if the CPU lacks support.
void select(Isa isa);

/// RAII guard that restores the previous variant.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) : previous_(active()) { select(isa); }
  ~ScopedIsa() { select(previous_); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

/// Compressed-row view consumed by spmv.
struct CsrView {
  std::size_t rows = 0;
  const std::int64_t* row_ptr = nullptr;
  const std::int32_t* cols = nullptr;
  const double* vals = nullptr;
};

double dot(std::span<const double> x, std::span<const double> y);
/// sum_i w_i * x_i * y_i
double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y);
/// sum_i w_i * x_i
double weighted_sum(std::span<const double> w, std::span<const double> x);
double max_abs(std::span<const double> x);

/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// y = x + a * y
void xpay(std::span<const double> x, double a, std::span<double> y);
/// out = x .* y
void hadamard(std::span<const double> x, std::span<const double> y,
              std::span<double> out);
/// y = A x
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);

/// Raw per-variant entry points. Exposed so equivalence tests can compare
/// variants without touching the global selection.
struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  double (*weighted_dot)(const double*, const double*, const double*, std::size_t);
  double (*weighted_sum)(const double*, const double*, std::size_t);
  double (*max_abs)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*xpay)(const double*, double, double*, std::size_t);
  void (*hadamard)(const double*, const double*, double*, std::size_t);
  void (*spmv)(const CsrView&, const double*, double*);
};

const Table& table(Isa isa);

namespace detail {
const Table& scalar_table() noexcept;
// Null when the AVX2 variant was not compiled in.
const Table* avx2_table() noexcept;
}  // namespace detail

}  // namespace kvt::kernels
