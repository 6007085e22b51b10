#include <atomic>
#include <cstdlib>
#include <string>

#include "kvt/errors.hpp"
#include "kvt/kernels.hpp"

namespace kvt::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa initial_isa() noexcept {
  const char* env = std::getenv("KVT_SIMD");
  if (env != nullptr && std::string(env) == "scalar") return Isa::Scalar;
  return supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

inline const Table& t() { return table(current().load(std::memory_order_relaxed)); }

void check_same(std::size_t a, std::size_t b) {
  if (a != b) throw UsageError("kernels: operand lengths differ");
}

}  // namespace

std::string_view name(Isa isa) noexcept {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool supported(Isa isa) noexcept {
  if (isa == Isa::Scalar) return true;
  return detail::avx2_table() != nullptr && cpu_has_avx2();
}

Isa active() noexcept { return current().load(std::memory_order_relaxed); }

void select(Isa isa) {
  if (!supported(isa)) {
    throw UsageError("kernels: variant '" + std::string(name(isa)) +
                     "' is not available on this CPU/build");
  }
  current().store(isa, std::memory_order_relaxed);
}

const Table& table(Isa isa) {
  if (isa == Isa::Avx2) {
    if (!supported(Isa::Avx2)) throw UsageError("kernels: avx2 variant unavailable");
    return *detail::avx2_table();
  }
  return detail::scalar_table();
}

double dot(std::span<const double> x, std::span<const double> y) {
  check_same(x.size(), y.size());
  return t().dot(x.data(), y.data(), x.size());
}

double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y) {
  check_same(w.size(), x.size());
  check_same(w.size(), y.size());
  return t().weighted_dot(w.data(), x.data(), y.data(), w.size());
}

double weighted_sum(std::span<const double> w, std::span<const double> x) {
  check_same(w.size(), x.size());
  return t().weighted_sum(w.data(), x.data(), w.size());
}

double max_abs(std::span<const double> x) { return t().max_abs(x.data(), x.size()); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  check_same(x.size(), y.size());
  t().axpy(a, x.data(), y.data(), x.size());
}

void xpay(std::span<const double> x, double a, std::span<double> y) {
  check_same(x.size(), y.size());
  t().xpay(x.data(), a, y.data(), x.size());
}

void hadamard(std::span<const double> x, std::span<const double> y,
              std::span<double> out) {
  check_same(x.size(), y.size());
  check_same(x.size(), out.size());
  t().hadamard(x.data(), y.data(), out.data(), x.size());
}

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
  if (y.size() != a.rows) throw UsageError("kernels: spmv output length mismatch");
  t().spmv(a, x.data(), y.data());
}

}  // namespace kvt::kernels
