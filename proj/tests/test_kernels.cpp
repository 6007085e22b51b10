#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "kvt/errors.hpp"
#include "kvt/kernels.hpp"

using namespace kvt::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

double abs_sum_products(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] * y[i]);
  return s;
}

struct Csr {
  std::vector<std::int64_t> ptr{0};
  std::vector<std::int32_t> cols;
  std::vector<double> vals;
  CsrView view(std::size_t rows) const { return {rows, ptr.data(), cols.data(), vals.data()}; }
};

Csr random_csr(std::mt19937_64& rng, std::size_t n) {
  Csr m;
  std::uniform_int_distribution<int> len(0, 13);
  std::uniform_int_distribution<std::int32_t> col(0, static_cast<std::int32_t>(n - 1));
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  for (std::size_t r = 0; r < n; ++r) {
    const int k = len(rng);
    for (int j = 0; j < k; ++j) {
      m.cols.push_back(col(rng));
      m.vals.push_back(val(rng));
    }
    m.ptr.push_back(static_cast<std::int64_t>(m.cols.size()));
  }
  return m;
}

}  // namespace

TEST_CASE("scalar reductions follow strict left-to-right order") {
  std::mt19937_64 rng(1);
  const auto& s = table(Isa::Scalar);
  for (std::size_t n : {0u, 1u, 7u, 100u}) {
    const auto x = random_vec(rng, n);
    const auto y = random_vec(rng, n);
    const auto w = random_vec(rng, n);
    double d = 0.0, wd = 0.0, ws = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d += x[i] * y[i];
      wd += w[i] * x[i] * y[i];
      ws += w[i] * x[i];
    }
    CHECK(s.dot(x.data(), y.data(), n) == d);
    CHECK(s.weighted_dot(w.data(), x.data(), y.data(), n) == wd);
    CHECK(s.weighted_sum(w.data(), x.data(), n) == ws);
  }
}

TEST_CASE("simd variants agree with the scalar reference") {
  if (!supported(Isa::Avx2)) {
    MESSAGE("AVX2 not available on this machine; equivalence test skipped");
    return;
  }
  const auto& s = table(Isa::Scalar);
  const auto& v = table(Isa::Avx2);
  std::mt19937_64 rng(42);
  for (std::size_t n = 0; n <= 67; ++n) {
    CAPTURE(n);
    const auto x = random_vec(rng, n);
    const auto y = random_vec(rng, n, 10.0);
    const auto w = random_vec(rng, n);

    // Elementwise kernels: bit-identical.
    auto y1 = y, y2 = y;
    s.axpy(0.37, x.data(), y1.data(), n);
    v.axpy(0.37, x.data(), y2.data(), n);
    CHECK(same_bits(y1, y2));
    y1 = y;
    y2 = y;
    s.xpay(x.data(), -1.9, y1.data(), n);
    v.xpay(x.data(), -1.9, y2.data(), n);
    CHECK(same_bits(y1, y2));
    std::vector<double> h1(n), h2(n);
    s.hadamard(x.data(), y.data(), h1.data(), n);
    v.hadamard(x.data(), y.data(), h2.data(), n);
    CHECK(same_bits(h1, h2));
    CHECK(s.max_abs(y.data(), n) == v.max_abs(y.data(), n));

    // Reductions: same value up to reassociation.
    const double tol = 1e-15 * (abs_sum_products(x, y) + 1e-300) * 4.0;
    CHECK(std::abs(s.dot(x.data(), y.data(), n) - v.dot(x.data(), y.data(), n)) <= tol * 10.0);
    std::vector<double> wx(n);
    for (std::size_t i = 0; i < n; ++i) wx[i] = w[i] * x[i];
    const double tolw = 40.0e-15 * (abs_sum_products(wx, y) + 1e-300);
    CHECK(std::abs(s.weighted_dot(w.data(), x.data(), y.data(), n) -
                   v.weighted_dot(w.data(), x.data(), y.data(), n)) <= tolw);
    const double tols = 40.0e-15 * (abs_sum_products(w, x) + 1e-300);
    CHECK(std::abs(s.weighted_sum(w.data(), x.data(), n) - v.weighted_sum(w.data(), x.data(), n)) <= tols);
  }
}

TEST_CASE("simd spmv agrees with the scalar reference") {
  if (!supported(Isa::Avx2)) return;
  std::mt19937_64 rng(7);
  for (std::size_t n : {1u, 5u, 64u, 301u}) {
    const Csr m = random_csr(rng, n);
    const auto x = random_vec(rng, n);
    std::vector<double> y1(n), y2(n);
    table(Isa::Scalar).spmv(m.view(n), x.data(), y1.data());
    table(Isa::Avx2).spmv(m.view(n), x.data(), y2.data());
    for (std::size_t r = 0; r < n; ++r) {
      double mag = 0.0;
      for (auto k = m.ptr[r]; k < m.ptr[r + 1]; ++k) {
        mag += std::abs(m.vals[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(m.cols[static_cast<std::size_t>(k)])]);
      }
      CHECK(std::abs(y1[r] - y2[r]) <= 1e-14 * mag + 1e-300);
    }
  }
}

TEST_CASE("reductions are reproducible call to call") {
  std::mt19937_64 rng(3);
  const auto x = random_vec(rng, 1001);
  const auto y = random_vec(rng, 1001);
  for (Isa isa : {Isa::Scalar, Isa::Avx2}) {
    if (!supported(isa)) continue;
    const auto& t = table(isa);
    const double a = t.dot(x.data(), y.data(), x.size());
    for (int k = 0; k < 5; ++k) CHECK(std::bit_cast<std::uint64_t>(t.dot(x.data(), y.data(), x.size())) == std::bit_cast<std::uint64_t>(a));
  }
}

TEST_CASE("dispatch selection and length checks") {
  const Isa before = active();
  {
    ScopedIsa guard(Isa::Scalar);
    CHECK(active() == Isa::Scalar);
  }
  CHECK(active() == before);
  CHECK(name(Isa::Scalar) == "scalar");
  CHECK(name(Isa::Avx2) == "avx2");

  std::vector<double> a(3, 1.0), b(4, 1.0);
  CHECK_THROWS_AS(dot(a, b), kvt::UsageError);
  CHECK_THROWS_AS(axpy(1.0, a, b), kvt::UsageError);
  CHECK(dot(a, a) == 3.0);
  CHECK(max_abs(std::vector<double>{}) == 0.0);
}
