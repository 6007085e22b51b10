#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "kvt/errors.hpp"
#include "kvt/grid.hpp"
#include "kvt/kernels.hpp"
#include "kvt/linear_step.hpp"

using namespace kvt;

namespace {

using Entry = SparseOperator::Entry;

SparseOperator tridiagonal(std::size_t n, double diag, double off) {
  std::vector<Entry> e;
  for (std::size_t i = 0; i < n; ++i) {
    e.push_back({i, i, diag});
    if (i + 1 < n) {
      e.push_back({i, i + 1, off});
      e.push_back({i + 1, i, off});
    }
  }
  return SparseOperator::from_entries(n, std::move(e), true);
}

// Thomas algorithm for a constant tridiagonal matrix.
std::vector<double> thomas(double diag, double off, std::vector<double> d) {
  const std::size_t n = d.size();
  std::vector<double> c(n, 0.0);
  double denom = diag;
  c[0] = off / denom;
  d[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag - off * c[i - 1];
    c[i] = off / denom;
    d[i] = (d[i] - off * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
  return d;
}

// Dense Cholesky solve, row-major a (n x n).
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double s = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) s -= a[j * n + k] * a[j * n + k];
    a[j * n + j] = std::sqrt(s);
    for (std::size_t i = j + 1; i < n; ++i) {
      double t = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) t -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = t / a[j * n + j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= a[i * n + k] * b[k];
    b[i] /= a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= a[k * n + i] * b[k];
    b[i] /= a[i * n + i];
  }
  return b;
}

double rel_residual(const SparseOperator& a, const std::vector<double>& x, const std::vector<double>& b) {
  const auto ax = a.apply(x);
  double r = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    r += (b[i] - ax[i]) * (b[i] - ax[i]);
    nb += b[i] * b[i];
  }
  return std::sqrt(r / nb);
}

MaterialParams test_params() {
  MaterialParams p;
  p.lambda1 = 0.5;
  p.mu1 = 0.8;
  p.lambda2 = 1.2;
  p.mu2 = 0.9;
  p.k = 0.7;
  p.cv = 1.3;
  p.alpha = SymTensor{{0.2, 0.1, 0.3, 0.05, 0.0, -0.02}};
  return p;
}

}  // namespace

TEST_CASE("sparse operator assembly sums duplicates") {
  const auto a = SparseOperator::from_entries(
      2, {{0, 0, 1.0}, {0, 1, 2.0}, {0, 0, 3.0}, {1, 0, 2.0}, {1, 1, 5.0}}, true);
  CHECK(a.dimension() == 2);
  CHECK(a.nonzeros() == 4);
  CHECK(a.at(0, 0) == 4.0);
  CHECK(a.at(1, 0) == 2.0);
  CHECK(a.diagonal() == std::vector<double>{4.0, 5.0});
  CHECK(a.apply(std::vector<double>{1.0, -1.0}) == std::vector<double>{2.0, -3.0});
  CHECK(a.bitwise_symmetric());
  CHECK(a.row_sums() == std::vector<double>{6.0, 7.0});
  const auto b = SparseOperator::from_entries(2, {{0, 1, 1.0}, {1, 0, 1.0 + 1e-15}}, false);
  CHECK_FALSE(b.bitwise_symmetric());
  CHECK_THROWS_AS(SparseOperator::from_entries(2, {{2, 0, 1.0}}, false), UsageError);
}

TEST_CASE("identity system solves in one iteration") {
  const auto a = tridiagonal(10, 1.0, 0.0);
  std::vector<double> b(10);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = static_cast<double>(i) - 3.5;
  const auto r = solve_spd(a, b, 1e-14, 10);
  CHECK(r.report.converged);
  CHECK(r.report.iterations == 1);
  CHECK(r.solution == b);
}

TEST_CASE("five-point Poisson system matches the Thomas algorithm") {
  const auto a = tridiagonal(5, 2.0, -1.0);
  const std::vector<double> b{1.0, 0.0, -2.0, 0.5, 3.0};
  const auto r = solve_spd(a, b, 1e-14, 100);
  const auto x = thomas(2.0, -1.0, b);
  for (std::size_t i = 0; i < 5; ++i) CHECK(r.solution[i] == doctest::Approx(x[i]).epsilon(1e-12));
  CHECK(r.report.iterations <= 5);
}

TEST_CASE("dense SPD system matches a Cholesky oracle under both kernel sets") {
  const std::size_t n = 50;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> bm(n * n), dense(n * n, 0.0), rhs(n);
  for (auto& v : bm) v = u(rng);
  for (auto& v : rhs) v = u(rng);
  std::vector<Entry> e;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = i == j ? 1.0 : 0.0;
      for (std::size_t k = 0; k < n; ++k) s += bm[k * n + i] * bm[k * n + j];
      dense[i * n + j] = s;
    }
  }
  // Symmetrize bitwise so the operator is exactly symmetric.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) dense[j * n + i] = dense[i * n + j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) e.push_back({i, j, dense[i * n + j]});
  }
  const auto a = SparseOperator::from_entries(n, e, true);
  const auto x = cholesky_solve(dense, rhs, n);
  for (auto isa : {kernels::Isa::Scalar, kernels::Isa::Avx2}) {
    if (!kernels::supported(isa)) continue;
    kernels::ScopedIsa scope(isa);
    const auto r = solve_spd(a, rhs, 1e-13, 10000);
    REQUIRE(r.report.converged);
    double err = 0.0, nx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err = std::max(err, std::abs(r.solution[i] - x[i]));
      nx = std::max(nx, std::abs(x[i]));
    }
    CHECK(err <= 1e-8 * nx);
  }
}

TEST_CASE("reported residual is the recomputed true residual") {
  const auto a = tridiagonal(200, 2.0, -1.0);
  std::vector<double> b(200);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::sin(0.1 * static_cast<double>(i));
  const auto r = solve_spd(a, b, 1e-10, 1000);
  CHECK(r.report.relative_residual <= 1e-10);
  CHECK(std::abs(rel_residual(a, r.solution, b) - r.report.relative_residual) <= 1e-14);
  // A warm start from the solution finishes immediately.
  const auto warm = solve_spd(a, b, 1e-10, 1000, r.solution);
  CHECK(warm.report.iterations == 0);
}

TEST_CASE("iteration cap raises with a report") {
  const auto a = tridiagonal(200, 2.0, -1.0);
  const std::vector<double> b(200, 1.0);
  try {
    solve_spd(a, b, 1e-14, 3);
    FAIL("expected LinearSolveError");
  } catch (const LinearSolveError& e) {
    CHECK_FALSE(e.report().converged);
    CHECK(e.report().iterations == 3);
    CHECK(e.report().relative_residual > 1e-14);
  }
  CHECK_THROWS_AS(solve_spd(a, std::vector<double>(3, 1.0), 1e-10, 10), UsageError);
}

TEST_CASE("velocity operator is exactly symmetric and positive definite") {
  const auto p = test_params();
  std::mt19937_64 rng(32);
  std::normal_distribution<double> nd;
  for (int dim : {1, 2, 3}) {
    const auto g = make_grid(dim, {7, 6, 5}, {1.0, 0.8, 1.1});
    const auto a = velocity_operator(0.01, *g, p);
    CHECK(a.dimension() == g->interior_nodes().size() * static_cast<std::size_t>(dim));
    CHECK(a.bitwise_symmetric());
    for (int s = 0; s < 100; ++s) {
      std::vector<double> x(a.dimension());
      for (auto& v : x) v = nd(rng);
      const auto ax = a.apply(x);
      double q = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) q += x[i] * ax[i];
      REQUIRE(q > 0.0);
    }
  }
  CHECK_THROWS_AS(velocity_operator(0.0, *make_grid(2, {5, 5, 1}, {1, 1, 1}), p), UsageError);
}

TEST_CASE("heat operator is symmetric, positive definite, with scaled row sums") {
  const auto p = test_params();
  const double dt = 0.02;
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> th(0.5, 2.0);
  for (int dim : {1, 2, 3}) {
    const auto g = make_grid(dim, {6, 7, 5}, {1.0, 1.4, 0.6});
    ScalarField tf(g);
    for (std::size_t i = 0; i < g->size(); ++i) tf(i) = th(rng);
    const auto a = heat_operator(dt, tf, p);
    CHECK(a.dimension() == g->size());
    CHECK(a.bitwise_symmetric());
    const auto sums = a.row_sums();
    const auto w = g->normalized_weights();
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double expect = w[i] * p.cv / dt * tf(i);
      REQUIRE(std::abs(sums[i] - expect) <= 1e-10 * (1.0 + std::abs(a.at(i, i))));
    }
    for (int s = 0; s < 100; ++s) {
      std::vector<double> x(a.dimension());
      for (auto& v : x) v = th(rng) - 1.25;
      const auto ax = a.apply(x);
      double q = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) q += x[i] * ax[i];
      REQUIRE(q > 0.0);
    }
  }
}

TEST_CASE("heat system reproduces closed-form updates") {
  auto p = test_params();
  const double dt = 0.05;
  const auto g = make_grid(2, {9, 9, 1}, {1.0, 1.0, 1.0});
  const VectorField v0(g);
  const ScalarField theta(g, 1.7);

  SUBCASE("a constant temperature is a fixed point") {
    const auto sys = assemble_heat_system(dt, theta, theta, v0, ScalarField(g), p);
    const auto r = solve_spd(sys.matrix, sys.rhs, 1e-14, 500);
    for (double t : r.solution) REQUIRE(t == doctest::Approx(1.7).epsilon(1e-12));
  }
  SUBCASE("uniform supply raises the temperature by dt g / (cv theta_f)") {
    const double gval = 0.4;
    const auto sys = assemble_heat_system(dt, theta, theta, v0, ScalarField(g, gval), p);
    const auto r = solve_spd(sys.matrix, sys.rhs, 1e-14, 500);
    const double expect = 1.7 + dt * gval / (p.cv * 1.7);
    for (double t : r.solution) REQUIRE(t == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("a nonpositive frozen temperature is degenerate") {
    ScalarField bad = theta;
    bad(g->index(3, 3)) = 0.0;
    CHECK_THROWS_AS(heat_operator(dt, bad, p), DegeneracyError);
    bad(g->index(3, 3)) = -1.0;
    CHECK_THROWS_AS(assemble_heat_system(dt, theta, bad, v0, ScalarField(g), p), DegeneracyError);
  }
}

TEST_CASE("velocity step follows the short-time expansion v = dt b + dt^2 Q1 b") {
  const auto p = test_params();
  const auto g = make_grid(2, {9, 9, 1}, {1.0, 1.0, 1.0});
  VectorField b(g);
  for (std::size_t i : g->interior_nodes()) {
    const Vec3 x = g->coord(i);
    b(i, 0) = 1.0 + x[0];
    b(i, 1) = -0.5 + x[1] * x[0];
  }
  const ScalarField theta(g, 1.0);
  const VectorField zero(g);
  auto err_for = [&](double dt) {
    const auto sys = assemble_velocity_system(dt, zero, zero, theta, b, p);
    const auto r = solve_spd(sys.matrix, sys.rhs, 1e-15, 2000);
    const auto v = unpack_interior(r.solution, g);
    const auto qb = elasticity_operator(1, b, p);
    double err = 0.0;
    for (std::size_t i : g->interior_nodes()) {
      for (int c = 0; c < 2; ++c) err = std::max(err, std::abs(v(i, c) - dt * b(i, c) - dt * dt * qb(i, c)));
    }
    return err;
  };
  const double e1 = err_for(1e-4);
  const double e2 = err_for(5e-5);
  // Remainder is third order in dt.
  CHECK(std::log2(e1 / e2) == doctest::Approx(3.0).epsilon(0.05));
  CHECK(e1 <= 1e-6);
}

TEST_CASE("velocity right-hand side and layout") {
  const auto p = test_params();
  const auto g = make_grid(2, {6, 5, 1}, {1.0, 1.0, 1.0});
  VectorField v(g);
  for (std::size_t i : g->interior_nodes()) {
    v(i, 0) = static_cast<double>(i);
    v(i, 1) = -static_cast<double>(i);
  }
  const auto packed = pack_interior(v);
  CHECK(packed.size() == g->interior_nodes().size() * 2);
  CHECK(unpack_interior(packed, g) == v);

  // Constant theta and zero displacement: only v_old / dt remains.
  const double dt = 0.1;
  const auto rhs = velocity_rhs(dt, v, VectorField(g), ScalarField(g, 2.0), VectorField(g), p);
  for (std::size_t k = 0; k < rhs.size(); ++k) REQUIRE(std::abs(rhs[k] - packed[k] / dt) <= 1e-12);

  VectorField dirty = v;
  dirty(g->index(0, 2), 1) = 1.0;
  CHECK_THROWS_AS(velocity_rhs(dt, dirty, VectorField(g), ScalarField(g, 2.0), VectorField(g), p),
                  PreconditionError);
  CHECK_THROWS_AS(velocity_rhs(dt, v, dirty, ScalarField(g, 2.0), VectorField(g), p), PreconditionError);
}
