#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "kvt/errors.hpp"
#include "kvt/mms.hpp"

using namespace kvt;
using namespace kvt::mms;

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 add(Vec3 a, const Vec3& b, double s = 1.0) {
  for (std::size_t i = 0; i < 3; ++i) a[i] += s * b[i];
  return a;
}

Vec3 unit(int a, double h) {
  Vec3 e{0.0, 0.0, 0.0};
  e[static_cast<std::size_t>(a)] = h;
  return e;
}

// Finite-difference strain of w(x) where w is any vector map.
template <class F>
SymTensor fd_strain(const F& w, const Vec3& x, int dim, double h) {
  double grad[3][3] = {};
  for (int b = 0; b < dim; ++b) {
    const Vec3 wp = w(add(x, unit(b, h)));
    const Vec3 wm = w(add(x, unit(b, -h)));
    for (int a = 0; a < 3; ++a) {
      grad[a][b] = (wp[static_cast<std::size_t>(a)] - wm[static_cast<std::size_t>(a)]) / (2.0 * h);
    }
  }
  SymTensor e;
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) e.at(a, b) = 0.5 * (grad[a][b] + grad[b][a]);
  }
  return e;
}

}  // namespace

TEST_CASE("separable field derivatives match finite differences") {
  const SeparableField f({Term{1.5, {TimeKind::Sin, 2.0}, {SpaceFactor{Profile::Sin, 1}, SpaceFactor{Profile::Cos, 2}, SpaceFactor{}}},
                          Term{-0.5, {TimeKind::Exp, -1.0}, {SpaceFactor{Profile::Cos, 3}, SpaceFactor{}, SpaceFactor{Profile::Sin, 1}}}},
                         Vec3{1.0, 2.0, 0.5});
  const Vec3 x{0.31, 0.77, 0.12};
  const double t = 0.4, h = 1e-4;
  for (int a = 0; a < 3; ++a) {
    const double fd = (f.eval(add(x, unit(a, h)), t) - f.eval(add(x, unit(a, -h)), t)) / (2.0 * h);
    CHECK(f.dx(a, x, t) == doctest::Approx(fd).epsilon(1e-7));
    for (int b = 0; b < 3; ++b) {
      const double fdd = (f.dx(a, add(x, unit(b, h)), t) - f.dx(a, add(x, unit(b, -h)), t)) / (2.0 * h);
      CHECK(f.dxx(a, b, x, t) == doctest::Approx(fdd).epsilon(1e-6));
    }
  }
  const double ft = (f.eval(x, t + h) - f.eval(x, t - h)) / (2.0 * h);
  CHECK(f.eval(x, t, 1) == doctest::Approx(ft).epsilon(1e-7));
  const double ftt = (f.eval(x, t + h, 1) - f.eval(x, t - h, 1)) / (2.0 * h);
  CHECK(f.eval(x, t, 2) == doctest::Approx(ftt).epsilon(1e-6));
  CHECK(f.laplacian(x, t, 0, 3) ==
        doctest::Approx(f.dxx(0, 0, x, t) + f.dxx(1, 1, x, t) + f.dxx(2, 2, x, t)));
  CHECK(f.laplacian(x, t, 0, 2) == doctest::Approx(f.dxx(0, 0, x, t) + f.dxx(1, 1, x, t)));
}

TEST_CASE("zero case needs no forcing") {
  const auto c = manufacture(builtin_case("zero"));
  const Vec3 x{0.3, 0.6, 0.0};
  CHECK(c.heat_supply(x, 0.5) == 0.0);
  const Vec3 b = c.body_force(x, 0.5);
  CHECK(b == Vec3{0.0, 0.0, 0.0});
  CHECK(c.theta_min() == 1.0);
}

TEST_CASE("thermal case forcing by hand") {
  // theta = 2 + cos(pi x) e^-t, u = 0:
  //   g = cv theta theta_t - k lap theta,  b = div(theta A2 alpha) = (A2 alpha) grad theta.
  const auto c = manufacture(builtin_case("thermal"));
  const auto& p = c.params();
  const SymTensor m = thermal_stress_modulus(p);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 10; ++s) {
    const Vec3 x{u(rng), u(rng), 0.0};
    const double t = u(rng);
    const double e = std::exp(-t), cx = std::cos(kPi * x[0]), sx = std::sin(kPi * x[0]);
    const double theta = 2.0 + cx * e;
    const double g = p.cv * theta * (-cx * e) + p.k * kPi * kPi * cx * e;
    CHECK(c.heat_supply(x, t) == doctest::Approx(g).epsilon(1e-12));
    const double dth = -kPi * sx * e;
    const Vec3 b = c.body_force(x, t);
    CHECK(b[0] == doctest::Approx(m.at(0, 0) * dth).epsilon(1e-12));
    CHECK(b[1] == doctest::Approx(m.at(1, 0) * dth).epsilon(1e-12));
  }
}

TEST_CASE("forcing solves the continuous equations (finite-difference residual)") {
  for (const char* id : {"default", "default3d"}) {
    CAPTURE(id);
    const auto c = manufacture(builtin_case(id));
    const auto& p = c.params();
    const int dim = c.dim();
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    const double h = 1e-3;
    for (int s = 0; s < 10; ++s) {
      Vec3 x{u(rng), u(rng), dim == 3 ? u(rng) : 0.0};
      const double t = u(rng);
      auto disp = [&](double tt) { return [&c, tt](const Vec3& y) { return c.u(y, tt); }; };
      auto vel = [&](const Vec3& y, double tt) {
        const Vec3 a = c.u(y, tt + h), b = c.u(y, tt - h);
        return Vec3{(a[0] - b[0]) / (2 * h), (a[1] - b[1]) / (2 * h), (a[2] - b[2]) / (2 * h)};
      };
      // Total stress from finite-difference kinematics.
      auto sigma = [&](const Vec3& y) {
        const SymTensor e = fd_strain(disp(t), y, dim, h);
        const SymTensor et = fd_strain([&](const Vec3& z) { return vel(z, t); }, y, dim, h);
        return stress(e, et, c.theta(y, t), p);
      };
      const Vec3 up = c.u(x, t + h), u0 = c.u(x, t), um = c.u(x, t - h);
      for (int i = 0; i < dim; ++i) {
        const auto si = static_cast<std::size_t>(i);
        double div = 0.0;
        for (int j = 0; j < dim; ++j) {
          div += (sigma(add(x, unit(j, h))).at(i, j) - sigma(add(x, unit(j, -h))).at(i, j)) / (2.0 * h);
        }
        const double utt = (up[si] - 2.0 * u0[si] + um[si]) / (h * h);
        CHECK(c.body_force(x, t)[si] == doctest::Approx(utt - div).epsilon(1e-4).scale(1.0));
      }
      // Heat: cv theta theta_t - k lap theta + theta M . eps_t - (A1 eps_t) . eps_t.
      const double th = c.theta(x, t);
      const double th_t = (c.theta(x, t + h) - c.theta(x, t - h)) / (2.0 * h);
      double lap = 0.0;
      for (int a = 0; a < dim; ++a) {
        lap += (c.theta(add(x, unit(a, h)), t) - 2.0 * th + c.theta(add(x, unit(a, -h)), t)) / (h * h);
      }
      const SymTensor et = fd_strain([&](const Vec3& z) { return vel(z, t); }, x, dim, h);
      const double g = p.cv * th * th_t - p.k * lap + th * ddot(thermal_stress_modulus(p), et) -
                       ddot(apply_A(1, et, p), et);
      CHECK(c.heat_supply(x, t) == doctest::Approx(g).epsilon(1e-4).scale(1.0));
    }
  }
}

TEST_CASE("cases violating the boundary conditions are rejected") {
  CaseSpec spec = builtin_case("default");
  // cos profile: u does not vanish at x = 0.
  spec.u[0] = SeparableField({Term{0.1, {}, {SpaceFactor{Profile::Cos, 1}, SpaceFactor{Profile::Sin, 1}, SpaceFactor{}}}},
                             spec.length);
  CHECK_THROWS_AS(manufacture(spec), UsageError);

  spec = builtin_case("default");
  // sin profile: nonzero normal derivative of theta at x = 0.
  spec.theta = SeparableField({Term{2.0, {}, {}}, Term{0.1, {}, {SpaceFactor{Profile::Sin, 1}, SpaceFactor{}, SpaceFactor{}}}},
                              spec.length);
  CHECK_THROWS_AS(manufacture(spec), UsageError);

  spec = builtin_case("thermal");
  spec.theta = SeparableField({Term{0.5, {}, {}}, Term{1.0, {}, {SpaceFactor{Profile::Cos, 1}, SpaceFactor{}, SpaceFactor{}}}},
                              spec.length);
  CHECK_THROWS_AS(manufacture(spec), UsageError);

  CHECK_THROWS_AS(builtin_case("nope"), UsageError);
}

TEST_CASE("sampled states respect the boundary data") {
  const auto c = manufacture(builtin_case("default"));
  const auto g = c.make_grid(9);
  const auto s = c.sample(g, 0.3);
  CHECK(s.t == 0.3);
  CHECK(boundary_max_abs(s.u) == 0.0);
  CHECK(boundary_max_abs(s.v) == 0.0);
  CHECK_NOTHROW(s.validate());
  const std::size_t mid = g->index(4, 2);
  CHECK(s.theta(mid) == c.theta(g->coord(mid), 0.3));
  CHECK(s.u(mid, 1) == c.u(g->coord(mid), 0.3)[1]);
}

TEST_CASE("order fit") {
  const std::vector<double> steps{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> err;
  for (double h : steps) err.push_back(3.0 * h * h);
  err[0] *= 10.0;  // the coarsest point is excluded from the fit
  CHECK(fit_order(steps, err) == doctest::Approx(2.0).epsilon(1e-12));
  err[2] = 0.0;
  CHECK(std::isnan(fit_order(steps, err)));
}

TEST_CASE("stationary solution is reproduced to round-off") {
  const auto c = manufacture(builtin_case("zero"));
  StudyConfig cfg;
  cfg.resolutions = {5, 9, 17};
  cfg.dts = {0.1, 0.05, 0.025};
  cfg.t_temporal = 0.2;
  const auto rep = convergence_study(c, cfg);
  REQUIRE(rep.spatial.size() == 3);
  REQUIRE(rep.temporal.size() == 3);
  for (const auto* levels : {&rep.spatial, &rep.temporal}) {
    for (const auto& l : *levels) {
      CHECK(l.error.u <= 1e-10);
      CHECK(l.error.v <= 1e-10);
      CHECK(l.error.theta <= 1e-10);
    }
  }
  cfg.resolutions = {5, 9};
  CHECK_THROWS_AS(convergence_study(c, cfg), UsageError);
  cfg.resolutions = {5, 9, 16};
  CHECK_THROWS_AS(convergence_study(c, cfg), UsageError);
}

TEST_CASE("small study on the default case converges") {
  const auto c = manufacture(builtin_case("default"));
  const auto coarse = run_level(c, 9, 0.01, 0.05, StepperConfig{});
  const auto fine = run_level(c, 17, 0.0025, 0.05, StepperConfig{});
  CHECK(coarse.steps == 5);
  CHECK(fine.error.theta < coarse.error.theta);
  CHECK(fine.error.u < coarse.error.u);
  CHECK(std::log2(coarse.error.theta / fine.error.theta) > 1.5);
}
