#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "kvt/constitutive.hpp"
#include "kvt/errors.hpp"

using namespace kvt;

namespace {

SymTensor random_tensor(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  SymTensor t;
  for (int k = 0; k < 6; ++k) t[k] = u(rng);
  return t;
}

MaterialParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.1, 3.0);
  MaterialParams p;
  p.mu1 = pos(rng);
  p.mu2 = pos(rng);
  // Anywhere in the elasticity range, including negative lambda.
  p.lambda1 = std::uniform_real_distribution<double>(-2.0 * p.mu1 / 3.0 + 1e-3, 3.0)(rng);
  p.lambda2 = std::uniform_real_distribution<double>(-2.0 * p.mu2 / 3.0 + 1e-3, 3.0)(rng);
  p.k = pos(rng);
  p.cv = pos(rng);
  p.beta = pos(rng);
  p.alpha = random_tensor(rng, 0.5);
  return p;
}

MaterialParams unit_params() {
  MaterialParams p;
  p.lambda1 = p.mu1 = p.lambda2 = p.mu2 = 1.0;
  p.k = 1.0;
  p.cv = 1.0;
  p.alpha = SymTensor::identity();
  return p;
}

bool close(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * (1.0 + std::abs(a) + std::abs(b));
}

bool close(const SymTensor& a, const SymTensor& b, double rel = 1e-12) {
  for (int k = 0; k < 6; ++k) {
    if (!close(a[k], b[k], rel)) return false;
  }
  return true;
}

constexpr int kSamples = 10000;

}  // namespace

TEST_CASE("symmetric tensor storage") {
  SymTensor t;
  t.at(0, 1) = 2.0;
  CHECK(t.at(1, 0) == 2.0);
  CHECK(t[SymTensor::XY] == 2.0);
  t.at(2, 1) = -1.0;
  CHECK(t[SymTensor::YZ] == -1.0);
  // Off-diagonal entries count twice in the double-dot product.
  const SymTensor a{{1, 2, 3, 4, 5, 6}};
  const SymTensor b{{1, 1, 1, 1, 1, 1}};
  CHECK(ddot(a, b) == 1 + 2 + 3 + 2 * (4 + 5 + 6));
  CHECK(norm(SymTensor::identity()) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("apply_A examples") {
  MaterialParams p;
  p.lambda2 = 1.0;
  p.mu2 = 1.0;
  CHECK(apply_A(2, SymTensor::identity(), p) == SymTensor::diag(5, 5, 5));
  CHECK(apply_A(1, SymTensor::zero(), p) == SymTensor::zero());
  p.lambda2 = 2.0;
  CHECK(apply_A(Tensor::Elasticity, SymTensor::diag(1, -1, 0), p) == SymTensor::diag(2, -2, 0));
  CHECK_THROWS_AS(apply_A(0, SymTensor::identity(), p), UsageError);
  CHECK_THROWS_AS(apply_A(3, SymTensor::identity(), p), UsageError);
}

TEST_CASE("coercivity bounds examples") {
  MaterialParams p;
  p.lambda1 = 1.0;
  p.mu1 = 1.0;
  auto b = coercivity_bounds(1, p);
  CHECK(b.a_star == 2.0);
  CHECK(b.a_sup == 5.0);
  // lambda = 0: 3 lambda + 2 mu = 2 mu, so both bounds coincide.
  p.lambda1 = 0.0;
  b = coercivity_bounds(1, p);
  CHECK(b.a_star == 2.0);
  CHECK(b.a_sup == 2.0);
  p.lambda1 = -0.5;
  CHECK(p.violations().empty());
  b = coercivity_bounds(Tensor::Viscosity, p);
  CHECK(b.a_star == 0.5);
  CHECK(b.a_sup == 2.0);
  CHECK_THROWS_AS(coercivity_bounds(7, p), UsageError);
}

TEST_CASE("stress, free energy, internal energy and entropy examples") {
  const MaterialParams p = unit_params();
  const SymTensor I = SymTensor::identity();
  CHECK(stress(SymTensor::zero(), SymTensor::zero(), 0.0, p) == SymTensor::zero());
  CHECK(stress(I, SymTensor::zero(), 0.0, p) == SymTensor::diag(5, 5, 5));
  CHECK(stress(SymTensor::zero(), SymTensor::zero(), 2.0, p) == SymTensor::diag(-10, -10, -10));

  CHECK(free_energy(SymTensor::zero(), 3.0, p) == -4.5);
  CHECK(free_energy(I, 0.0, p) == 7.5);
  CHECK(free_energy(I, 1.0, p) == -8.0);

  CHECK(internal_energy(SymTensor::zero(), 2.0, p) == 2.0);
  CHECK(entropy_density(SymTensor::zero(), 2.0, p) == 2.0);
  CHECK(internal_energy(I, 0.0, p) == 7.5);
  CHECK(entropy_density(I, 0.0, p) == 15.0);
}

TEST_CASE("dissipation, entropy production and heat source examples") {
  MaterialParams p = unit_params();
  const SymTensor I = SymTensor::identity();
  const Vec3 zero{0, 0, 0};
  CHECK(dissipation_potential(SymTensor::zero(), zero, 1.0, p) == 0.0);
  CHECK(dissipation_potential(I, zero, 1.0, p) == 7.5);
  CHECK(dissipation_potential(SymTensor::zero(), Vec3{2, 0, 0}, 2.0, p) == 0.5);
  CHECK_THROWS_AS(dissipation_potential(I, zero, 0.0, p), DomainError);
  CHECK_THROWS_AS(dissipation_potential(I, zero, -1.0, p), DomainError);

  CHECK(entropy_production(SymTensor::zero(), zero, 1.0, p) == 0.0);
  CHECK(entropy_production(I, zero, 1.0, p) == 15.0);
  CHECK_THROWS_AS(entropy_production(I, zero, 0.0, p), DomainError);

  CHECK(heat_rhs(0.0, SymTensor::zero(), 0.0, p) == 0.0);
  CHECK(heat_rhs(1.0, I, 0.0, p) == 0.0);
  p.alpha = SymTensor::zero();
  CHECK(heat_rhs(1.0, I, 2.0, p) == 17.0);
}

TEST_CASE("parameter validation cites the violated rule") {
  MaterialParams p;
  CHECK(p.violations().empty());
  p.mu1 = 0.0;
  auto v = p.violations();
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("mu1") != std::string::npos);
  CHECK(v[0].find("mu_p > 0") != std::string::npos);
  p = MaterialParams{};
  p.lambda2 = -1.0;  // 3 * (-1) + 2 * 1 < 0
  v = p.violations();
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("3*lambda_p + 2*mu_p > 0") != std::string::npos);
  p = MaterialParams{};
  p.k = 0.0;
  p.cv = -1.0;
  p.beta = 0.0;
  CHECK(p.violations().size() == 3);
  CHECK_THROWS_AS(p.validate(), UsageError);
}

TEST_CASE("property: symmetry of A_p") {
  std::mt19937_64 rng(11);
  for (int s = 0; s < kSamples; ++s) {
    const MaterialParams p = random_params(rng);
    const SymTensor e = random_tensor(rng);
    const SymTensor z = random_tensor(rng);
    for (int k : {1, 2}) {
      const double lhs = ddot(apply_A(k, e, p), z);
      const double rhs = ddot(e, apply_A(k, z, p));
      REQUIRE(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST_CASE("property: coercivity and boundedness of A_p") {
  std::mt19937_64 rng(12);
  for (int s = 0; s < kSamples; ++s) {
    const MaterialParams p = random_params(rng);
    const SymTensor e = random_tensor(rng);
    const double e2 = ddot(e, e);
    for (int k : {1, 2}) {
      const auto b = coercivity_bounds(k, p);
      const double q = ddot(apply_A(k, e, p), e);
      REQUIRE(b.a_star > 0.0);
      REQUIRE(b.a_star <= b.a_sup);
      REQUIRE(q >= b.a_star * e2 - 1e-12 * b.a_sup * e2);
      REQUIRE(q <= b.a_sup * e2 + 1e-12 * b.a_sup * e2);
    }
  }
}

TEST_CASE("coercivity bounds are attained") {
  // Pure dilatation attains 3 lambda + 2 mu, a traceless tensor attains 2 mu.
  std::mt19937_64 rng(13);
  for (int s = 0; s < 100; ++s) {
    const MaterialParams p = random_params(rng);
    const auto b = coercivity_bounds(2, p);
    const SymTensor dil = SymTensor::identity();
    const SymTensor dev{{1, -1, 0, 0.3, 0, 0}};
    const double qd = ddot(apply_A(2, dil, p), dil) / ddot(dil, dil);
    const double qv = ddot(apply_A(2, dev, p), dev) / ddot(dev, dev);
    CHECK(close(std::min(qd, qv), b.a_star));
    CHECK(close(std::max(qd, qv), b.a_sup));
  }
}

TEST_CASE("property: thermodynamic consistency e = f + theta eta, eta = -df/dtheta") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> th(0.1, 5.0);
  for (int s = 0; s < kSamples; ++s) {
    const MaterialParams p = random_params(rng);
    const SymTensor e = random_tensor(rng);
    const double t = th(rng);
    const double ie = internal_energy(e, t, p);
    const double eta = entropy_density(e, t, p);
    REQUIRE(std::abs(ie - (free_energy(e, t, p) + t * eta)) <= 1e-12 * (1.0 + std::abs(ie) + std::abs(t * eta)));
    // f is quadratic in theta, so the central difference is exact up to round-off.
    const double h = 1e-3;
    const double fd = (free_energy(e, t - h, p) - free_energy(e, t + h, p)) / (2.0 * h);
    REQUIRE(std::abs(eta - fd) <= 1e-8 * (1.0 + std::abs(eta)));
  }
}

TEST_CASE("property: stress splits into df/deps plus theta dD/deps_t") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> th(0.1, 5.0);
  for (int s = 0; s < 2000; ++s) {
    const MaterialParams p = random_params(rng);
    const SymTensor e = random_tensor(rng);
    const SymTensor et = random_tensor(rng);
    const double t = th(rng);
    const SymTensor S = stress(e, et, t, p);
    const Vec3 zero{0, 0, 0};
    const double h = 1e-4;
    for (int k = 0; k < 6; ++k) {
      // d/dc_k of a function of the stored components equals the tensor
      // derivative entry, doubled for off-diagonal slots.
      const double mult = k < 3 ? 1.0 : 2.0;
      SymTensor ep = e, em = e, tp = et, tm = et;
      ep[k] += h;
      em[k] -= h;
      tp[k] += h;
      tm[k] -= h;
      const double df = (free_energy(ep, t, p) - free_energy(em, t, p)) / (2.0 * h);
      const double dd = t * (dissipation_potential(tp, zero, t, p) - dissipation_potential(tm, zero, t, p)) / (2.0 * h);
      REQUIRE(std::abs(mult * S[k] - (df + dd)) <= 1e-7 * (1.0 + std::abs(S[k])));
    }
    // Analytic viscous part.
    const SymTensor viscous = S - stress(e, SymTensor::zero(), t, p);
    REQUIRE(close(viscous, apply_A(1, et, p), 1e-12));
  }
}

TEST_CASE("property: entropy production and dissipation are nonnegative") {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> th(1e-3, 10.0);
  std::uniform_real_distribution<double> gr(-5.0, 5.0);
  for (int s = 0; s < kSamples; ++s) {
    const MaterialParams p = random_params(rng);
    const SymTensor et = random_tensor(rng, 3.0);
    const Vec3 g{gr(rng), gr(rng), gr(rng)};
    const double t = th(rng);
    const double sigma = entropy_production(et, g, t, p);
    const double d = dissipation_potential(et, g, t, p);
    REQUIRE(sigma >= 0.0);
    REQUIRE(d >= 0.0);
    // sigma = 2 D for this quadratic potential.
    REQUIRE(close(sigma, 2.0 * d, 1e-12));
  }
}

TEST_CASE("derived constants of the lower bound and the difference estimate") {
  MaterialParams p;
  p.lambda1 = 1.0;
  p.mu1 = 1.0;  // a_1* = 2
  p.lambda2 = 1.0;
  p.mu2 = 1.0;
  p.cv = 2.0;
  p.alpha = SymTensor::identity();  // A2 alpha = 5 I, |.|^2 = 75
  CHECK(default_lower_bound_rate(p) == doctest::Approx(75.0 / (4.0 * 2.0 * 2.0)));
  CHECK(default_gronwall_c1(p) == doctest::Approx(75.0 / (2.0 * 2.0)));

  // The rate bounds the worst-case cooling: for any strain rate,
  // -theta M.e + (A1 e).e >= -c0 cv theta^2.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> th(0.1, 5.0);
  for (int s = 0; s < kSamples; ++s) {
    const MaterialParams q = random_params(rng);
    const SymTensor e = random_tensor(rng, 5.0);
    const double t = th(rng);
    const double lhs = heat_rhs(t, e, 0.0, q);
    const double bound = -default_lower_bound_rate(q) * q.cv * t * t;
    REQUIRE(lhs >= bound - 1e-12 * (1.0 + std::abs(bound)));
  }
}
