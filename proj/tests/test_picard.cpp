#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "kvt/errors.hpp"
#include "kvt/picard.hpp"

using namespace kvt;

namespace {

constexpr double kPi = std::numbers::pi;

MaterialParams params() {
  MaterialParams p;
  p.lambda1 = 0.5;
  p.mu1 = 0.5;
  p.lambda2 = 1.0;
  p.mu2 = 1.0;
  p.k = 0.5;
  p.cv = 1.0;
  p.alpha = 0.2 * SymTensor::identity();
  return p;
}

// Warm bump with a displaced and moving body.
SimState bump(int n) {
  const auto g = make_grid(2, {n, n, 1}, {1.0, 1.0, 1.0});
  SimState s(g, 1.0);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const Vec3 x = g->coord(i);
    s.theta(i) = 1.0 + 0.5 * std::cos(kPi * x[0]) * std::cos(kPi * x[1]);
    if (g->on_boundary(i)) continue;
    s.u(i, 0) = 0.05 * std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
    s.v(i, 1) = 0.2 * std::sin(2.0 * kPi * x[0]) * std::sin(kPi * x[1]);
  }
  return s;
}

double mean(const std::vector<double>& r) {
  double s = 0.0;
  for (double x : r) s += x;
  return s / static_cast<double>(r.size());
}

double rel_residual(const LinearSystem& sys, std::span<const double> x) {
  const auto ax = sys.matrix.apply(x);
  double r = 0.0, b = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    r += (ax[i] - sys.rhs[i]) * (ax[i] - sys.rhs[i]);
    b += sys.rhs[i] * sys.rhs[i];
  }
  return std::sqrt(r / b);
}

}  // namespace

TEST_CASE("state construction and validation") {
  const auto g = make_grid(2, {5, 5, 1}, {1.0, 1.0, 1.0});
  SimState s(g, 2.0, 0.5);
  CHECK(s.t == 0.5);
  CHECK(s.theta_min() == 2.0);
  CHECK(s.theta_max() == 2.0);
  CHECK_NOTHROW(s.validate());
  s.u(g->index(0, 1), 0) = 1.0;
  CHECK_THROWS_AS(s.validate(), PreconditionError);
  s = SimState(g, 2.0);
  s.theta(3) = 0.0;
  CHECK_THROWS_AS(s.validate(), PreconditionError);
  s = SimState(g, 2.0);
  s.v(g->index(2, 2), 1) = std::nan("");
  CHECK_THROWS_AS(s.validate(), PreconditionError);
}

TEST_CASE("stepper configuration is validated") {
  StepperConfig c;
  CHECK(c.violations().empty());
  c.dt = 0.0;
  c.picard_max = 0;
  c.cg_tol = -1.0;
  CHECK(c.violations().size() == 3);
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("equilibrium is a fixed point reached in one sweep") {
  const auto g = make_grid(2, {9, 9, 1}, {1.0, 1.0, 1.0});
  const SimState s(g, 1.5);
  const auto r = picard_step(s, StepperConfig{}, params(), VectorField(g), ScalarField(g));
  CHECK(r.trace.converged);
  CHECK(r.trace.iterations == 1);
  CHECK(r.state.t == doctest::Approx(0.01));
  for (double t : r.state.theta.values()) CHECK(t == doctest::Approx(1.5).epsilon(1e-13));
  CHECK(l2_norm(r.state.v) <= 1e-13);
}

TEST_CASE("converged step satisfies both implicit sub-problems") {
  const auto s = bump(17);
  const auto p = params();
  StepperConfig c;
  c.dt = 0.02;
  const auto g = s.grid_ptr();
  VectorField b(g);
  for (std::size_t i : g->interior_nodes()) b(i, 0) = 0.3;
  const ScalarField heat(g, 0.1);
  const auto r = picard_step(s, c, p, b, heat);
  REQUIRE(r.trace.converged);
  CHECK(r.trace.iterations > 2);

  // Plug the result back in as the frozen data.
  const auto vs = assemble_velocity_system(c.dt, s.v, r.state.u, r.state.theta, b, p);
  CHECK(rel_residual(vs, pack_interior(r.state.v)) <= 1e-8);
  const auto hs = assemble_heat_system(c.dt, s.theta, r.state.theta, r.state.v, heat, p);
  CHECK(rel_residual(hs, r.state.theta.values()) <= 1e-8);
  // Displacement is the backward-Euler integral of the velocity.
  const auto du = r.state.u - s.u;
  for (std::size_t i = 0; i < du.values().size(); ++i) {
    REQUIRE(du.values()[i] == doctest::Approx(c.dt * r.state.v.values()[i]).epsilon(1e-12));
  }
}

TEST_CASE("extra sweeps do not move a converged step") {
  const auto s = bump(17);
  StepperConfig loose;
  StepperConfig tight;
  tight.picard_tol = 1e-13;
  const auto g = s.grid_ptr();
  const auto a = picard_step(s, loose, params(), VectorField(g), ScalarField(g));
  const auto b = picard_step(s, tight, params(), VectorField(g), ScalarField(g));
  CHECK(b.trace.iterations >= a.trace.iterations);
  const double dv = l2_norm(a.state.v - b.state.v);
  CHECK(dv <= 1e-8 * l2_norm(b.state.v));
  CHECK(std::sqrt(inner(a.state.theta - b.state.theta, a.state.theta - b.state.theta)) <= 1e-9);
}

TEST_CASE("sweeps contract, and faster for smaller steps") {
  const auto s = bump(17);
  const auto g = s.grid_ptr();
  std::vector<double> means;
  for (double dt : {0.04, 0.02, 0.01}) {
    StepperConfig c;
    c.dt = dt;
    const auto r = picard_step(s, c, params(), VectorField(g), ScalarField(g));
    REQUIRE(r.trace.converged);
    const auto ratios = r.trace.ratios();
    REQUIRE_FALSE(ratios.empty());
    for (double q : ratios) CHECK(q < 1.0);
    means.push_back(mean(ratios));
  }
  CHECK(means[1] < means[0]);
  CHECK(means[2] < means[1]);
}

TEST_CASE("sweep cap raises with the trace") {
  const auto s = bump(9);
  StepperConfig c;
  c.picard_max = 1;
  c.picard_tol = 1e-14;
  try {
    picard_step(s, c, params(), VectorField(s.grid_ptr()), ScalarField(s.grid_ptr()));
    FAIL("expected PicardConvergenceError");
  } catch (const PicardConvergenceError& e) {
    CHECK_FALSE(e.trace().converged);
    CHECK(e.trace().y.size() == 1);
  }
}

TEST_CASE("temperature floor is enforced") {
  const auto s = bump(9);
  StepperConfig c;
  c.theta_floor = 0.9;  // initial minimum is 0.5
  CHECK_THROWS_AS(picard_step(s, c, params(), VectorField(s.grid_ptr()), ScalarField(s.grid_ptr())),
                  DegeneracyError);
}

TEST_CASE("zero data stays at rest over a run") {
  const auto g = make_grid(3, {5, 5, 5}, {1.0, 1.0, 1.0});
  const SimState s(g, 0.7);
  StepperConfig c;
  c.dt = 0.05;
  const auto sum = run(s, c, params(), ZeroSources{}, 0.5);
  CHECK(sum.steps == 10);
  CHECK(sum.final_state.t == doctest::Approx(0.5));
  CHECK(l2_norm(sum.final_state.u) == 0.0);
  CHECK(l2_norm(sum.final_state.v) == 0.0);
  for (double t : sum.final_state.theta.values()) CHECK(t == doctest::Approx(0.7).epsilon(1e-13));
}

TEST_CASE("run keeps Dirichlet data, lands on t_end, and reports sources") {
  const auto s = bump(9);
  StepperConfig c;
  c.dt = 0.03;
  const ConstantSources src(Vec3{0.5, -0.25, 0.0}, 0.2);
  CHECK_FALSE(src.is_zero());
  CHECK(ConstantSources(Vec3{0, 0, 0}, 0.0).is_zero());
  const auto sum = run(s, c, params(), src, 0.1, {}, RunOptions{true});
  CHECK(sum.steps == 4);
  CHECK(sum.final_state.t == 0.1);
  CHECK(sum.states.size() == 5);
  CHECK(sum.states.front() == s);
  CHECK(sum.traces.size() == 4);
  CHECK(sum.g_min == 0.2);
  CHECK(sum.source_max_abs == 0.5);
  for (const auto& st : sum.states) {
    CHECK(boundary_max_abs(st.u) == 0.0);
    CHECK(boundary_max_abs(st.v) == 0.0);
  }
}

TEST_CASE("runs are deterministic") {
  const auto s = bump(9);
  StepperConfig c;
  c.dt = 0.02;
  const auto a = run(s, c, params(), ZeroSources{}, 0.1);
  const auto b = run(s, c, params(), ZeroSources{}, 0.1);
  CHECK(a.final_state == b.final_state);
}
