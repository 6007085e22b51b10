#include "kvt/picard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kvt {

namespace {

double min_value(const ScalarField& f) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : f.values()) m = std::min(m, v);
  return m;
}

double max_value(const ScalarField& f) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : f.values()) m = std::max(m, v);
  return m;
}

double l2(const ScalarField& f) { return std::sqrt(inner(f, f)); }

// Iterate differences below this are indistinguishable from the linear
// solver tolerance.
constexpr double kNoiseFactor = 1000.0;

}  // namespace

SimState::SimState(GridPtr grid, double theta0, double t0)
    : t(t0), u(grid), v(grid), theta(grid, theta0) {}

double SimState::theta_min() const { return min_value(theta); }
double SimState::theta_max() const { return max_value(theta); }

void SimState::validate() const {
  if (!theta.grid_ptr() || !u.grid_ptr() || !v.grid_ptr()) {
    throw PreconditionError("state: fields are not allocated");
  }
  require_same_grid(u.grid(), theta.grid(), "state");
  require_same_grid(v.grid(), theta.grid(), "state");
  if (!std::isfinite(t)) throw PreconditionError("state: time is not finite");
  if (!u.all_finite() || !v.all_finite() || !theta.all_finite()) {
    throw PreconditionError("state: non-finite field values");
  }
  if (boundary_max_abs(u) != 0.0) throw PreconditionError("state: u is nonzero on the boundary");
  if (boundary_max_abs(v) != 0.0) throw PreconditionError("state: v is nonzero on the boundary");
  const double tmin = theta_min();
  if (!(tmin > 0.0)) {
    std::ostringstream os;
    os << "state: temperature must be positive (min = " << tmin << ")";
    throw PreconditionError(os.str());
  }
}

std::vector<std::string> StepperConfig::violations() const {
  std::vector<std::string> out;
  if (!(dt > 0.0) || !std::isfinite(dt)) out.emplace_back("dt must be positive");
  if (!(picard_tol > 0.0)) out.emplace_back("picard_tol must be positive");
  if (picard_max < 1) out.emplace_back("picard_max must be at least 1");
  if (!(cg_tol > 0.0)) out.emplace_back("cg_tol must be positive");
  if (cg_max < 1) out.emplace_back("cg_max must be at least 1");
  if (theta_floor && !(*theta_floor > 0.0)) out.emplace_back("theta_floor must be positive");
  return out;
}

void StepperConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid stepper configuration:";
  for (const auto& s : v) msg += " " + s + ";";
  throw UsageError(msg);
}

std::vector<double> PicardTrace::ratios() const {
  std::vector<double> r;
  for (std::size_t k = 1; k < y.size(); ++k) {
    if (y[k - 1] > 0.0) r.push_back(y[k] / y[k - 1]);
  }
  return r;
}

Iterate initial_iterate(const SimState& state) { return {state.u, state.v, state.theta}; }

void ZeroSources::evaluate(double, VectorField& b, ScalarField& g) const {
  std::fill(b.values().begin(), b.values().end(), 0.0);
  std::fill(g.values().begin(), g.values().end(), 0.0);
}

void ConstantSources::evaluate(double, VectorField& b, ScalarField& g) const {
  const Grid& grid = b.grid();
  for (std::size_t node = 0; node < grid.size(); ++node) {
    // b acts on interior momentum rows only; boundary values are unused.
    for (int c = 0; c < grid.dim(); ++c) {
      b(node, c) = grid.on_boundary(node) ? 0.0 : b_[static_cast<std::size_t>(c)];
    }
    g(node) = g_;
  }
}

bool ConstantSources::is_zero() const {
  return g_ == 0.0 && b_[0] == 0.0 && b_[1] == 0.0 && b_[2] == 0.0;
}

PicardStepper::PicardStepper(StepperConfig config, MaterialParams params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  params_.validate();
}

const SparseOperator& PicardStepper::velocity_matrix(const Grid& grid, double dt) {
  if (velocity_grid_ != &grid || velocity_dt_ != dt) {
    velocity_ = velocity_operator(dt, grid, params_);
    velocity_dt_ = dt;
    velocity_grid_ = &grid;
  }
  return velocity_;
}

StepResult PicardStepper::step(const SimState& state, const VectorField& b, const ScalarField& g,
                               std::optional<double> dt_override) {
  const double dt = dt_override.value_or(config_.dt);
  if (!(dt > 0.0)) throw UsageError("picard_step: time step must be positive");
  const Grid& grid = state.grid();
  require_same_grid(grid, b.grid(), "picard_step");
  require_same_grid(grid, g.grid(), "picard_step");
  // Keep the grid alive while its address keys the operator cache.
  velocity_grid_keep_ = state.grid_ptr();

  const double floor = config_.theta_floor.value_or(0.5 * state.theta_min());
  if (state.theta_min() < floor) {
    std::ostringstream os;
    os << "picard_step: temperature " << state.theta_min() << " below floor " << floor
       << " at t = " << state.t;
    throw DegeneracyError(os.str());
  }

  const SparseOperator& av = velocity_matrix(grid, dt);
  Iterate it = initial_iterate(state);
  PicardTrace trace;
  double y1 = 0.0;

  for (int k = 1; k <= config_.picard_max; ++k) {
    const auto rhs_v = velocity_rhs(dt, state.v, it.u, it.theta, b, params_);
    const auto guess_v = pack_interior(it.v);
    const auto sol_v = solve_spd(av, rhs_v, config_.cg_tol, config_.cg_max, guess_v);
    VectorField v_new = unpack_interior(sol_v.solution, state.grid_ptr());
    VectorField u_new = state.u;
    {
      auto un = u_new.values();
      const auto vn = v_new.values();
      for (std::size_t i = 0; i < un.size(); ++i) un[i] += dt * vn[i];
    }

    const SparseOperator ah = heat_operator(dt, it.theta, params_);
    const auto rhs_h = heat_rhs_vector(dt, state.theta, it.theta, it.v, g, params_);
    const auto sol_h = solve_spd(ah, rhs_h, config_.cg_tol, config_.cg_max, it.theta.values());
    ScalarField theta_new(state.grid_ptr());
    std::copy(sol_h.solution.begin(), sol_h.solution.end(), theta_new.values().begin());

    const double tmin = min_value(theta_new);
    if (!(tmin >= floor)) {
      std::ostringstream os;
      os << "picard_step: temperature fell to " << tmin << " (floor " << floor << ") at t = "
         << state.t + dt << ", sweep " << k;
      throw DegeneracyError(os.str());
    }

    const double y = l2_norm(v_new - it.v) + l2(theta_new - it.theta);
    const double noise =
        kNoiseFactor * config_.cg_tol * (l2_norm(v_new) + l2(theta_new));
    trace.y.push_back(y);
    trace.iterations = k;
    it = {std::move(u_new), std::move(v_new), std::move(theta_new)};

    if (k == 1) y1 = y;
    if (y == 0.0 || y <= noise || (k > 1 && y <= config_.picard_tol * y1)) {
      trace.converged = true;
      break;
    }
  }

  if (!trace.converged) {
    std::ostringstream os;
    os << "picard_step: no convergence in " << config_.picard_max << " sweeps at t = "
       << state.t + dt << " (last Y = " << trace.y.back() << ", first Y = " << y1 << ")";
    throw PicardConvergenceError(os.str(), std::move(trace));
  }

  StepResult result;
  result.state.t = state.t + dt;
  result.state.u = std::move(it.u);
  result.state.v = std::move(it.v);
  result.state.theta = std::move(it.theta);
  result.trace = std::move(trace);
  return result;
}

StepResult picard_step(const SimState& state, const StepperConfig& config,
                       const MaterialParams& params, const VectorField& b, const ScalarField& g) {
  PicardStepper stepper(config, params);
  return stepper.step(state, b, g);
}

RunSummary run(const SimState& initial, const StepperConfig& config, const MaterialParams& params,
               const Sources& sources, double t_end, std::span<Observer* const> observers,
               RunOptions options) {
  config.validate();
  initial.validate();
  if (!(t_end > initial.t)) throw UsageError("run: t_end must exceed the initial time");

  StepperConfig resolved = config;
  if (!resolved.theta_floor) resolved.theta_floor = 0.5 * initial.theta_min();
  PicardStepper stepper(resolved, params);

  const double t0 = initial.t;
  const double dt = resolved.dt;
  const auto steps = static_cast<int>(std::ceil((t_end - t0) / dt - 1e-9));

  RunSummary summary;
  summary.g_min = std::numeric_limits<double>::infinity();
  if (options.keep_states) summary.states.push_back(initial);
  for (Observer* o : observers) o->on_start(initial);

  VectorField b(initial.grid_ptr());
  ScalarField g(initial.grid_ptr());
  SimState current = initial;
  for (int k = 1; k <= steps; ++k) {
    const double t_prev = current.t;
    double t_next = k == steps ? t_end : t0 + k * dt;
    double h = t_next - t_prev;
    if (std::abs(h - dt) <= 1e-9 * dt) h = dt;
    sources.evaluate(t_next, b, g);
    for (double x : g.values()) {
      summary.g_min = std::min(summary.g_min, x);
      summary.source_max_abs = std::max(summary.source_max_abs, std::abs(x));
    }
    for (double x : b.values()) summary.source_max_abs = std::max(summary.source_max_abs, std::abs(x));

    StepResult r = stepper.step(current, b, g, h);
    r.state.t = t_next;
    const StepEvent ev{k, h, current, r.state, r.trace, b, g};
    for (Observer* o : observers) o->on_step(ev);
    summary.traces.push_back(r.trace);
    if (options.keep_states) summary.states.push_back(r.state);
    current = std::move(r.state);
  }
  summary.steps = steps;
  summary.final_state = std::move(current);
  return summary;
}

}  // namespace kvt
