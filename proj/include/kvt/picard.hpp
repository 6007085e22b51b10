#pragma once

// Time loop and per-step successive approximation. Each sweep solves the
// velocity problem with (u, theta) frozen at the previous iterate, updates
// u = u_old + dt * v, then solves the heat problem with the capacity and
// strain rate frozen at the previous iterate. Sweeps stop when
//   Y = |v_new - v_it|_L2 + |theta_new - theta_it|_L2
// falls below picard_tol * Y_1 (or below the linear-solver noise floor).

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "kvt/constitutive.hpp"
#include "kvt/errors.hpp"
#include "kvt/grid.hpp"
#include "kvt/linear_step.hpp"

namespace kvt {

struct SimState {
  double t = 0.0;
  VectorField u;
  VectorField v;
  ScalarField theta;

  SimState() = default;
  SimState(GridPtr grid, double theta0, double t0 = 0.0);

  const Grid& grid() const noexcept { return theta.grid(); }
  const GridPtr& grid_ptr() const noexcept { return theta.grid_ptr(); }
  double theta_min() const;
  double theta_max() const;

  /// Throws PreconditionError naming the first broken invariant:
  /// u, v zero on the boundary, theta > 0, everything finite.
  void validate() const;

  bool operator==(const SimState& o) const {
    return t == o.t && u == o.u && v == o.v && theta == o.theta;
  }
};

struct StepperConfig {
  double dt = 0.01;
  double picard_tol = 1e-10;
  int picard_max = 50;
  double cg_tol = 1e-13;
  int cg_max = 20000;
  /// Unset: half the initial minimum temperature, fixed for the whole run.
  std::optional<double> theta_floor;

  std::vector<std::string> violations() const;
  void validate() const;
};

struct PicardTrace {
  std::vector<double> y;  // Y after each sweep
  int iterations = 0;
  bool converged = false;
  /// Y_{k+1} / Y_k for consecutive sweeps (entries with Y_k = 0 skipped).
  std::vector<double> ratios() const;
};

class PicardConvergenceError : public ConvergenceError {
 public:
  PicardConvergenceError(const std::string& what, PicardTrace trace)
      : ConvergenceError(what), trace_(std::move(trace)) {}
  const PicardTrace& trace() const noexcept { return trace_; }

 private:
  PicardTrace trace_;
};

struct Iterate {
  VectorField u;
  VectorField v;
  ScalarField theta;
};

/// Constant-in-time extension of the step's initial data.
Iterate initial_iterate(const SimState& state);

/// Body force b and heat supply g at a given time.
class Sources {
 public:
  virtual ~Sources() = default;
  virtual void evaluate(double t, VectorField& b, ScalarField& g) const = 0;
  /// True when b = 0 and g = 0 for all t.
  virtual bool is_zero() const { return false; }
};

class ZeroSources final : public Sources {
 public:
  void evaluate(double, VectorField& b, ScalarField& g) const override;
  bool is_zero() const override { return true; }
};

class ConstantSources final : public Sources {
 public:
  ConstantSources(Vec3 b, double g) : b_(b), g_(g) {}
  void evaluate(double, VectorField& b, ScalarField& g) const override;
  bool is_zero() const override;

 private:
  Vec3 b_;
  double g_;
};

class FunctionSources final : public Sources {
 public:
  using Fn = std::function<void(double, VectorField&, ScalarField&)>;
  explicit FunctionSources(Fn fn) : fn_(std::move(fn)) {}
  void evaluate(double t, VectorField& b, ScalarField& g) const override { fn_(t, b, g); }

 private:
  Fn fn_;
};

struct StepResult {
  SimState state;
  PicardTrace trace;
};

/// Reuses the velocity operator across steps with the same dt.
class PicardStepper {
 public:
  PicardStepper(StepperConfig config, MaterialParams params);

  const StepperConfig& config() const noexcept { return config_; }
  const MaterialParams& params() const noexcept { return params_; }

  /// Advance by dt (defaults to config().dt). b and g are the sources at
  /// state.t + dt.
  StepResult step(const SimState& state, const VectorField& b, const ScalarField& g,
                  std::optional<double> dt = std::nullopt);

 private:
  const SparseOperator& velocity_matrix(const Grid& grid, double dt);

  StepperConfig config_;
  MaterialParams params_;
  SparseOperator velocity_;
  double velocity_dt_ = 0.0;
  const Grid* velocity_grid_ = nullptr;
  GridPtr velocity_grid_keep_;
};

StepResult picard_step(const SimState& state, const StepperConfig& config,
                       const MaterialParams& params, const VectorField& b, const ScalarField& g);

struct StepEvent {
  int step;
  double dt;
  const SimState& before;
  const SimState& after;
  const PicardTrace& trace;
  const VectorField& b;
  const ScalarField& g;
};

class Observer {
 public:
  virtual ~Observer() = default;
  virtual void on_start(const SimState&) {}
  virtual void on_step(const StepEvent& event) = 0;
};

struct RunOptions {
  bool keep_states = false;
};

struct RunSummary {
  SimState final_state;
  int steps = 0;
  std::vector<PicardTrace> traces;
  double g_min = 0.0;           // smallest heat supply seen at any node and step
  double source_max_abs = 0.0;  // max |b|, |g| seen
  std::vector<SimState> states; // initial state first, when keep_states
};

/// Steps of size config.dt from initial.t to t_end; a final partial step
/// lands exactly on t_end.
RunSummary run(const SimState& initial, const StepperConfig& config, const MaterialParams& params,
               const Sources& sources, double t_end, std::span<Observer* const> observers = {},
               RunOptions options = {});

}  // namespace kvt
