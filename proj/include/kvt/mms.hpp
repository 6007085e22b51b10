#pragma once

// Manufactured solutions. A case is a closed-form (u*, theta*) built from
// separable terms amp * T(t) * phi_0(x_0) phi_1(x_1) phi_2(x_2), with
// phi in {1, sin(k pi x / L), cos(k pi x / L)}; all derivatives are exact.
// The forcing (b, g) is chosen so that (u*, theta*) solves the continuous
// system exactly.

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "kvt/constitutive.hpp"
#include "kvt/grid.hpp"
#include "kvt/picard.hpp"

namespace kvt::mms {

enum class Profile { One, Sin, Cos };
enum class TimeKind { One, Exp, Sin, Cos };

struct SpaceFactor {
  Profile kind = Profile::One;
  double k = 0.0;  // wave number in units of pi / L
};

struct TimeFactor {
  TimeKind kind = TimeKind::One;
  double rate = 0.0;  // exp(rate t), sin(rate t), cos(rate t)
};

struct Term {
  double amp = 0.0;
  TimeFactor time;
  std::array<SpaceFactor, 3> space{};
};

class SeparableField {
 public:
  SeparableField() = default;
  SeparableField(std::vector<Term> terms, Vec3 length) : terms_(std::move(terms)), length_(length) {}

  /// d^{time_order}/dt of the mixed spatial derivative with orders[a] along axis a.
  double eval(const Vec3& x, double t, int time_order = 0, std::array<int, 3> orders = {0, 0, 0}) const;
  double dx(int a, const Vec3& x, double t, int time_order = 0) const;
  double dxx(int a, int b, const Vec3& x, double t, int time_order = 0) const;
  double laplacian(const Vec3& x, double t, int time_order, int dim) const;

  const std::vector<Term>& terms() const noexcept { return terms_; }

 private:
  std::vector<Term> terms_;
  Vec3 length_{1.0, 1.0, 1.0};
};

struct CaseSpec {
  std::string id;
  int dim = 2;
  Vec3 length{1.0, 1.0, 1.0};
  double t_end = 1.0;
  MaterialParams params;
  std::array<SeparableField, 3> u;  // components beyond dim must be empty
  SeparableField theta;
};

class ManufacturedCase {
 public:
  /// Validates the case by sampling: u* = 0 and n . grad theta* = 0 on the
  /// boundary, theta* > 0 on the box over [0, t_end]. Throws UsageError
  /// naming the offending location.
  explicit ManufacturedCase(CaseSpec spec);

  const CaseSpec& spec() const noexcept { return spec_; }
  const std::string& id() const noexcept { return spec_.id; }
  int dim() const noexcept { return spec_.dim; }
  const MaterialParams& params() const noexcept { return spec_.params; }
  /// Smallest theta* found while sampling.
  double theta_min() const noexcept { return theta_min_; }

  Vec3 u(const Vec3& x, double t) const { return vec(x, t, 0); }
  Vec3 v(const Vec3& x, double t) const { return vec(x, t, 1); }
  Vec3 a(const Vec3& x, double t) const { return vec(x, t, 2); }
  double theta(const Vec3& x, double t) const { return spec_.theta.eval(x, t); }
  double theta_t(const Vec3& x, double t) const { return spec_.theta.eval(x, t, 1); }
  SymTensor strain(const Vec3& x, double t, int time_order = 0) const;
  Vec3 grad_theta(const Vec3& x, double t) const;

  /// b = u_tt - div[A1 eps(u_t) + A2 (eps(u) - theta alpha)].
  Vec3 body_force(const Vec3& x, double t) const;
  /// g = cv theta theta_t - k lap theta + theta (A2 alpha) . eps(u_t) - (A1 eps(u_t)) . eps(u_t).
  double heat_supply(const Vec3& x, double t) const;

  /// Exact fields sampled at the nodes; u and v are exactly zero on the boundary.
  SimState sample(const GridPtr& grid, double t) const;
  GridPtr make_grid(int n) const;
  std::unique_ptr<Sources> sources() const;

 private:
  Vec3 vec(const Vec3& x, double t, int time_order) const;
  /// (div A_p eps(w))_i for w = d^{time_order} u / dt.
  Vec3 div_A_eps(Tensor p, const Vec3& x, double t, int time_order) const;

  CaseSpec spec_;
  double theta_min_ = 0.0;
};

/// Built-in cases: "zero", "thermal", "default", "default3d".
CaseSpec builtin_case(const std::string& id);
std::vector<std::string> builtin_case_ids();
ManufacturedCase manufacture(CaseSpec spec);

struct Errors {
  double u = 0.0;
  double v = 0.0;
  double theta = 0.0;
};

struct LevelResult {
  int n = 0;
  double h = 0.0;
  double dt = 0.0;
  int steps = 0;
  Errors error;  // max over time of the L2 error
  int max_picard = 0;
};

struct Orders {
  double u = 0.0;
  double v = 0.0;
  double theta = 0.0;
};

struct StudyConfig {
  std::vector<int> resolutions{9, 17, 33, 65};
  /// Spatial study: dt = dt_coarse * (h / h_coarsest)^2 over [0, t_spatial].
  double t_spatial = 0.1;
  double dt_coarse = 0.01;
  /// Temporal study at the finest resolution over [0, t_temporal].
  double t_temporal = 0.5;
  std::vector<double> dts{0.05, 0.025, 0.0125, 0.00625};
  StepperConfig stepper;
  bool spatial = true;
  bool temporal = true;
};

struct OrderReport {
  std::string case_id;
  std::vector<LevelResult> spatial;
  std::vector<LevelResult> temporal;
  Orders spatial_order;
  Orders temporal_order;
};

/// Runs the solver against a case at one resolution and time step.
LevelResult run_level(const ManufacturedCase& c, int n, double dt, double t_end,
                      const StepperConfig& stepper);

/// Least-squares slope of log(error) against log(step), excluding the first
/// (coarsest) point.
double fit_order(const std::vector<double>& steps, const std::vector<double>& errors);

/// Requires at least three resolutions. Inner failures are rethrown with the
/// level attached.
OrderReport convergence_study(const ManufacturedCase& c, const StudyConfig& cfg);

}  // namespace kvt::mms
