#pragma once

// Energy, entropy and availability monitors, balance residuals, the
// temperature lower-bound check, mixed space-time norms and the two-run
// continuous-dependence comparison.
//
// Integrals use the trapezoid rule. The thermal entropy production is
// evaluated edge by edge, k (theta_j - theta_i)^2 / (h^2 theta_i theta_j),
// which is the exact discrete counterpart of int k lap(theta) / theta for
// the mirror-ghost Laplacian.

#include <span>
#include <string>
#include <vector>

#include "kvt/constitutive.hpp"
#include "kvt/grid.hpp"
#include "kvt/picard.hpp"

namespace kvt {

struct EnergyParts {
  double kinetic = 0.0;  // int |v|^2 / 2
  double elastic = 0.0;  // int (A2 eps) . eps / 2
  double thermal = 0.0;  // int cv theta^2 / 2
  double total = 0.0;
};

EnergyParts energy(const SimState& s, const MaterialParams& params);
/// int eta = int (cv theta + (A2 alpha) . eps(u)).
double total_entropy(const SimState& s, const MaterialParams& params);
/// int (e + |v|^2 / 2 - beta eta).
double availability(const SimState& s, const MaterialParams& params);

struct ProductionParts {
  double thermal = 0.0;  // int k |grad theta|^2 / theta^2 (edge form)
  double viscous = 0.0;  // int (A1 eps_t) . eps_t / theta
  double total() const { return thermal + viscous; }
};

/// Throws DomainError if theta <= 0 anywhere.
ProductionParts entropy_production_integral(const SimState& s, const MaterialParams& params);

/// Dissipative quantities of the a priori energy estimate (recorded only).
struct DissipativeNorms {
  double grad_log_theta_sq = 0.0;  // |theta^-1 grad theta|_L2^2 (edge form)
  double strain_rate_sq = 0.0;     // |theta^-1/2 eps_t|_L2^2
};
DissipativeNorms dissipative_norms(const SimState& s);

/// |E_new - E_old - dt int (b . v_new + g)| / (1 + |E_new|).
double energy_balance_residual(const SimState& old_s, const SimState& new_s, const VectorField& b,
                               const ScalarField& g, double dt, const MaterialParams& params);

struct EntropyBalance {
  double residual = 0.0;    // relative, trapezoid-in-time production and supply
  double production = 0.0;  // dt * int sigma(new) >= 0
};

EntropyBalance entropy_balance_residual(const SimState& old_s, const SimState& new_s,
                                        const ScalarField& g, double dt,
                                        const MaterialParams& params);

/// Signed rate defect int(eta_t) - int(g / theta) - int(sigma), all at the
/// new level. The flux term integrates to zero under the Neumann condition.
double clausius_duhem_defect(const SimState& old_s, const SimState& new_s, const ScalarField& g,
                             double dt, const MaterialParams& params);

/// Relative L2 distance between the nodal residuals of the heat equation in
/// its energy form and in its entropy form, both evaluated on the step.
double entropy_form_crosscheck(const SimState& old_s, const SimState& new_s, const ScalarField& g,
                               double dt, const MaterialParams& params);

struct DiagnosticsRecord {
  double t = 0.0;
  double kinetic = 0.0;
  double elastic = 0.0;
  double thermal = 0.0;
  double total_energy = 0.0;
  double entropy = 0.0;
  double availability = 0.0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  double entropy_production = 0.0;  // int sigma at t
  double energy_residual = 0.0;
  double entropy_residual = 0.0;
  double clausius_duhem_defect = 0.0;
  int picard_iterations = 0;
  double grad_log_theta_sq = 0.0;
  double strain_rate_sq = 0.0;

  static const std::vector<std::string>& column_names();
  std::vector<double> values() const;
};

/// Record of a state with no preceding step (residuals zero).
DiagnosticsRecord initial_record(const SimState& s, const MaterialParams& params);
DiagnosticsRecord step_record(const StepEvent& ev, const MaterialParams& params);

/// Observer that collects one record per state.
class DiagnosticsRecorder : public Observer {
 public:
  explicit DiagnosticsRecorder(MaterialParams params) : params_(std::move(params)) {}
  void on_start(const SimState& s) override;
  void on_step(const StepEvent& ev) override;
  const std::vector<DiagnosticsRecord>& records() const noexcept { return records_; }

 private:
  MaterialParams params_;
  std::vector<DiagnosticsRecord> records_;
};

struct DecayCheck {
  bool passed = true;
  double worst_excess = 0.0;  // max over steps of (A_k - A_{k-1} - slack_k); <= 0 when passed
  int worst_step = 0;
};

/// Availability must be non-increasing up to a per-step slack of
/// 10 * (absolute energy-balance residual of the step). Requires b = g = 0.
DecayCheck availability_decay_check(std::span<const DiagnosticsRecord> records, bool sources_zero);

struct LowerBoundCheck {
  bool passed = true;
  std::vector<double> margin;  // theta_min(t) - theta_underbar * exp(-c0 (t - t0))
  double min_margin = 0.0;
};

/// Requires g >= 0 everywhere (pass the smallest g seen); theta_underbar > 0.
LowerBoundCheck theta_lower_bound_check(std::span<const DiagnosticsRecord> records,
                                        double theta_underbar, double c0, double g_min);

/// (sum_k dt_k (int |f_k|^p)^(p0/p))^(1/p0); infinite exponents give maxima.
double mixed_norm(std::span<const ScalarField> slices, std::span<const double> dts, double p,
                  double p0);
/// max_k |f_k|_L2 + (sum_k dt_k |grad f_k|_L2^2)^(1/2).
double v2_norm(std::span<const ScalarField> slices, std::span<const double> dts);

struct GronwallReport {
  std::vector<double> t;
  std::vector<double> x;      // int (|U_t|^2 + (A2 E) . E + cv theta_2 vartheta^2)
  std::vector<double> a;      // growth rate
  std::vector<double> bound;  // X(0) exp(int_0^t A)
  double slack = 0.0;
  bool violation = false;
};

/// Both trajectories must share grid and time stamps; run 2 supplies theta_2.
GronwallReport gronwall_compare(std::span<const SimState> run1, std::span<const SimState> run2,
                                const MaterialParams& params, double c1);
GronwallReport gronwall_compare(std::span<const SimState> run1, std::span<const SimState> run2,
                                const MaterialParams& params);

}  // namespace kvt
