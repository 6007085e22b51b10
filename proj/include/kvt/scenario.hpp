#pragma once

// Glue between a ScenarioConfig and the solver: initial data, sources,
// output observers, the two-run perturbation experiment, and norms over a
// stored trajectory.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kvt/config.hpp"
#include "kvt/diagnostics.hpp"
#include "kvt/io.hpp"
#include "kvt/mms.hpp"

namespace kvt {

GridPtr make_grid(const GridSpec& spec);
SimState build_initial_state(const ScenarioConfig& cfg);
std::unique_ptr<Sources> build_sources(const ScenarioConfig& cfg);
bool sources_are_zero(const ScenarioConfig& cfg);

struct ScenarioResult {
  RunSummary summary;
  std::vector<DiagnosticsRecord> records;
  double theta_underbar = 0.0;
  double c0 = 0.0;
  std::optional<DecayCheck> decay;            // only for b = g = 0
  std::optional<LowerBoundCheck> lower_bound;  // only for g >= 0
  std::string trajectory_index;                // empty without snapshots
};

struct ScenarioOptions {
  bool write_outputs = true;  // CSV and snapshots from the [output] block
  bool keep_states = false;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg, ScenarioOptions options = {});

enum class PerturbField { Theta0, U0, U1 };

/// "theta0", "u0" or "u1".
PerturbField parse_perturb_field(const std::string& name);

/// Adds delta times a smooth profile compatible with the boundary
/// conditions: prod cos(pi x / L) for theta, prod sin(pi x / L) on the
/// first component for u and u_t.
void apply_perturbation(SimState& s, PerturbField field, double delta);

struct PerturbResult {
  GronwallReport report;
  double delta = 0.0;
  PerturbField field = PerturbField::Theta0;
};

PerturbResult run_perturbation(const ScenarioConfig& cfg, PerturbField field, double delta);

void write_gronwall_csv(const std::string& path, const GronwallReport& report);
void write_order_report(const std::string& path, const mms::OrderReport& report);

struct TrajectoryNorms {
  double theta = 0.0;  // L_{p,p0} of theta
  double u = 0.0;      // L_{p,p0} of |u|
  double v = 0.0;      // L_{p,p0} of |u_t|
  double theta_v2 = 0.0;
  int slices = 0;
};

/// Right-endpoint time sums over slices 1..N (the first state fixes t0).
TrajectoryNorms trajectory_norms(const std::vector<SimState>& states, double p, double p0);

}  // namespace kvt
