#include "kvt/scenario.hpp"

#include <cmath>
#include <numbers>

namespace kvt {

GridPtr make_grid(const GridSpec& spec) { return make_grid(spec.dim, spec.n, spec.length); }

namespace {

double cos_product(const Grid& g, std::size_t node) {
  const Vec3 x = g.coord(node);
  double p = 1.0;
  for (int a = 0; a < g.dim(); ++a) {
    p *= std::cos(std::numbers::pi * x[static_cast<std::size_t>(a)] / g.length(a));
  }
  return p;
}

// prod sin(k_a pi x_a / L_a), k_0 = mode along the first axis, 1 elsewhere.
double sin_product(const Grid& g, std::size_t node, int first_mode) {
  if (g.on_boundary(node)) return 0.0;
  const Vec3 x = g.coord(node);
  double p = 1.0;
  for (int a = 0; a < g.dim(); ++a) {
    const double k = a == 0 ? first_mode : 1;
    p *= std::sin(k * std::numbers::pi * x[static_cast<std::size_t>(a)] / g.length(a));
  }
  return p;
}

mms::ManufacturedCase scenario_case(const std::string& id, const ScenarioConfig& cfg) {
  mms::CaseSpec spec = mms::builtin_case(id);
  spec.params = cfg.material;
  spec.length = cfg.grid.length;
  spec.t_end = std::max(spec.t_end, cfg.t_end);
  for (auto* f : {&spec.u[0], &spec.u[1], &spec.u[2], &spec.theta}) {
    *f = mms::SeparableField(f->terms(), spec.length);
  }
  return mms::manufacture(std::move(spec));
}

}  // namespace

SimState build_initial_state(const ScenarioConfig& cfg) {
  const GridPtr grid = make_grid(cfg.grid);
  const auto& ini = cfg.initial;
  switch (ini.preset) {
    case InitialPreset::Rest:
      return SimState(grid, ini.theta0);
    case InitialPreset::Bump: {
      SimState s(grid, ini.theta0);
      const int last = grid->dim() - 1;
      for (std::size_t n = 0; n < grid->size(); ++n) {
        s.theta(n) = ini.theta0 + ini.theta_amp * cos_product(*grid, n);
        s.u(n, 0) = ini.u_amp * sin_product(*grid, n, 1);
        s.v(n, last) = ini.v_amp * sin_product(*grid, n, 2);
      }
      return s;
    }
    case InitialPreset::Manufactured:
      return scenario_case(ini.case_id, cfg).sample(grid, 0.0);
    case InitialPreset::Checkpoint: {
      SimState s = io::load_checkpoint(ini.path);
      if (!s.grid().same_shape(*grid)) {
        throw ConfigError({"initial.path: checkpoint grid does not match the [grid] block (" + ini.path + ")"});
      }
      s.validate();
      return s;
    }
  }
  throw UsageError("build_initial_state: unknown preset");
}

std::unique_ptr<Sources> build_sources(const ScenarioConfig& cfg) {
  switch (cfg.sources.preset) {
    case SourcePreset::Zero:
      return std::make_unique<ZeroSources>();
    case SourcePreset::Constant:
      return std::make_unique<ConstantSources>(cfg.sources.b, cfg.sources.g);
    case SourcePreset::Manufactured:
      return scenario_case(cfg.sources.case_id, cfg).sources();
  }
  throw UsageError("build_sources: unknown preset");
}

bool sources_are_zero(const ScenarioConfig& cfg) { return build_sources(cfg)->is_zero(); }

ScenarioResult run_scenario(const ScenarioConfig& cfg, ScenarioOptions options) {
  const SimState initial = build_initial_state(cfg);
  const auto sources = build_sources(cfg);

  std::vector<Observer*> observers;
  DiagnosticsRecorder recorder(cfg.material);
  std::unique_ptr<io::CsvRecorder> csv;
  std::unique_ptr<io::SnapshotWriter> snaps;
  if (options.write_outputs && !cfg.output.csv.empty()) {
    csv = std::make_unique<io::CsvRecorder>(cfg.output.csv, cfg.material);
    observers.push_back(csv.get());
  } else {
    observers.push_back(&recorder);
  }
  if (options.write_outputs && cfg.output.snapshot_every > 0) {
    snaps = std::make_unique<io::SnapshotWriter>(cfg.output.snapshot_dir, cfg.output.snapshot_every);
    observers.push_back(snaps.get());
  }

  ScenarioResult res;
  res.summary = run(initial, cfg.stepper, cfg.material, *sources, cfg.t_end, observers,
                    RunOptions{options.keep_states});
  res.records = csv ? csv->records() : recorder.records();
  if (snaps) res.trajectory_index = snaps->index_path();

  res.theta_underbar = cfg.diagnostics.theta_underbar.value_or(initial.theta_min());
  res.c0 = cfg.diagnostics.c0.value_or(default_lower_bound_rate(cfg.material));
  if (sources->is_zero()) res.decay = availability_decay_check(res.records, true);
  if (res.summary.g_min >= 0.0) {
    res.lower_bound = theta_lower_bound_check(res.records, res.theta_underbar, res.c0, res.summary.g_min);
  }
  return res;
}

PerturbField parse_perturb_field(const std::string& name) {
  if (name == "theta0") return PerturbField::Theta0;
  if (name == "u0") return PerturbField::U0;
  if (name == "u1") return PerturbField::U1;
  throw UsageError("unknown perturbation field '" + name + "' (expected theta0, u0 or u1)");
}

void apply_perturbation(SimState& s, PerturbField field, double delta) {
  const Grid& g = s.grid();
  for (std::size_t n = 0; n < g.size(); ++n) {
    switch (field) {
      case PerturbField::Theta0: s.theta(n) += delta * cos_product(g, n); break;
      case PerturbField::U0: s.u(n, 0) += delta * sin_product(g, n, 1); break;
      case PerturbField::U1: s.v(n, 0) += delta * sin_product(g, n, 1); break;
    }
  }
}

PerturbResult run_perturbation(const ScenarioConfig& cfg, PerturbField field, double delta) {
  if (!std::isfinite(delta)) throw UsageError("perturbation magnitude must be finite");
  const SimState base = build_initial_state(cfg);
  SimState perturbed = base;
  apply_perturbation(perturbed, field, delta);
  perturbed.validate();
  const auto sources = build_sources(cfg);
  const RunOptions keep{true};
  const RunSummary r1 = run(perturbed, cfg.stepper, cfg.material, *sources, cfg.t_end, {}, keep);
  const RunSummary r2 = run(base, cfg.stepper, cfg.material, *sources, cfg.t_end, {}, keep);
  PerturbResult out;
  out.delta = delta;
  out.field = field;
  out.report = cfg.diagnostics.c1 ? gronwall_compare(r1.states, r2.states, cfg.material, *cfg.diagnostics.c1)
                                  : gronwall_compare(r1.states, r2.states, cfg.material);
  return out;
}

void write_gronwall_csv(const std::string& path, const GronwallReport& report) {
  io::CsvWriter w(path, {"t", "x", "a", "bound"});
  for (std::size_t j = 0; j < report.t.size(); ++j) {
    const double row[] = {report.t[j], report.x[j], report.a[j], report.bound[j]};
    w.row(row);
  }
  w.flush();
}

void write_order_report(const std::string& path, const mms::OrderReport& report) {
  io::CsvWriter w(path, {"study", "n", "h", "dt", "steps", "err_u", "err_v", "err_theta", "max_picard"});
  const auto emit = [&](const std::vector<mms::LevelResult>& rows, double kind) {
    for (const auto& r : rows) {
      const double row[] = {kind, static_cast<double>(r.n), r.h, r.dt, static_cast<double>(r.steps),
                            r.error.u, r.error.v, r.error.theta, static_cast<double>(r.max_picard)};
      w.row(row);
    }
  };
  emit(report.spatial, 0.0);
  emit(report.temporal, 1.0);
  w.flush();
}

TrajectoryNorms trajectory_norms(const std::vector<SimState>& states, double p, double p0) {
  if (states.size() < 2) throw UsageError("trajectory_norms: need at least two states");
  std::vector<ScalarField> th, uu, vv;
  std::vector<double> dts;
  for (std::size_t k = 1; k < states.size(); ++k) {
    if (!states[k].grid().same_shape(states[0].grid())) {
      throw UsageError("trajectory_norms: states live on different grids");
    }
    const double dt = states[k].t - states[k - 1].t;
    if (!(dt > 0.0)) throw UsageError("trajectory_norms: times must increase");
    dts.push_back(dt);
    th.push_back(states[k].theta);
    uu.push_back(magnitude(states[k].u));
    vv.push_back(magnitude(states[k].v));
  }
  TrajectoryNorms out;
  out.theta = mixed_norm(th, dts, p, p0);
  out.u = mixed_norm(uu, dts, p, p0);
  out.v = mixed_norm(vv, dts, p, p0);
  out.theta_v2 = v2_norm(th, dts);
  out.slices = static_cast<int>(dts.size());
  return out;
}

}  // namespace kvt
