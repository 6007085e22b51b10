// kvt: command-line front end.
//
//   kvt run --config scenario.ini
//   kvt mms --case default --levels 4 [--out report.csv]
//   kvt perturb --config scenario.ini --delta 1e-6 --field theta0 [--out gronwall.csv]
//   kvt norms --traj snapshots/trajectory.txt --p 2 --p0 inf
//
// Exit codes: 0 success, 2 configuration or usage error, 3 numerical
// failure, 4 I/O error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <string>

#include "CLI11.hpp"
#include "kvt/kernels.hpp"
#include "kvt/scenario.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

double parse_exponent(const std::string& s, const char* flag) {
  if (s == "inf" || s == "infinity" || s == "Inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw kvt::UsageError(std::string(flag) + ": expected a number or 'inf', got '" + s + "'");
}

std::string num(double x) { return kvt::io::format_number(x); }

int cmd_run(const std::string& config_path) {
  const kvt::ScenarioConfig cfg = kvt::load_config(config_path);
  const kvt::ScenarioResult res = kvt::run_scenario(cfg);
  const auto& rec = res.records;
  int max_picard = 0;
  for (const auto& r : rec) max_picard = std::max(max_picard, r.picard_iterations);
  const double e0 = rec.front().total_energy;
  const double e1 = rec.back().total_energy;
  std::cout << "steps " << res.summary.steps << "  t " << num(res.summary.final_state.t)
            << "  max picard sweeps " << max_picard << "\n";
  std::cout << "energy " << num(e0) << " -> " << num(e1) << "  relative change "
            << num((e1 - e0) / (1.0 + std::abs(e0))) << "\n";
  std::cout << "theta min " << num(res.summary.final_state.theta_min()) << "  max "
            << num(res.summary.final_state.theta_max()) << "\n";
  if (res.decay) {
    std::cout << "availability non-increasing: " << (res.decay->passed ? "yes" : "NO")
              << " (worst excess " << num(res.decay->worst_excess) << ")\n";
  } else {
    std::cout << "availability check skipped: sources are nonzero\n";
  }
  if (res.lower_bound) {
    std::cout << "temperature bound theta_min >= " << num(res.theta_underbar) << " exp(-" << num(res.c0)
              << " t): " << (res.lower_bound->passed ? "holds" : "VIOLATED") << " (min margin "
              << num(res.lower_bound->min_margin) << ")\n";
  } else {
    std::cout << "temperature bound check skipped: heat supply is negative somewhere\n";
  }
  if (!cfg.output.csv.empty()) std::cout << "diagnostics written to " << cfg.output.csv << "\n";
  if (!res.trajectory_index.empty()) std::cout << "trajectory index " << res.trajectory_index << "\n";
  return kOk;
}

int cmd_mms(const std::string& case_id, int levels, const std::string& out) {
  if (levels < 3) throw kvt::UsageError("--levels must be at least 3");
  const kvt::mms::ManufacturedCase c = kvt::mms::manufacture(kvt::mms::builtin_case(case_id));
  kvt::mms::StudyConfig cfg;
  cfg.resolutions.clear();
  for (int j = 0; j < levels; ++j) cfg.resolutions.push_back(8 * (1 << j) + 1);
  const kvt::mms::OrderReport rep = kvt::mms::convergence_study(c, cfg);
  std::printf("%-9s %5s %10s %10s %12s %12s %12s\n", "study", "n", "h", "dt", "err_u", "err_v", "err_theta");
  const auto rows = [](const char* name, const std::vector<kvt::mms::LevelResult>& v) {
    for (const auto& r : v) {
      std::printf("%-9s %5d %10.4g %10.4g %12.5e %12.5e %12.5e\n", name, r.n, r.h, r.dt, r.error.u,
                  r.error.v, r.error.theta);
    }
  };
  rows("spatial", rep.spatial);
  rows("temporal", rep.temporal);
  std::printf("observed spatial order  u %.3f  v %.3f  theta %.3f\n", rep.spatial_order.u,
              rep.spatial_order.v, rep.spatial_order.theta);
  std::printf("observed temporal order u %.3f  v %.3f  theta %.3f\n", rep.temporal_order.u,
              rep.temporal_order.v, rep.temporal_order.theta);
  if (!out.empty()) {
    kvt::write_order_report(out, rep);
    std::cout << "order report written to " << out << "\n";
  }
  return kOk;
}

int cmd_perturb(const std::string& config_path, double delta, const std::string& field,
                const std::string& out) {
  const kvt::ScenarioConfig cfg = kvt::load_config(config_path);
  const kvt::PerturbResult res = kvt::run_perturbation(cfg, kvt::parse_perturb_field(field), delta);
  const auto& rep = res.report;
  std::cout << "field " << field << "  delta " << num(delta) << "\n";
  std::cout << "X(0) " << num(rep.x.front()) << "  X(T) " << num(rep.x.back()) << "  bound(T) "
            << num(rep.bound.back()) << "\n";
  std::cout << "violation " << (rep.violation ? "true" : "false") << "\n";
  if (!out.empty()) {
    kvt::write_gronwall_csv(out, rep);
    std::cout << "report written to " << out << "\n";
  }
  return kOk;
}

int cmd_norms(const std::string& traj, const std::string& p_text, const std::string& p0_text) {
  const double p = parse_exponent(p_text, "--p");
  const double p0 = parse_exponent(p0_text, "--p0");
  const auto states = kvt::io::load_trajectory(traj);
  const kvt::TrajectoryNorms n = kvt::trajectory_norms(states, p, p0);
  std::cout << "slices " << n.slices << "  p " << p_text << "  p0 " << p0_text << "\n";
  std::cout << "theta " << num(n.theta) << "\n";
  std::cout << "|u|   " << num(n.u) << "\n";
  std::cout << "|u_t| " << num(n.v) << "\n";
  std::cout << "theta V2 " << num(n.theta_v2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kelvin-Voigt thermoviscoelastic simulator"};
  app.require_subcommand(1);

  std::string config, case_id = "default", out, field = "theta0", traj, p = "2", p0 = "2";
  int levels = 4;
  double delta = 1e-6;

  auto* run = app.add_subcommand("run", "Run a scenario and write diagnostics");
  run->add_option("--config", config, "Scenario file")->required();

  auto* mms = app.add_subcommand("mms", "Manufactured-solution convergence study");
  mms->add_option("--case", case_id, "Case id (zero, thermal, default, default3d)");
  mms->add_option("--levels", levels, "Number of resolutions (n = 9, 17, 33, ...)");
  mms->add_option("--out", out, "Order report CSV");

  auto* perturb = app.add_subcommand("perturb", "Twin runs with perturbed initial data");
  perturb->add_option("--config", config, "Scenario file")->required();
  perturb->add_option("--delta", delta, "Perturbation magnitude")->required();
  perturb->add_option("--field", field, "theta0, u0 or u1");
  perturb->add_option("--out", out, "Report CSV");

  auto* norms = app.add_subcommand("norms", "Mixed norms over a stored trajectory");
  norms->add_option("--traj", traj, "Trajectory index file")->required();
  norms->add_option("--p", p, "Space exponent (number or inf)");
  norms->add_option("--p0", p0, "Time exponent (number or inf)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(config);
    if (*mms) return cmd_mms(case_id, levels, out);
    if (*perturb) return cmd_perturb(config, delta, field, out);
    if (*norms) return cmd_norms(traj, p, p0);
  } catch (const kvt::ConfigError& e) {
    std::cerr << "configuration error:\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
    return kConfig;
  } catch (const kvt::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kConfig;
  } catch (const kvt::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const kvt::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
