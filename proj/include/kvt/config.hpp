#pragma once

// Scenario files: sectioned key = value text.
//
//   [grid]       dim, n = [..], length = [..]
//   [material]   lambda1, mu1, lambda2, mu2, k, cv, beta,
//                alpha = [xx, yy, zz, xy, xz, yz]
//   [stepper]    dt, t_end, picard_tol, picard_max, cg_tol, cg_max, theta_floor
//   [initial]    preset = rest | bump | manufactured | checkpoint,
//                theta0, theta_amp, u_amp, v_amp, case, path
//   [sources]    preset = zero | constant | manufactured, b = [..], g, case
//   [output]     csv, snapshot_every, snapshot_dir
//   [diagnostics] theta_underbar, c0, c1
//
// '#' starts a comment. Strings may be quoted. Unknown sections and keys
// are errors. Relative paths resolve against the file's directory.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kvt/constitutive.hpp"
#include "kvt/picard.hpp"

namespace kvt {

struct GridSpec {
  int dim = 2;
  std::array<int, 3> n{33, 33, 33};
  Vec3 length{1.0, 1.0, 1.0};
};

enum class InitialPreset { Rest, Bump, Manufactured, Checkpoint };
enum class SourcePreset { Zero, Constant, Manufactured };

struct InitialSpec {
  InitialPreset preset = InitialPreset::Rest;
  double theta0 = 1.0;
  double theta_amp = 0.0;  // bump: theta0 + theta_amp * prod cos(pi x / L)
  double u_amp = 0.0;      // bump: u_0 = u_amp * prod sin(pi x / L)
  double v_amp = 0.0;      // bump: last velocity component, first mode doubled along x
  std::string case_id = "default";
  std::string path;
};

struct SourceSpec {
  SourcePreset preset = SourcePreset::Zero;
  Vec3 b{0.0, 0.0, 0.0};
  double g = 0.0;
  std::string case_id = "default";
};

struct OutputSpec {
  std::string csv;
  int snapshot_every = 0;
  std::string snapshot_dir = "snapshots";
};

struct DiagnosticsSpec {
  std::optional<double> theta_underbar;  // default: initial minimum temperature
  std::optional<double> c0;              // default: derived rate
  std::optional<double> c1;
};

struct ScenarioConfig {
  GridSpec grid;
  MaterialParams material;
  StepperConfig stepper;
  double t_end = 1.0;
  InitialSpec initial;
  SourceSpec sources;
  OutputSpec output;
  DiagnosticsSpec diagnostics;
};

/// Every violated rule of a parsed configuration, each prefixed with its key path.
std::vector<std::string> config_violations(const ScenarioConfig& cfg);

/// Parses and validates. Throws ConfigError listing every problem; parse
/// problems carry "origin:line". Relative paths are resolved against base_dir.
ScenarioConfig parse_config(std::string_view text, const std::string& origin = "<text>",
                            const std::string& base_dir = "");
/// Throws IoError when the file cannot be read.
ScenarioConfig load_config(const std::string& path);

}  // namespace kvt
