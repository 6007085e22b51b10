// Acceptance harness: one PASS/FAIL line per criterion, exit status 0 only
// when every criterion passes. Desk scale: 33x33 in 2D plus a 17^3 smoke
// run, T = 1. Shipped scenarios are read from KVT_SCENARIO_DIR.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "kvt/config.hpp"
#include "kvt/diagnostics.hpp"
#include "kvt/errors.hpp"
#include "kvt/io.hpp"
#include "kvt/mms.hpp"
#include "kvt/scenario.hpp"

#ifndef KVT_SCENARIO_DIR
#define KVT_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using namespace kvt;

namespace {

const char* const kScenarios[] = {"zero", "bump", "heated", "manufactured", "smoke3d"};

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "FAILED " + what;
    }
  }
  void note(const std::string& s) {
    if (!detail.empty()) detail += "; ";
    detail += s;
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

ScenarioConfig scenario(const std::string& name) {
  return load_config((fs::path(KVT_SCENARIO_DIR) / (name + ".ini")).string());
}

// Shipped scenario runs, computed once and shared between criteria.
class Runs {
 public:
  const ScenarioResult& get(const std::string& name, double dt = 0.0) {
    const std::string key = name + "@" + fmt("%g", dt);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    ScenarioConfig cfg = scenario(name);
    if (dt > 0.0) cfg.stepper.dt = dt;
    return cache_.emplace(key, run_scenario(cfg, {false, false})).first->second;
  }

 private:
  std::map<std::string, ScenarioResult> cache_;
};

double rel_energy_drift(const ScenarioResult& r) {
  const double e0 = r.records.front().total_energy;
  return std::abs(r.records.back().total_energy - e0) / std::abs(e0);
}

double cumulative_entropy_residual(const ScenarioResult& r) {
  double s = 0.0;
  for (const auto& rec : r.records) s += rec.entropy_residual;
  return s;
}

double mean_picard_ratio(const ScenarioResult& r) {
  double s = 0.0;
  int n = 0;
  for (const auto& tr : r.summary.traces) {
    for (double q : tr.ratios()) {
      s += q;
      ++n;
    }
  }
  return n ? s / n : 0.0;
}

// ---------------------------------------------------------------------------

constexpr int kSamples = 10000;

Outcome constitutive_suite() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.1, 3.0);
  std::uniform_real_distribution<double> temp(0.05, 5.0);
  auto tensor = [&](double scale) {
    SymTensor t;
    for (int k = 0; k < 6; ++k) t[k] = scale * unit(rng);
    return t;
  };
  auto params = [&] {
    MaterialParams p;
    p.mu1 = pos(rng);
    p.mu2 = pos(rng);
    p.lambda1 = -2.0 * p.mu1 / 3.0 + 1e-3 + 3.0 * std::abs(unit(rng));
    p.lambda2 = -2.0 * p.mu2 / 3.0 + 1e-3 + 3.0 * std::abs(unit(rng));
    p.k = pos(rng);
    p.cv = pos(rng);
    p.alpha = tensor(0.5);
    return p;
  };
  int sym = 0, coer = 0, energy = 0, fd = 0, sigma = 0, diss = 0;
  for (int s = 0; s < kSamples; ++s) {
    const MaterialParams p = params();
    const SymTensor e = tensor(1.0), z = tensor(1.0), et = tensor(3.0);
    const Vec3 g{5.0 * unit(rng), 5.0 * unit(rng), 5.0 * unit(rng)};
    const double t = temp(rng);
    for (int k : {1, 2}) {
      const double a = ddot(apply_A(k, e, p), z), b = ddot(e, apply_A(k, z, p));
      if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a))) ++sym;
      const auto cb = coercivity_bounds(k, p);
      const double q = ddot(apply_A(k, e, p), e), e2 = ddot(e, e);
      const double tol = 1e-12 * cb.a_sup * e2;
      if (q < cb.a_star * e2 - tol || q > cb.a_sup * e2 + tol) ++coer;
    }
    const double ie = internal_energy(e, t, p), eta = entropy_density(e, t, p);
    if (std::abs(ie - (free_energy(e, t, p) + t * eta)) > 1e-12 * (1.0 + std::abs(ie) + std::abs(t * eta))) ++energy;
    const double h = 1e-3;
    const double dfd = (free_energy(e, t - h, p) - free_energy(e, t + h, p)) / (2.0 * h);
    if (std::abs(eta - dfd) > 1e-8 * (1.0 + std::abs(eta))) ++fd;
    if (!(entropy_production(et, g, t, p) >= 0.0)) ++sigma;
    if (!(dissipation_potential(et, g, t, p) >= 0.0)) ++diss;
  }
  o.require(sym == 0, std::to_string(sym) + " symmetry samples");
  o.require(coer == 0, std::to_string(coer) + " coercivity samples");
  o.require(energy == 0, std::to_string(energy) + " e = f + theta eta samples");
  o.require(fd == 0, std::to_string(fd) + " entropy finite-difference samples");
  o.require(sigma == 0, std::to_string(sigma) + " sigma >= 0 samples");
  o.require(diss == 0, std::to_string(diss) + " D >= 0 samples");
  o.note(std::to_string(kSamples) + " samples per identity");
  return o;
}

VectorField random_interior(const GridPtr& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorField v(g);
  for (std::size_t i : g->interior_nodes()) {
    for (int c = 0; c < g->dim(); ++c) v(i, c) = u(rng);
  }
  return v;
}

Outcome operator_suite() {
  Outcome o;
  std::mt19937_64 rng(7);
  MaterialParams p;
  p.lambda1 = -0.3;
  p.mu1 = 0.8;
  p.lambda2 = 1.4;
  p.mu2 = 0.6;
  double worst_sym = 0.0, worst_pos = 0.0, worst_poly = 0.0, worst_lap = 0.0, worst_rows = 0.0;
  const GridPtr grids[] = {make_grid(2, {33, 33, 1}, {1.0, 1.0, 1.0}), make_grid(2, {17, 21, 1}, {1.0, 1.3, 1.0}),
                           make_grid(3, {17, 17, 17}, {1.0, 1.0, 1.0}), make_grid(3, {7, 9, 8}, {0.9, 1.2, 1.0})};
  for (const auto& g : grids) {
    for (Tensor which : {Tensor::Viscosity, Tensor::Elasticity}) {
      for (int s = 0; s < 10; ++s) {
        const auto u = random_interior(g, rng), w = random_interior(g, rng);
        const auto qu = elasticity_operator(which, u, p), qw = elasticity_operator(which, w, p);
        const double a = inner(qu, w), b = inner(u, qw);
        const double scale = std::sqrt(inner(qu, qu) * inner(w, w)) + 1e-300;
        worst_sym = std::max(worst_sym, std::abs(a - b) / scale);
        // -Q_p >= 0: report the most negative normalized value of -<Qu, u>.
        worst_pos = std::max(worst_pos, inner(qu, u) / (std::sqrt(inner(qu, qu) * inner(u, u)) + 1e-300));
      }
      // Q_p u = div(A_p eps(u)) on every monomial of degree <= 2 in every component.
      const int d = g->dim();
      for (int c = 0; c < d; ++c) {
        for (int a0 = 0; a0 <= 2; ++a0) {
          for (int a1 = 0; a1 <= (d > 1 ? 2 - a0 : 0); ++a1) {
            for (int a2 = 0; a2 <= (d > 2 ? 2 - a0 - a1 : 0); ++a2) {
              VectorField u(g);
              for (std::size_t n = 0; n < g->size(); ++n) {
                const Vec3 x = g->coord(n);
                u(n, c) = std::pow(x[0], a0) * std::pow(x[1], a1) * std::pow(x[2], a2);
              }
              const auto q = elasticity_operator(which, u, p, BoundaryCheck::Skip);
              const auto eps = sym_gradient(u);
              SymTensorField s(g);
              for (std::size_t n = 0; n < g->size(); ++n) s.set_tensor(n, apply_A(which, eps.tensor(n), p));
              const auto div = divergence_sym_tensor(s);
              double scale = 1.0;
              for (std::size_t n : g->interior_nodes()) {
                for (int k = 0; k < d; ++k) scale = std::max(scale, std::abs(div(n, k)));
              }
              for (std::size_t n : g->interior_nodes()) {
                for (int k = 0; k < d; ++k) worst_poly = std::max(worst_poly, std::abs(q(n, k) - div(n, k)) / scale);
              }
            }
          }
        }
      }
    }
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < 10; ++s) {
      ScalarField a(g), b(g);
      for (std::size_t n = 0; n < g->size(); ++n) {
        a(n) = u(rng);
        b(n) = u(rng);
      }
      const auto la = laplacian_neumann(a), lb = laplacian_neumann(b);
      const double x = inner(la, b), y = inner(a, lb);
      worst_lap = std::max(worst_lap, std::abs(x - y) / (std::sqrt(inner(la, la) * inner(b, b)) + 1e-300));
    }
    // Zero row sums: the Laplacian annihilates constants.
    const auto lc = laplacian_neumann(ScalarField(g, 3.0));
    worst_rows = std::max(worst_rows, lp_norm(lc, std::numeric_limits<double>::infinity()));
  }
  o.require(worst_sym <= 1e-10, "Q_p self-adjointness " + fmt("%.3g", worst_sym));
  o.require(worst_pos <= 1e-10, "-Q_p positivity " + fmt("%.3g", worst_pos));
  o.require(worst_poly <= 1e-10, "Q_p = div(A eps) on quadratics " + fmt("%.3g", worst_poly));
  o.require(worst_lap <= 1e-10, "Laplacian symmetry " + fmt("%.3g", worst_lap));
  o.require(worst_rows == 0.0, "Laplacian row sums " + fmt("%.3g", worst_rows));
  o.note("symmetry " + fmt("%.2e", worst_sym) + ", positivity defect " + fmt("%.2e", std::max(worst_pos, 0.0)) +
         ", quadratic defect " + fmt("%.2e", worst_poly) + ", Laplacian symmetry " + fmt("%.2e", worst_lap) +
         ", row sums " + fmt("%.2e", worst_rows));
  return o;
}

// Energy drift over T = 1 with b = g = 0 (bump scenario) at dt and dt / 2.
constexpr double kDriftConstant = 1.0;
constexpr double kDtCoarse = 0.02;
constexpr double kDtFine = 0.01;

Outcome energy_suite(Runs& runs) {
  Outcome o;
  const auto& a = runs.get("bump", kDtCoarse);
  const auto& b = runs.get("bump", kDtFine);
  const double da = rel_energy_drift(a), db = rel_energy_drift(b);
  const double ratio = da / db;
  o.require(da <= kDriftConstant * kDtCoarse, "drift bound at dt = 0.02");
  o.require(db <= kDriftConstant * kDtFine, "drift bound at dt = 0.01");
  o.require(std::abs(ratio - 2.0) <= 0.5, "Richardson ratio");
  o.note("relative drift " + fmt("%.3e", da) + " (dt 0.02), " + fmt("%.3e", db) + " (dt 0.01), ratio " +
         fmt("%.3f", ratio) + ", bound C dt with C = 1");
  return o;
}

Outcome entropy_suite(Runs& runs) {
  Outcome o;
  int negative = 0, records = 0;
  for (const char* name : kScenarios) {
    for (const auto& r : runs.get(name).records) {
      ++records;
      if (!(r.entropy_production >= 0.0)) ++negative;
    }
  }
  o.require(negative == 0, std::to_string(negative) + " records with negative production");
  const auto& a = runs.get("bump", kDtCoarse);
  const auto& b = runs.get("bump", kDtFine);
  const double h = 1.0 / 32.0;
  const double ra = cumulative_entropy_residual(a), rb = cumulative_entropy_residual(b);
  o.require(ra <= kDriftConstant * (kDtCoarse + h * h), "residual bound at dt = 0.02");
  o.require(rb <= kDriftConstant * (kDtFine + h * h), "residual bound at dt = 0.01");
  o.require(std::abs(ra / rb - 2.0) <= 0.5, "first-order shrinkage");
  o.note("int sigma >= 0 on " + std::to_string(records) + " records; cumulative residual " + fmt("%.3e", ra) +
         " -> " + fmt("%.3e", rb) + ", ratio " + fmt("%.3f", ra / rb));
  return o;
}

Outcome availability_suite(Runs& runs) {
  Outcome o;
  int checked = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (const char* name : kScenarios) {
    const auto& r = runs.get(name);
    if (!r.decay) continue;
    ++checked;
    worst = std::max(worst, r.decay->worst_excess);
    o.require(r.decay->passed, std::string(name) + " at step " + std::to_string(r.decay->worst_step));
  }
  o.require(checked >= 3, "source-free scenarios present");
  o.note(std::to_string(checked) + " source-free scenarios, worst excess over slack " + fmt("%.3e", worst));
  return o;
}

Outcome positivity_suite(Runs& runs) {
  Outcome o;
  int checked = 0;
  double min_theta = std::numeric_limits<double>::infinity();
  std::string skipped;
  for (const char* name : kScenarios) {
    const auto& r = runs.get(name);
    for (const auto& rec : r.records) min_theta = std::min(min_theta, rec.theta_min);
    o.require(r.summary.final_state.theta_min() > 0.0, std::string(name) + " positivity");
    if (!r.lower_bound) {
      skipped += std::string(skipped.empty() ? "" : ", ") + name;
      continue;
    }
    ++checked;
    o.require(r.lower_bound->passed,
              std::string(name) + " lower bound, min margin " + fmt("%.3e", r.lower_bound->min_margin));
  }
  o.note("min theta " + fmt("%.4f", min_theta) + "; bound theta_underbar exp(-c0 t) holds on " +
         std::to_string(checked) + " scenarios with g >= 0" +
         (skipped.empty() ? std::string() : " (not applicable, g < 0 somewhere: " + skipped + ")"));
  return o;
}

Outcome picard_suite(Runs& runs) {
  Outcome o;
  int max_iter = 0;
  double max_ratio = 0.0;
  for (const char* name : {"bump", "heated", "manufactured", "smoke3d"}) {
    for (const auto& tr : runs.get(name).summary.traces) {
      max_iter = std::max(max_iter, tr.iterations);
      o.require(tr.converged, std::string(name) + " convergence");
      for (double q : tr.ratios()) max_ratio = std::max(max_ratio, q);
    }
  }
  o.require(max_ratio < 1.0, "ratio < 1 (max " + fmt("%.3f", max_ratio) + ")");
  o.require(max_iter <= 50, "sweep cap");
  std::string means;
  for (const char* name : {"bump", "heated"}) {
    const double a = mean_picard_ratio(runs.get(name, kDtCoarse));
    const double b = mean_picard_ratio(runs.get(name, kDtFine));
    o.require(b < a, std::string(name) + " mean ratio decrease");
    means += std::string(means.empty() ? "" : ", ") + name + " " + fmt("%.4f", a) + " -> " + fmt("%.4f", b);
  }
  o.note("max ratio " + fmt("%.3f", max_ratio) + ", max sweeps " + std::to_string(max_iter) +
         ", mean ratio dt 0.02 -> 0.01: " + means);
  return o;
}

Outcome dependence_suite() {
  Outcome o;
  const ScenarioConfig cfg = scenario("bump");
  const auto twin = run_perturbation(cfg, PerturbField::Theta0, 0.0);
  double twin_max = 0.0;
  for (double x : twin.report.x) twin_max = std::max(twin_max, x);
  o.require(twin_max <= twin.report.slack, "identical twins");
  const double delta = 1e-4;
  const auto full = run_perturbation(cfg, PerturbField::Theta0, delta);
  const auto half = run_perturbation(cfg, PerturbField::Theta0, 0.5 * delta);
  o.require(!full.report.violation && !half.report.violation, "Gronwall envelope");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t j = 0; j < full.report.x.size(); ++j) {
    const double r = full.report.x[j] / half.report.x[j];
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  o.require(lo >= 2.0 && hi <= 8.0, "delta^2 scaling");
  o.note("twin max X " + fmt("%.3e", twin_max) + " (slack " + fmt("%.3e", twin.report.slack) + "), X(T) " +
         fmt("%.3e", full.report.x.back()) + " vs envelope " + fmt("%.3e", full.report.bound.back()) +
         ", X ratio for halved delta in [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "]");
  return o;
}

Outcome mms_suite() {
  Outcome o;
  const auto c = mms::manufacture(mms::builtin_case("default"));
  const auto rep = mms::convergence_study(c, mms::StudyConfig{});
  const auto in = [](double x, double target) { return std::isfinite(x) && std::abs(x - target) <= 0.3; };
  const auto& s = rep.spatial_order;
  const auto& t = rep.temporal_order;
  o.require(in(s.u, 2.0) && in(s.v, 2.0) && in(s.theta, 2.0), "spatial order");
  o.require(in(t.u, 1.0) && in(t.v, 1.0) && in(t.theta, 1.0), "temporal order");
  o.note("spatial orders u/v/theta " + fmt("%.3f", s.u) + "/" + fmt("%.3f", s.v) + "/" + fmt("%.3f", s.theta) +
         ", temporal " + fmt("%.3f", t.u) + "/" + fmt("%.3f", t.v) + "/" + fmt("%.3f", t.theta));
  return o;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome io_suite() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / ("kvt_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  ScenarioConfig cfg = scenario("bump");
  cfg.output.csv = (dir / "bump.csv").string();
  cfg.output.snapshot_every = 0;
  const auto first = run_scenario(cfg);
  const std::string a = slurp(cfg.output.csv);
  run_scenario(cfg);
  const std::string b = slurp(cfg.output.csv);
  o.require(!a.empty() && a == b, "byte-identical CSV");

  const std::string cp = (dir / "final.kvcp").string();
  io::save_checkpoint(first.summary.final_state, cp);
  const SimState back = io::load_checkpoint(cp);
  const auto same = [](std::span<const double> x, std::span<const double> y) {
    return x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
  };
  const auto& f = first.summary.final_state;
  o.require(back.t == f.t && same(back.u.values(), f.u.values()) && same(back.v.values(), f.v.values()) &&
                same(back.theta.values(), f.theta.values()),
            "bit-exact checkpoint");
  fs::remove_all(dir);

  // Each out-of-range material parameter must be rejected with its rule.
  const struct {
    const char* line;
    const char* key;
    const char* rule;
  } cases[] = {
      {"mu1 = 0", "material.mu1", "mu_p > 0"},
      {"mu2 = -1", "material.mu2", "mu_p > 0"},
      {"lambda1 = -1", "material.lambda1", "3*lambda_p + 2*mu_p > 0"},
      {"lambda2 = -0.7", "material.lambda2", "3*lambda_p + 2*mu_p > 0"},
      {"k = 0", "material.k", "heat conductivity"},
      {"cv = -2", "material.cv", "specific heat"},
      {"beta = 0", "material.beta", "availability weight"},
  };
  int cited = 0;
  for (const auto& c : cases) {
    bool ok = false;
    try {
      parse_config(std::string("[material]\n") + c.line + "\n", "acceptance.ini");
    } catch (const ConfigError& e) {
      ok = e.violations().size() == 1 && e.violations()[0].find(c.key) != std::string::npos &&
           e.violations()[0].find(c.rule) != std::string::npos;
    }
    if (ok) ++cited;
    o.require(ok, std::string("rule citation for ") + c.line);
  }
  o.note("CSV " + std::to_string(a.size()) + " bytes identical, checkpoint bit-exact, " + std::to_string(cited) +
         "/" + std::to_string(std::size(cases)) + " parameter rules cited");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> fn;
  };
  Runs runs;
  const std::vector<Criterion> criteria = {
      {1, "constitutive identities", 5.0, constitutive_suite},
      {2, "operator structure", 10.0, operator_suite},
      {3, "energy conservation", 60.0, [&] { return energy_suite(runs); }},
      {4, "entropy production and balance", 60.0, [&] { return entropy_suite(runs); }},
      {5, "availability decay", 60.0, [&] { return availability_suite(runs); }},
      {6, "temperature positivity and lower bound", 60.0, [&] { return positivity_suite(runs); }},
      {7, "successive-approximation contraction", 60.0, [&] { return picard_suite(runs); }},
      {8, "continuous dependence", 60.0, dependence_suite},
      {9, "manufactured-solution convergence", 300.0, mms_suite},
      {10, "determinism and I/O", 60.0, io_suite},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) o.require(false, "runtime budget " + fmt("%.0f s", c.budget_s));
    if (!o.pass) ++failed;
    std::printf("criterion %2d %s  %s [%.1f s]: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
