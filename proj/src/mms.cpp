#include "kvt/mms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace kvt::mms {

namespace {

// d^m/ds^m of sin(w s) and cos(w s).
double sin_deriv(double w, double s, int m) {
  const double p = std::pow(w, m);
  switch (m % 4) {
    case 0: return p * std::sin(w * s);
    case 1: return p * std::cos(w * s);
    case 2: return -p * std::sin(w * s);
    default: return -p * std::cos(w * s);
  }
}

double cos_deriv(double w, double s, int m) {
  const double p = std::pow(w, m);
  switch (m % 4) {
    case 0: return p * std::cos(w * s);
    case 1: return -p * std::sin(w * s);
    case 2: return -p * std::cos(w * s);
    default: return p * std::sin(w * s);
  }
}

double space_factor(const SpaceFactor& f, double x, double length, int order) {
  const double w = f.k * std::numbers::pi / length;
  switch (f.kind) {
    case Profile::One: return order == 0 ? 1.0 : 0.0;
    case Profile::Sin: return sin_deriv(w, x, order);
    case Profile::Cos: return cos_deriv(w, x, order);
  }
  return 0.0;
}

double time_factor(const TimeFactor& f, double t, int order) {
  switch (f.kind) {
    case TimeKind::One: return order == 0 ? 1.0 : 0.0;
    case TimeKind::Exp: return std::pow(f.rate, order) * std::exp(f.rate * t);
    case TimeKind::Sin: return sin_deriv(f.rate, t, order);
    case TimeKind::Cos: return cos_deriv(f.rate, t, order);
  }
  return 0.0;
}

Term term(double amp, TimeFactor tf, SpaceFactor a, SpaceFactor b = {}, SpaceFactor c = {}) {
  return Term{amp, tf, {a, b, c}};
}

constexpr SpaceFactor sin_k(double k) { return {Profile::Sin, k}; }
constexpr SpaceFactor cos_k(double k) { return {Profile::Cos, k}; }
constexpr SpaceFactor one() { return {Profile::One, 0.0}; }
constexpr TimeFactor steady() { return {TimeKind::One, 0.0}; }

}  // namespace

double SeparableField::eval(const Vec3& x, double t, int time_order,
                            std::array<int, 3> orders) const {
  double acc = 0.0;
  for (const Term& tm : terms_) {
    double v = tm.amp * time_factor(tm.time, t, time_order);
    for (std::size_t a = 0; a < 3 && v != 0.0; ++a) {
      v *= space_factor(tm.space[a], x[a], length_[a], orders[a]);
    }
    acc += v;
  }
  return acc;
}

double SeparableField::dx(int a, const Vec3& x, double t, int time_order) const {
  std::array<int, 3> o{0, 0, 0};
  o[static_cast<std::size_t>(a)] = 1;
  return eval(x, t, time_order, o);
}

double SeparableField::dxx(int a, int b, const Vec3& x, double t, int time_order) const {
  std::array<int, 3> o{0, 0, 0};
  o[static_cast<std::size_t>(a)] += 1;
  o[static_cast<std::size_t>(b)] += 1;
  return eval(x, t, time_order, o);
}

double SeparableField::laplacian(const Vec3& x, double t, int time_order, int dim) const {
  double acc = 0.0;
  for (int a = 0; a < dim; ++a) acc += dxx(a, a, x, t, time_order);
  return acc;
}

ManufacturedCase::ManufacturedCase(CaseSpec spec) : spec_(std::move(spec)) {
  const int d = spec_.dim;
  if (d < 1 || d > 3) throw UsageError("manufactured case: dimension must be 1, 2 or 3");
  spec_.params.validate();
  for (int i = d; i < 3; ++i) {
    if (!spec_.u[static_cast<std::size_t>(i)].terms().empty()) {
      throw UsageError("manufactured case '" + spec_.id + "': displacement component beyond dim");
    }
  }
  for (const auto* f : {&spec_.u[0], &spec_.u[1], &spec_.u[2], &spec_.theta}) {
    for (const Term& tm : f->terms()) {
      for (int a = d; a < 3; ++a) {
        if (tm.space[static_cast<std::size_t>(a)].kind != Profile::One) {
          throw UsageError("manufactured case '" + spec_.id + "': spatial profile along an unused axis");
        }
      }
    }
  }

  constexpr int kSamples = 9;
  constexpr int kTimes = 5;
  const auto locate = [&](const Vec3& x, double t) {
    std::ostringstream os;
    os << "(x = " << x[0] << ", " << x[1] << ", " << x[2] << "; t = " << t << ")";
    return os.str();
  };
  theta_min_ = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kTimes; ++it) {
    const double t = spec_.t_end * it / (kTimes - 1);
    // Boundary faces.
    for (int a = 0; a < d; ++a) {
      for (double side : {0.0, spec_.length[static_cast<std::size_t>(a)]}) {
        const int m1 = d > 1 ? kSamples : 1;
        const int m2 = d > 2 ? kSamples : 1;
        for (int i = 0; i < m1; ++i) {
          for (int j = 0; j < m2; ++j) {
            Vec3 x{0.0, 0.0, 0.0};
            int slot = 0;
            for (int b = 0; b < d; ++b) {
              auto& xb = x[static_cast<std::size_t>(b)];
              if (b == a) {
                xb = side;
              } else {
                const int s = slot++ == 0 ? i : j;
                xb = spec_.length[static_cast<std::size_t>(b)] * s / (kSamples - 1);
              }
            }
            const Vec3 uv = u(x, t);
            for (int c = 0; c < d; ++c) {
              if (std::abs(uv[static_cast<std::size_t>(c)]) > 1e-12) {
                throw UsageError("manufactured case '" + spec_.id +
                                 "': displacement does not vanish on the boundary at " + locate(x, t));
              }
            }
            if (std::abs(spec_.theta.dx(a, x, t)) > 1e-12) {
              throw UsageError("manufactured case '" + spec_.id +
                               "': normal temperature gradient nonzero at " + locate(x, t));
            }
          }
        }
      }
    }
    // Positivity over the box.
    const int m0 = kSamples;
    const int m1 = d > 1 ? kSamples : 1;
    const int m2 = d > 2 ? kSamples : 1;
    for (int i = 0; i < m0; ++i) {
      for (int j = 0; j < m1; ++j) {
        for (int l = 0; l < m2; ++l) {
          Vec3 x{spec_.length[0] * i / (kSamples - 1), d > 1 ? spec_.length[1] * j / (kSamples - 1) : 0.0,
                 d > 2 ? spec_.length[2] * l / (kSamples - 1) : 0.0};
          const double th = theta(x, t);
          theta_min_ = std::min(theta_min_, th);
          if (!(th > 0.0)) {
            throw UsageError("manufactured case '" + spec_.id +
                             "': temperature not positive at " + locate(x, t));
          }
        }
      }
    }
  }
}

Vec3 ManufacturedCase::vec(const Vec3& x, double t, int time_order) const {
  Vec3 out{0.0, 0.0, 0.0};
  for (int i = 0; i < spec_.dim; ++i) {
    out[static_cast<std::size_t>(i)] = spec_.u[static_cast<std::size_t>(i)].eval(x, t, time_order);
  }
  return out;
}

SymTensor ManufacturedCase::strain(const Vec3& x, double t, int time_order) const {
  const int d = spec_.dim;
  double grad[3][3] = {};
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) grad[i][j] = spec_.u[static_cast<std::size_t>(i)].dx(j, x, t, time_order);
  }
  SymTensor e;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) e.at(i, j) = 0.5 * (grad[i][j] + grad[j][i]);
  }
  return e;
}

Vec3 ManufacturedCase::grad_theta(const Vec3& x, double t) const {
  Vec3 g{0.0, 0.0, 0.0};
  for (int a = 0; a < spec_.dim; ++a) g[static_cast<std::size_t>(a)] = spec_.theta.dx(a, x, t);
  return g;
}

Vec3 ManufacturedCase::div_A_eps(Tensor p, const Vec3& x, double t, int time_order) const {
  const int d = spec_.dim;
  const double mu = spec_.params.mu(p);
  const double lm = spec_.params.lambda(p) + mu;
  Vec3 out{0.0, 0.0, 0.0};
  for (int i = 0; i < d; ++i) {
    const auto& ui = spec_.u[static_cast<std::size_t>(i)];
    double graddiv = 0.0;
    for (int j = 0; j < d; ++j) graddiv += spec_.u[static_cast<std::size_t>(j)].dxx(i, j, x, t, time_order);
    out[static_cast<std::size_t>(i)] = mu * ui.laplacian(x, t, time_order, d) + lm * graddiv;
  }
  return out;
}

Vec3 ManufacturedCase::body_force(const Vec3& x, double t) const {
  const Vec3 acc = a(x, t);
  const Vec3 visc = div_A_eps(Tensor::Viscosity, x, t, 1);
  const Vec3 elas = div_A_eps(Tensor::Elasticity, x, t, 0);
  const SymTensor m = thermal_stress_modulus(spec_.params);
  const Vec3 gt = grad_theta(x, t);
  Vec3 b{0.0, 0.0, 0.0};
  for (int i = 0; i < spec_.dim; ++i) {
    double thermal = 0.0;
    for (int j = 0; j < spec_.dim; ++j) thermal += m.at(i, j) * gt[static_cast<std::size_t>(j)];
    const auto k = static_cast<std::size_t>(i);
    b[k] = acc[k] - visc[k] - elas[k] + thermal;
  }
  return b;
}

double ManufacturedCase::heat_supply(const Vec3& x, double t) const {
  const MaterialParams& p = spec_.params;
  const double th = theta(x, t);
  const SymTensor et = strain(x, t, 1);
  return p.cv * th * theta_t(x, t) - p.k * spec_.theta.laplacian(x, t, 0, spec_.dim) +
         th * ddot(thermal_stress_modulus(p), et) - ddot(apply_A(Tensor::Viscosity, et, p), et);
}

SimState ManufacturedCase::sample(const GridPtr& grid, double t) const {
  SimState s(grid, 1.0, t);
  for (std::size_t n = 0; n < grid->size(); ++n) {
    const Vec3 x = grid->coord(n);
    s.theta(n) = theta(x, t);
    if (grid->on_boundary(n)) continue;
    const Vec3 uu = u(x, t);
    const Vec3 vv = v(x, t);
    for (int c = 0; c < grid->dim(); ++c) {
      s.u(n, c) = uu[static_cast<std::size_t>(c)];
      s.v(n, c) = vv[static_cast<std::size_t>(c)];
    }
  }
  return s;
}

GridPtr ManufacturedCase::make_grid(int n) const {
  return kvt::make_grid(spec_.dim, {n, n, n}, spec_.length);
}

std::unique_ptr<Sources> ManufacturedCase::sources() const {
  auto self = std::make_shared<const ManufacturedCase>(*this);
  return std::make_unique<FunctionSources>([self](double t, VectorField& b, ScalarField& g) {
    const Grid& grid = b.grid();
    for (std::size_t n = 0; n < grid.size(); ++n) {
      const Vec3 x = grid.coord(n);
      g(n) = self->heat_supply(x, t);
      const Vec3 bf = grid.on_boundary(n) ? Vec3{0.0, 0.0, 0.0} : self->body_force(x, t);
      for (int c = 0; c < grid.dim(); ++c) b(n, c) = bf[static_cast<std::size_t>(c)];
    }
  });
}

CaseSpec builtin_case(const std::string& id) {
  CaseSpec c;
  c.id = id;
  const Vec3 L = c.length;
  if (id == "zero") {
    c.theta = SeparableField({term(1.0, steady(), one())}, L);
  } else if (id == "thermal") {
    c.theta = SeparableField({term(2.0, steady(), one()),
                              term(1.0, {TimeKind::Exp, -1.0}, cos_k(1))},
                             L);
  } else if (id == "default") {
    c.u[0] = SeparableField({term(0.05, {TimeKind::Cos, 2.0}, sin_k(1), sin_k(1))}, L);
    c.u[1] = SeparableField({term(0.05, {TimeKind::Exp, -1.0}, sin_k(2), sin_k(1))}, L);
    c.theta = SeparableField({term(2.0, steady(), one()),
                              term(0.5, {TimeKind::Exp, -1.0}, cos_k(1), cos_k(1))},
                             L);
  } else if (id == "default3d") {
    c.dim = 3;
    c.u[0] = SeparableField({term(0.05, {TimeKind::Cos, 2.0}, sin_k(1), sin_k(1), sin_k(1))}, L);
    c.u[1] = SeparableField({term(0.05, {TimeKind::Exp, -1.0}, sin_k(2), sin_k(1), sin_k(1))}, L);
    c.u[2] = SeparableField({term(0.03, {TimeKind::Cos, 1.0}, sin_k(1), sin_k(1), sin_k(2))}, L);
    c.theta = SeparableField({term(2.0, steady(), one()),
                              term(0.5, {TimeKind::Exp, -1.0}, cos_k(1), cos_k(1), cos_k(1))},
                             L);
  } else {
    throw UsageError("unknown manufactured case '" + id + "'");
  }
  return c;
}

std::vector<std::string> builtin_case_ids() { return {"zero", "thermal", "default", "default3d"}; }

ManufacturedCase manufacture(CaseSpec spec) { return ManufacturedCase(std::move(spec)); }

namespace {

class ErrorTracker : public Observer {
 public:
  explicit ErrorTracker(const ManufacturedCase& c) : case_(c) {}
  void on_start(const SimState& s) override { measure(s); }
  void on_step(const StepEvent& ev) override {
    measure(ev.after);
    max_picard = std::max(max_picard, ev.trace.iterations);
  }
  Errors err;
  int max_picard = 0;

 private:
  void measure(const SimState& s) {
    const SimState ex = case_.sample(s.grid_ptr(), s.t);
    const ScalarField dth = s.theta - ex.theta;
    err.u = std::max(err.u, l2_norm(s.u - ex.u));
    err.v = std::max(err.v, l2_norm(s.v - ex.v));
    err.theta = std::max(err.theta, std::sqrt(inner(dth, dth)));
  }
  const ManufacturedCase& case_;
};

}  // namespace

LevelResult run_level(const ManufacturedCase& c, int n, double dt, double t_end,
                      const StepperConfig& stepper) {
  const GridPtr grid = c.make_grid(n);
  StepperConfig cfg = stepper;
  cfg.dt = dt;
  const SimState initial = c.sample(grid, 0.0);
  const auto src = c.sources();
  ErrorTracker tracker(c);
  Observer* obs[] = {&tracker};
  const RunSummary sum = run(initial, cfg, c.params(), *src, t_end, obs);
  LevelResult r;
  r.n = n;
  r.h = grid->h(0);
  r.dt = dt;
  r.steps = sum.steps;
  r.error = tracker.err;
  r.max_picard = tracker.max_picard;
  return r;
}

double fit_order(const std::vector<double>& steps, const std::vector<double>& errors) {
  if (steps.size() != errors.size()) throw UsageError("fit_order: size mismatch");
  if (steps.size() < 3) throw UsageError("fit_order: need at least three points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (!(errors[i] > 0.0) || !(steps[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double x = std::log(steps[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

namespace {

Orders fit(const std::vector<LevelResult>& rows, bool by_h) {
  std::vector<double> s, eu, ev, et;
  for (const auto& r : rows) {
    s.push_back(by_h ? r.h : r.dt);
    eu.push_back(r.error.u);
    ev.push_back(r.error.v);
    et.push_back(r.error.theta);
  }
  return {fit_order(s, eu), fit_order(s, ev), fit_order(s, et)};
}

LevelResult guarded_level(const ManufacturedCase& c, int n, double dt, double t_end,
                          const StepperConfig& stepper) {
  try {
    return run_level(c, n, dt, t_end, stepper);
  } catch (const std::exception& e) {
    std::ostringstream os;
    os << "convergence study '" << c.id() << "', n = " << n << ", dt = " << dt << ": " << e.what();
    throw ConvergenceError(os.str());
  }
}

}  // namespace

OrderReport convergence_study(const ManufacturedCase& c, const StudyConfig& cfg) {
  if (cfg.resolutions.size() < 3) throw UsageError("convergence_study: need at least three resolutions");
  for (std::size_t i = 1; i < cfg.resolutions.size(); ++i) {
    if (cfg.resolutions[i] - 1 != 2 * (cfg.resolutions[i - 1] - 1)) {
      throw UsageError("convergence_study: resolutions must halve h at each level (n -> 2n - 1)");
    }
  }
  OrderReport rep;
  rep.case_id = c.id();
  if (cfg.spatial) {
    const double h0 = c.spec().length[0] / (cfg.resolutions.front() - 1);
    for (int n : cfg.resolutions) {
      const double h = c.spec().length[0] / (n - 1);
      const double dt = cfg.dt_coarse * (h / h0) * (h / h0);
      rep.spatial.push_back(guarded_level(c, n, dt, cfg.t_spatial, cfg.stepper));
    }
    rep.spatial_order = fit(rep.spatial, true);
  }
  if (cfg.temporal) {
    if (cfg.dts.size() < 3) throw UsageError("convergence_study: need at least three time steps");
    for (double dt : cfg.dts) {
      rep.temporal.push_back(guarded_level(c, cfg.resolutions.back(), dt, cfg.t_temporal, cfg.stepper));
    }
    rep.temporal_order = fit(rep.temporal, false);
  }
  return rep;
}

}  // namespace kvt::mms
