#include "kvt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kvt {

namespace {

void require_positive_theta(const ScalarField& theta, const char* who) {
  for (double v : theta.values()) {
    if (!(v > 0.0)) {
      std::ostringstream os;
      os << who << ": temperature must be positive (found " << v << ")";
      throw DomainError(os.str());
    }
  }
}

// Visits every grid edge (p, q = p + stride(a)) with its quadrature weight.
template <class Fn>
void for_each_edge(const Grid& g, Fn&& fn) {
  const auto w = g.weights();
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto idx = g.multi_index(p);
    for (int a = 0; a < g.dim(); ++a) {
      const int i = idx[static_cast<std::size_t>(a)];
      if (i == g.n(a) - 1) continue;
      const std::size_t q = p + static_cast<std::size_t>(g.stride(a));
      const double we = w[p] * (i == 0 ? 2.0 : 1.0);
      fn(p, q, we, g.h(a));
    }
  }
}

double edge_grad_log_sq(const ScalarField& theta) {
  double acc = 0.0;
  for_each_edge(theta.grid(), [&](std::size_t p, std::size_t q, double we, double h) {
    const double d = theta(q) - theta(p);
    acc += we * d * d / (h * h * theta(p) * theta(q));
  });
  return acc;
}

double weighted_sum(const Grid& g, const std::vector<double>& f) {
  return kernels::weighted_sum(g.weights(), f);
}

}  // namespace

EnergyParts energy(const SimState& s, const MaterialParams& params) {
  const Grid& g = s.grid();
  const SymTensorField eps = sym_gradient(s.u);
  std::vector<double> el(g.size()), th(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    const SymTensor e = eps.tensor(n);
    el[n] = 0.5 * ddot(apply_A(Tensor::Elasticity, e, params), e);
    th[n] = 0.5 * params.cv * s.theta(n) * s.theta(n);
  }
  EnergyParts out;
  out.kinetic = 0.5 * inner(s.v, s.v);
  out.elastic = weighted_sum(g, el);
  out.thermal = weighted_sum(g, th);
  out.total = out.kinetic + out.elastic + out.thermal;
  return out;
}

double total_entropy(const SimState& s, const MaterialParams& params) {
  const Grid& g = s.grid();
  const SymTensorField eps = sym_gradient(s.u);
  std::vector<double> eta(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    eta[n] = entropy_density(eps.tensor(n), s.theta(n), params);
  }
  return weighted_sum(g, eta);
}

double availability(const SimState& s, const MaterialParams& params) {
  return energy(s, params).total - params.beta * total_entropy(s, params);
}

ProductionParts entropy_production_integral(const SimState& s, const MaterialParams& params) {
  require_positive_theta(s.theta, "entropy_production_integral");
  const Grid& g = s.grid();
  const SymTensorField eps_t = sym_gradient(s.v);
  std::vector<double> visc(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    const SymTensor e = eps_t.tensor(n);
    visc[n] = ddot(apply_A(Tensor::Viscosity, e, params), e) / s.theta(n);
  }
  ProductionParts out;
  out.thermal = params.k * edge_grad_log_sq(s.theta);
  out.viscous = weighted_sum(g, visc);
  return out;
}

DissipativeNorms dissipative_norms(const SimState& s) {
  require_positive_theta(s.theta, "dissipative_norms");
  const Grid& g = s.grid();
  const SymTensorField eps_t = sym_gradient(s.v);
  std::vector<double> f(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    const SymTensor e = eps_t.tensor(n);
    f[n] = ddot(e, e) / s.theta(n);
  }
  return {edge_grad_log_sq(s.theta), weighted_sum(g, f)};
}

double energy_balance_residual(const SimState& old_s, const SimState& new_s, const VectorField& b,
                               const ScalarField& g, double dt, const MaterialParams& params) {
  const double e_old = energy(old_s, params).total;
  const double e_new = energy(new_s, params).total;
  const double work = inner(b, new_s.v) + integrate(g);
  return std::abs(e_new - e_old - dt * work) / (1.0 + std::abs(e_new));
}

namespace {

double supply_over_theta(const ScalarField& g, const ScalarField& theta) {
  ScalarField q(theta.grid_ptr());
  for (std::size_t n = 0; n < q.nodes(); ++n) q(n) = g(n) / theta(n);
  return integrate(q);
}

}  // namespace

EntropyBalance entropy_balance_residual(const SimState& old_s, const SimState& new_s,
                                        const ScalarField& g, double dt,
                                        const MaterialParams& params) {
  require_positive_theta(old_s.theta, "entropy_balance_residual");
  require_positive_theta(new_s.theta, "entropy_balance_residual");
  const double s_old = total_entropy(old_s, params);
  const double s_new = total_entropy(new_s, params);
  const double p_old = entropy_production_integral(old_s, params).total();
  const double p_new = entropy_production_integral(new_s, params).total();
  const double q_old = supply_over_theta(g, old_s.theta);
  const double q_new = supply_over_theta(g, new_s.theta);
  EntropyBalance out;
  out.residual = std::abs(s_new - s_old - 0.5 * dt * (p_old + p_new) - 0.5 * dt * (q_old + q_new)) /
                 (1.0 + std::abs(s_new));
  out.production = dt * p_new;
  return out;
}

double clausius_duhem_defect(const SimState& old_s, const SimState& new_s, const ScalarField& g,
                             double dt, const MaterialParams& params) {
  require_positive_theta(new_s.theta, "clausius_duhem_defect");
  const double rate = (total_entropy(new_s, params) - total_entropy(old_s, params)) / dt;
  return rate - supply_over_theta(g, new_s.theta) -
         entropy_production_integral(new_s, params).total();
}

double entropy_form_crosscheck(const SimState& old_s, const SimState& new_s, const ScalarField& g,
                               double dt, const MaterialParams& params) {
  require_positive_theta(old_s.theta, "entropy_form_crosscheck");
  require_positive_theta(new_s.theta, "entropy_form_crosscheck");
  const SymTensorField eps_old = sym_gradient(old_s.u);
  const SymTensorField eps_new = sym_gradient(new_s.u);
  const SymTensorField eps_t = sym_gradient(new_s.v);
  const ScalarField lap = laplacian_neumann(new_s.theta);
  const SymTensor m = thermal_stress_modulus(params);
  ScalarField r1(new_s.grid_ptr()), diff(new_s.grid_ptr());
  for (std::size_t n = 0; n < r1.nodes(); ++n) {
    const double th = new_s.theta(n);
    const SymTensor et = eps_t.tensor(n);
    const double visc = ddot(apply_A(Tensor::Viscosity, et, params), et);
    const double common = -params.k * lap(n) - visc - g(n);
    const double energy_form =
        params.cv * th * (th - old_s.theta(n)) / dt + th * ddot(m, et) + common;
    const double eta_new = entropy_density(eps_new.tensor(n), th, params);
    const double eta_old = entropy_density(eps_old.tensor(n), old_s.theta(n), params);
    const double entropy_form = th * (eta_new - eta_old) / dt + common;
    r1(n) = energy_form;
    diff(n) = energy_form - entropy_form;
  }
  return std::sqrt(inner(diff, diff)) / (1.0 + std::sqrt(inner(r1, r1)));
}

const std::vector<std::string>& DiagnosticsRecord::column_names() {
  static const std::vector<std::string> names = {
      "t",
      "kinetic",
      "elastic",
      "thermal",
      "total_energy",
      "entropy",
      "availability",
      "theta_min",
      "theta_max",
      "entropy_production",
      "energy_residual",
      "entropy_residual",
      "clausius_duhem_defect",
      "picard_iterations",
      "grad_log_theta_sq",
      "strain_rate_sq",
  };
  return names;
}

std::vector<double> DiagnosticsRecord::values() const {
  return {t,
          kinetic,
          elastic,
          thermal,
          total_energy,
          entropy,
          availability,
          theta_min,
          theta_max,
          entropy_production,
          energy_residual,
          entropy_residual,
          clausius_duhem_defect,
          static_cast<double>(picard_iterations),
          grad_log_theta_sq,
          strain_rate_sq};
}

DiagnosticsRecord initial_record(const SimState& s, const MaterialParams& params) {
  DiagnosticsRecord r;
  const EnergyParts e = energy(s, params);
  r.t = s.t;
  r.kinetic = e.kinetic;
  r.elastic = e.elastic;
  r.thermal = e.thermal;
  r.total_energy = e.total;
  r.entropy = total_entropy(s, params);
  r.availability = e.total - params.beta * r.entropy;
  r.theta_min = s.theta_min();
  r.theta_max = s.theta_max();
  r.entropy_production = entropy_production_integral(s, params).total();
  const DissipativeNorms dn = dissipative_norms(s);
  r.grad_log_theta_sq = dn.grad_log_theta_sq;
  r.strain_rate_sq = dn.strain_rate_sq;
  return r;
}

DiagnosticsRecord step_record(const StepEvent& ev, const MaterialParams& params) {
  DiagnosticsRecord r = initial_record(ev.after, params);
  r.energy_residual = energy_balance_residual(ev.before, ev.after, ev.b, ev.g, ev.dt, params);
  r.entropy_residual = entropy_balance_residual(ev.before, ev.after, ev.g, ev.dt, params).residual;
  r.clausius_duhem_defect = clausius_duhem_defect(ev.before, ev.after, ev.g, ev.dt, params);
  r.picard_iterations = ev.trace.iterations;
  return r;
}

void DiagnosticsRecorder::on_start(const SimState& s) {
  records_.clear();
  records_.push_back(initial_record(s, params_));
}

void DiagnosticsRecorder::on_step(const StepEvent& ev) {
  records_.push_back(step_record(ev, params_));
}

DecayCheck availability_decay_check(std::span<const DiagnosticsRecord> records,
                                    bool sources_zero) {
  if (!sources_zero) {
    throw UsageError("availability_decay_check: requires b = 0 and g = 0");
  }
  DecayCheck out;
  out.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& r = records[k];
    const double slack = 10.0 * r.energy_residual * (1.0 + std::abs(r.total_energy));
    const double excess = r.availability - records[k - 1].availability - slack;
    if (excess > out.worst_excess) {
      out.worst_excess = excess;
      out.worst_step = static_cast<int>(k);
    }
    if (excess > 0.0) out.passed = false;
  }
  if (records.size() < 2) out.worst_excess = 0.0;
  return out;
}

LowerBoundCheck theta_lower_bound_check(std::span<const DiagnosticsRecord> records,
                                        double theta_underbar, double c0, double g_min) {
  if (g_min < 0.0) {
    throw UsageError("theta_lower_bound_check: heat supply must be nonnegative");
  }
  if (!(theta_underbar > 0.0)) throw UsageError("theta_lower_bound_check: theta_underbar must be positive");
  if (!(c0 >= 0.0)) throw UsageError("theta_lower_bound_check: c0 must be nonnegative");
  LowerBoundCheck out;
  out.min_margin = std::numeric_limits<double>::infinity();
  if (records.empty()) return out;
  const double t0 = records.front().t;
  for (const auto& r : records) {
    const double m = r.theta_min - theta_underbar * std::exp(-c0 * (r.t - t0));
    out.margin.push_back(m);
    out.min_margin = std::min(out.min_margin, m);
    if (m < 0.0) out.passed = false;
  }
  return out;
}

double mixed_norm(std::span<const ScalarField> slices, std::span<const double> dts, double p,
                  double p0) {
  if (!(p >= 1.0) || !(p0 >= 1.0)) throw UsageError("mixed_norm: exponents must be >= 1");
  if (slices.size() != dts.size()) throw UsageError("mixed_norm: one time weight per slice");
  if (std::isinf(p0)) {
    double m = 0.0;
    for (const auto& f : slices) m = std::max(m, lp_norm(f, p));
    return m;
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < slices.size(); ++k) {
    acc += dts[k] * std::pow(lp_norm(slices[k], p), p0);
  }
  return std::pow(acc, 1.0 / p0);
}

double v2_norm(std::span<const ScalarField> slices, std::span<const double> dts) {
  if (slices.size() != dts.size()) throw UsageError("v2_norm: one time weight per slice");
  double sup = 0.0;
  double grad_sq = 0.0;
  for (std::size_t k = 0; k < slices.size(); ++k) {
    sup = std::max(sup, lp_norm(slices[k], 2.0));
    const VectorField gr = gradient(slices[k]);
    grad_sq += dts[k] * inner(gr, gr);
  }
  return sup + std::sqrt(grad_sq);
}

GronwallReport gronwall_compare(std::span<const SimState> run1, std::span<const SimState> run2,
                                const MaterialParams& params) {
  return gronwall_compare(run1, run2, params, default_gronwall_c1(params));
}

GronwallReport gronwall_compare(std::span<const SimState> run1, std::span<const SimState> run2,
                                const MaterialParams& params, double c1) {
  if (run1.size() != run2.size() || run1.empty()) {
    throw UsageError("gronwall_compare: trajectories must have the same nonzero length");
  }
  for (std::size_t j = 0; j < run1.size(); ++j) {
    if (!run1[j].grid().same_shape(run2[j].grid()) || !run1[j].grid().same_shape(run1[0].grid())) {
      throw UsageError("gronwall_compare: trajectories live on different grids");
    }
    if (run1[j].t != run2[j].t) throw UsageError("gronwall_compare: time stamps differ");
  }

  const GridPtr& grid = run1[0].grid_ptr();
  const auto x_of = [&](std::size_t j) {
    const VectorField du = run1[j].v - run2[j].v;
    const SymTensorField e = sym_gradient(run1[j].u - run2[j].u);
    std::vector<double> f(grid->size());
    for (std::size_t n = 0; n < f.size(); ++n) {
      const SymTensor en = e.tensor(n);
      const double dth = run1[j].theta(n) - run2[j].theta(n);
      f[n] = ddot(apply_A(Tensor::Elasticity, en, params), en) +
             params.cv * run2[j].theta(n) * dth * dth;
    }
    return inner(du, du) + kernels::weighted_sum(grid->weights(), f);
  };
  const auto rate_of = [&](std::size_t j) {
    // Backward differences; the first sample borrows the first step.
    const std::size_t lo = j == 0 ? 0 : j - 1;
    const std::size_t hi = j == 0 ? std::min<std::size_t>(1, run1.size() - 1) : j;
    double l3_t1 = 0.0, l3_t2 = 0.0;
    if (hi > lo) {
      const double dt = run1[hi].t - run1[lo].t;
      ScalarField t1 = run1[hi].theta - run1[lo].theta;
      ScalarField t2 = run2[hi].theta - run2[lo].theta;
      t1 *= 1.0 / dt;
      t2 *= 1.0 / dt;
      l3_t1 = lp_norm(t1, 3.0);
      l3_t2 = lp_norm(t2, 3.0);
    }
    const double l3_e = lp_norm(magnitude(sym_gradient(run1[j].v)), 3.0);
    const double linf = lp_norm(run2[j].theta, std::numeric_limits<double>::infinity());
    return c1 + params.k + l3_t1 * l3_t1 + l3_t2 * l3_t2 + l3_e * l3_e + linf * linf;
  };

  GronwallReport rep;
  double scale = 1.0;
  double integral = 0.0;
  for (std::size_t j = 0; j < run1.size(); ++j) {
    rep.t.push_back(run1[j].t);
    rep.x.push_back(x_of(j));
    rep.a.push_back(rate_of(j));
    if (j > 0) integral += (run1[j].t - run1[j - 1].t) * rep.a.back();
    rep.bound.push_back(rep.x.front() * std::exp(integral));
    const EnergyParts e1 = energy(run1[j], params);
    const EnergyParts e2 = energy(run2[j], params);
    scale = std::max(scale, 1.0 + 2.0 * (e1.total + e2.total));
  }
  rep.slack = 1e-12 * scale;
  for (std::size_t j = 0; j < rep.x.size(); ++j) {
    if (rep.x[j] > rep.bound[j] + rep.slack) rep.violation = true;
  }
  return rep;
}

}  // namespace kvt
