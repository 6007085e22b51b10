#include "kvt/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kvt/errors.hpp"

namespace kvt {

int SymTensor::slot(int i, int j) {
  if (i == j) return i;
  const int lo = std::min(i, j);
  const int hi = std::max(i, j);
  if (lo == 0 && hi == 1) return XY;
  if (lo == 0 && hi == 2) return XZ;
  return YZ;
}

double SymTensor::at(int i, int j) const { return c[static_cast<std::size_t>(slot(i, j))]; }
double& SymTensor::at(int i, int j) { return c[static_cast<std::size_t>(slot(i, j))]; }

SymTensor& SymTensor::operator+=(const SymTensor& o) {
  for (std::size_t k = 0; k < 6; ++k) c[k] += o.c[k];
  return *this;
}

SymTensor& SymTensor::operator-=(const SymTensor& o) {
  for (std::size_t k = 0; k < 6; ++k) c[k] -= o.c[k];
  return *this;
}

SymTensor& SymTensor::operator*=(double s) {
  for (auto& v : c) v *= s;
  return *this;
}

SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
SymTensor operator*(double s, SymTensor a) { return a *= s; }
SymTensor operator*(SymTensor a, double s) { return a *= s; }

double ddot(const SymTensor& a, const SymTensor& b) {
  return a.c[0] * b.c[0] + a.c[1] * b.c[1] + a.c[2] * b.c[2] +
         2.0 * (a.c[3] * b.c[3] + a.c[4] * b.c[4] + a.c[5] * b.c[5]);
}

double norm(const SymTensor& a) { return std::sqrt(ddot(a, a)); }

Tensor tensor_index(int p) {
  if (p == 1) return Tensor::Viscosity;
  if (p == 2) return Tensor::Elasticity;
  throw UsageError("tensor index must be 1 (viscosity) or 2 (elasticity), got " +
                   std::to_string(p));
}

std::vector<std::string> MaterialParams::violations() const {
  std::vector<std::string> out;
  auto fmt = [](double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };
  const struct {
    const char* lambda_name;
    const char* mu_name;
    double lambda;
    double mu;
  } pairs[] = {{"lambda1", "mu1", lambda1, mu1}, {"lambda2", "mu2", lambda2, mu2}};
  for (const auto& p : pairs) {
    if (!std::isfinite(p.mu) || !(p.mu > 0.0)) {
      out.push_back(std::string(p.mu_name) + " = " + fmt(p.mu) +
                    " violates the elasticity range rule mu_p > 0");
    }
    if (!std::isfinite(p.lambda) || !(3.0 * p.lambda + 2.0 * p.mu > 0.0)) {
      out.push_back(std::string(p.lambda_name) + " = " + fmt(p.lambda) +
                    " violates the elasticity range rule 3*lambda_p + 2*mu_p > 0 (with " +
                    p.mu_name + " = " + fmt(p.mu) + ")");
    }
  }
  if (!std::isfinite(k) || !(k > 0.0)) out.push_back("k = " + fmt(k) + " must be > 0 (heat conductivity)");
  if (!std::isfinite(cv) || !(cv > 0.0)) out.push_back("cv = " + fmt(cv) + " must be > 0 (specific heat)");
  if (!std::isfinite(beta) || !(beta > 0.0)) out.push_back("beta = " + fmt(beta) + " must be > 0 (availability weight)");
  for (double a : alpha.c) {
    if (!std::isfinite(a)) {
      out.push_back("alpha has a non-finite component");
      break;
    }
  }
  return out;
}

void MaterialParams::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid material parameters:";
  for (const auto& s : v) msg += "\n  " + s;
  throw UsageError(msg);
}

SymTensor apply_A(Tensor p, const SymTensor& eps, const MaterialParams& params) {
  const double lam = params.lambda(p);
  const double mu = params.mu(p);
  SymTensor out = (2.0 * mu) * eps;
  const double lt = lam * eps.trace();
  out.c[SymTensor::XX] += lt;
  out.c[SymTensor::YY] += lt;
  out.c[SymTensor::ZZ] += lt;
  return out;
}

SymTensor apply_A(int p, const SymTensor& eps, const MaterialParams& params) {
  return apply_A(tensor_index(p), eps, params);
}

CoercivityBounds coercivity_bounds(Tensor p, const MaterialParams& params) {
  const double bulk = 3.0 * params.lambda(p) + 2.0 * params.mu(p);
  const double shear = 2.0 * params.mu(p);
  return {std::min(bulk, shear), std::max(bulk, shear)};
}

CoercivityBounds coercivity_bounds(int p, const MaterialParams& params) {
  return coercivity_bounds(tensor_index(p), params);
}

SymTensor thermal_stress_modulus(const MaterialParams& params) {
  return apply_A(Tensor::Elasticity, params.alpha, params);
}

SymTensor stress(const SymTensor& eps, const SymTensor& eps_t, double theta,
                 const MaterialParams& params) {
  return apply_A(Tensor::Viscosity, eps_t, params) +
         apply_A(Tensor::Elasticity, eps - theta * params.alpha, params);
}

double free_energy(const SymTensor& eps, double theta, const MaterialParams& params) {
  const SymTensor a2eps = apply_A(Tensor::Elasticity, eps, params);
  return -0.5 * params.cv * theta * theta + 0.5 * ddot(eps, a2eps) -
         theta * ddot(eps, thermal_stress_modulus(params));
}

double internal_energy(const SymTensor& eps, double theta, const MaterialParams& params) {
  return 0.5 * params.cv * theta * theta + 0.5 * ddot(eps, apply_A(Tensor::Elasticity, eps, params));
}

double entropy_density(const SymTensor& eps, double theta, const MaterialParams& params) {
  return params.cv * theta + ddot(thermal_stress_modulus(params), eps);
}

namespace {
void require_positive_theta(double theta, const char* who) {
  if (!(theta > 0.0)) {
    std::ostringstream os;
    os << who << ": temperature must be positive, got " << theta;
    throw DomainError(os.str());
  }
}

double sq(const Vec3& v) { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; }
}  // namespace

double dissipation_potential(const SymTensor& eps_t, const Vec3& grad_theta, double theta,
                             const MaterialParams& params) {
  require_positive_theta(theta, "dissipation_potential");
  const double visc = ddot(eps_t, apply_A(Tensor::Viscosity, eps_t, params));
  return visc / (2.0 * theta) + 0.5 * params.k * sq(grad_theta) / (theta * theta);
}

double entropy_production(const SymTensor& eps_t, const Vec3& grad_theta, double theta,
                          const MaterialParams& params) {
  require_positive_theta(theta, "entropy_production");
  const double visc = ddot(apply_A(Tensor::Viscosity, eps_t, params), eps_t);
  return params.k * sq(grad_theta) / (theta * theta) + visc / theta;
}

double heat_rhs(double theta, const SymTensor& eps_t, double g, const MaterialParams& params) {
  return -theta * ddot(thermal_stress_modulus(params), eps_t) +
         ddot(apply_A(Tensor::Viscosity, eps_t, params), eps_t) + g;
}

double default_lower_bound_rate(const MaterialParams& params) {
  const double m = norm(thermal_stress_modulus(params));
  const double a1 = coercivity_bounds(Tensor::Viscosity, params).a_star;
  return m * m / (4.0 * a1 * params.cv);
}

double default_gronwall_c1(const MaterialParams& params) {
  const double m = norm(thermal_stress_modulus(params));
  const double a1 = coercivity_bounds(Tensor::Viscosity, params).a_star;
  return m * m / (2.0 * a1);
}

}  // namespace kvt
