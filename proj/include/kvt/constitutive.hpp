#pragma once

// Pointwise tensor algebra and the thermodynamic constitutive functions of
// the Kelvin-Voigt thermoviscoelastic model with caloric specific heat
// c_v * theta. All functions are pure.

#include <array>
#include <string>
#include <vector>

namespace kvt {

/// Symmetric 3x3 tensor stored as its six independent components in the
/// order xx, yy, zz, xy, xz, yz. Problems in fewer than three dimensions
/// leave the trailing rows and columns zero.
struct SymTensor {
  enum Component { XX = 0, YY = 1, ZZ = 2, XY = 3, XZ = 4, YZ = 5 };

  std::array<double, 6> c{};

  static SymTensor zero() { return {}; }
  static SymTensor identity() { return diag(1.0, 1.0, 1.0); }
  static SymTensor diag(double a, double b, double d) { return {{a, b, d, 0.0, 0.0, 0.0}}; }

  double operator[](int k) const { return c[static_cast<std::size_t>(k)]; }
  double& operator[](int k) { return c[static_cast<std::size_t>(k)]; }

  /// Entry (i, j) of the full matrix, i, j in {0, 1, 2}.
  double at(int i, int j) const;
  double& at(int i, int j);
  /// Storage slot of entry (i, j).
  static int slot(int i, int j);
  double trace() const { return c[XX] + c[YY] + c[ZZ]; }

  SymTensor& operator+=(const SymTensor& o);
  SymTensor& operator-=(const SymTensor& o);
  SymTensor& operator*=(double s);
  bool operator==(const SymTensor&) const = default;
};

SymTensor operator+(SymTensor a, const SymTensor& b);
SymTensor operator-(SymTensor a, const SymTensor& b);
SymTensor operator*(double s, SymTensor a);
SymTensor operator*(SymTensor a, double s);

/// Full contraction a_ij b_ij; off-diagonal products count twice.
double ddot(const SymTensor& a, const SymTensor& b);
/// Frobenius norm sqrt(a . a).
double norm(const SymTensor& a);

/// Index of the isotropic fourth-order tensor: 1 = viscosity, 2 = elasticity.
enum class Tensor : int { Viscosity = 1, Elasticity = 2 };

/// Converts the integer index used on external surfaces; anything other
/// than 1 or 2 is a UsageError.
Tensor tensor_index(int p);

struct MaterialParams {
  double lambda1 = 0.5;  // viscosity constants
  double mu1 = 0.5;
  double lambda2 = 1.0;  // Lame constants
  double mu2 = 1.0;
  double k = 0.5;   // heat conductivity
  double cv = 1.0;  // specific heat coefficient (heat capacity is cv * theta)
  SymTensor alpha = SymTensor::diag(0.1, 0.1, 0.1);  // thermal expansion
  double beta = 1.0;  // availability weight, diagnostics only

  double lambda(Tensor p) const { return p == Tensor::Viscosity ? lambda1 : lambda2; }
  double mu(Tensor p) const { return p == Tensor::Viscosity ? mu1 : mu2; }

  /// Every violated invariant, each naming the parameter and the rule.
  /// Empty when the parameters are admissible.
  std::vector<std::string> violations() const;
  /// Throws UsageError listing all violations.
  void validate() const;
};

struct CoercivityBounds {
  double a_star = 0.0;  // lower
  double a_sup = 0.0;   // upper
};

/// A_p eps = lambda_p tr(eps) I + 2 mu_p eps.
SymTensor apply_A(Tensor p, const SymTensor& eps, const MaterialParams& params);
SymTensor apply_A(int p, const SymTensor& eps, const MaterialParams& params);

/// a_star = min(3 lambda + 2 mu, 2 mu), a_sup = max(3 lambda + 2 mu, 2 mu).
CoercivityBounds coercivity_bounds(Tensor p, const MaterialParams& params);
CoercivityBounds coercivity_bounds(int p, const MaterialParams& params);

/// A_2 alpha, the thermal stress per unit temperature.
SymTensor thermal_stress_modulus(const MaterialParams& params);

/// S = A_1 eps_t + A_2 (eps - theta alpha).
SymTensor stress(const SymTensor& eps, const SymTensor& eps_t, double theta,
                 const MaterialParams& params);

/// f = -cv theta^2 / 2 + eps.(A_2 eps) / 2 - theta eps.(A_2 alpha).
double free_energy(const SymTensor& eps, double theta, const MaterialParams& params);
/// e = cv theta^2 / 2 + eps.(A_2 eps) / 2.
double internal_energy(const SymTensor& eps, double theta, const MaterialParams& params);
/// eta = cv theta + (A_2 alpha).eps.
double entropy_density(const SymTensor& eps, double theta, const MaterialParams& params);

using Vec3 = std::array<double, 3>;

/// D = eps_t.(A_1 eps_t) / (2 theta) + k |grad theta|^2 / (2 theta^2).
/// Throws DomainError for theta <= 0.
double dissipation_potential(const SymTensor& eps_t, const Vec3& grad_theta, double theta,
                             const MaterialParams& params);

/// sigma = k |grad theta|^2 / theta^2 + (A_1 eps_t).eps_t / theta.
/// Throws DomainError for theta <= 0.
double entropy_production(const SymTensor& eps_t, const Vec3& grad_theta, double theta,
                          const MaterialParams& params);

/// Right-hand side of the heat equation:
/// -theta (A_2 alpha).eps_t + (A_1 eps_t).eps_t + g.
double heat_rhs(double theta, const SymTensor& eps_t, double g, const MaterialParams& params);

/// Rate constant of the temperature lower bound theta >= theta_ * exp(-c0 t):
/// c0 = |A_2 alpha|^2 / (4 a_{1*} cv). Obtained by choosing the Young weight
/// delta / 2 = a_{1*} when absorbing the thermal coupling into the viscous term.
double default_lower_bound_rate(const MaterialParams& params);

/// Constant c1 = |A_2 alpha|^2 / (2 a_{1*}) bounding the thermal coupling in
/// the mechanical part of the difference energy.
double default_gronwall_c1(const MaterialParams& params);

}  // namespace kvt
