#pragma once

// Rectangular box [0, L_0] x ... x [0, L_{d-1}] with a collocated node grid,
// node-indexed fields, and the discrete differential operators.
//
// Conventions:
//   * node index = i0 + n0 * (i1 + n1 * i2); unused axes have n = 1.
//   * quadrature is the tensor trapezoid rule; weight(node) carries the
//     volume element, normalized_weight(node) is the same rule divided by
//     prod h (1 in the interior, 1/2 per boundary axis).
//   * inner products of fields are trapezoid-weighted.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "kvt/constitutive.hpp"

namespace kvt {

class Grid {
 public:
  /// dim in {1,2,3}; n[a] >= 3 and length[a] > 0 for a < dim. Entries for
  /// a >= dim are ignored. Throws UsageError otherwise.
  Grid(int dim, std::array<int, 3> n, std::array<double, 3> length);

  int dim() const noexcept { return dim_; }
  int n(int axis) const noexcept { return n_[static_cast<std::size_t>(axis)]; }
  double length(int axis) const noexcept { return length_[static_cast<std::size_t>(axis)]; }
  double h(int axis) const noexcept { return h_[static_cast<std::size_t>(axis)]; }
  std::ptrdiff_t stride(int axis) const noexcept { return stride_[static_cast<std::size_t>(axis)]; }
  std::size_t size() const noexcept { return size_; }

  std::array<int, 3> multi_index(std::size_t node) const noexcept;
  std::size_t index(int i0, int i1 = 0, int i2 = 0) const noexcept;
  Vec3 coord(std::size_t node) const noexcept;

  bool on_boundary(std::size_t node) const noexcept { return boundary_mask_[node] != 0; }
  const std::vector<std::size_t>& interior_nodes() const noexcept { return interior_; }
  const std::vector<std::size_t>& boundary_nodes() const noexcept { return boundary_; }
  /// Position of an interior node in interior_nodes(), or -1 for boundary nodes.
  std::int64_t interior_slot(std::size_t node) const noexcept { return interior_slot_[node]; }

  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> normalized_weights() const noexcept { return normalized_weights_; }
  double cell_volume() const noexcept { return cell_volume_; }
  double volume() const noexcept;

  bool same_shape(const Grid& o) const noexcept;

 private:
  int dim_;
  std::array<int, 3> n_{};
  std::array<double, 3> length_{};
  std::array<double, 3> h_{};
  std::array<std::ptrdiff_t, 3> stride_{};
  std::size_t size_ = 0;
  double cell_volume_ = 1.0;
  std::vector<std::uint8_t> boundary_mask_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> boundary_;
  std::vector<std::int64_t> interior_slot_;
  std::vector<double> weights_;
  std::vector<double> normalized_weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int dim, std::array<int, 3> n, std::array<double, 3> length);

enum class FieldKind { Scalar, Vector, SymTensor };

/// Node-indexed field. Component count is 1, dim, or 6; values are stored
/// node-major (all components of a node are contiguous).
template <FieldKind K>
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid, double fill = 0.0)
      : grid_(std::move(grid)),
        values_(grid_->size() * static_cast<std::size_t>(components_for(*grid_)), fill) {}

  static int components_for(const Grid& g) noexcept {
    if constexpr (K == FieldKind::Scalar) return 1;
    if constexpr (K == FieldKind::Vector) return g.dim();
    return 6;
  }

  int components() const noexcept { return components_for(*grid_); }
  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::size_t nodes() const noexcept { return grid_->size(); }

  double& operator()(std::size_t node, int comp = 0) noexcept {
    return values_[node * static_cast<std::size_t>(components()) + static_cast<std::size_t>(comp)];
  }
  double operator()(std::size_t node, int comp = 0) const noexcept {
    return values_[node * static_cast<std::size_t>(components()) + static_cast<std::size_t>(comp)];
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_finite() const noexcept;

  Field& operator+=(const Field& o) {
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  Field& operator*=(double s) {
    for (auto& v : values_) v *= s;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }

  /// Exact value equality (bitwise for non-NaN data) on identically shaped grids.
  bool operator==(const Field& o) const {
    return grid_->same_shape(*o.grid_) && values_ == o.values_;
  }

  // SymTensor fields only.
  SymTensor tensor(std::size_t node) const requires(K == FieldKind::SymTensor) {
    SymTensor t;
    for (int k = 0; k < 6; ++k) t[k] = (*this)(node, k);
    return t;
  }
  void set_tensor(std::size_t node, const SymTensor& t) requires(K == FieldKind::SymTensor) {
    for (int k = 0; k < 6; ++k) (*this)(node, k) = t[k];
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

using ScalarField = Field<FieldKind::Scalar>;
using VectorField = Field<FieldKind::Vector>;
using SymTensorField = Field<FieldKind::SymTensor>;

template <FieldKind K>
bool Field<K>::all_finite() const noexcept {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Differential operators.

/// eps(u) = (grad u + grad u^T) / 2. Second-order central differences at
/// interior nodes, second-order one-sided differences on the boundary.
SymTensorField sym_gradient(const VectorField& u);

/// Row-wise divergence (div S)_i = d_j S_ij with the same difference
/// formulas as sym_gradient.
VectorField divergence_sym_tensor(const SymTensorField& s);

/// (2d+1)-point Laplacian with homogeneous Neumann data imposed through
/// mirror ghost nodes. Symmetric in the trapezoid inner product; rows sum to 0.
ScalarField laplacian_neumann(const ScalarField& theta);

/// Gradient consistent with the mirror-ghost Neumann condition: central
/// differences, with the normal component zero on boundary faces.
VectorField gradient_neumann(const ScalarField& theta);

/// Plain gradient with the sym_gradient difference formulas (no boundary
/// condition assumed).
VectorField gradient(const ScalarField& f);

enum class BoundaryCheck { Enforce, Skip };

/// Q_p u = mu_p lap u + (lambda_p + mu_p) grad div u, compact stencil
/// (three-point second differences, four-point cross differences). Values
/// at interior nodes; boundary rows are zero. With BoundaryCheck::Enforce a
/// displacement that does not vanish on the boundary raises PreconditionError.
VectorField elasticity_operator(Tensor p, const VectorField& u, const MaterialParams& params,
                                BoundaryCheck check = BoundaryCheck::Enforce);
VectorField elasticity_operator(int p, const VectorField& u, const MaterialParams& params,
                                BoundaryCheck check = BoundaryCheck::Enforce);

// ---------------------------------------------------------------------------
// Quadrature and norms (fixed summation order).

double integrate(const ScalarField& f);
/// (int |f|^p)^(1/p); p = +infinity gives max |f|. p < 1 is a UsageError.
double lp_norm(const ScalarField& f, double p);

/// Trapezoid inner products.
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);
double l2_norm(const VectorField& v);

/// Pointwise |v|.
ScalarField magnitude(const VectorField& v);
/// Pointwise tensor norm |eps|.
ScalarField magnitude(const SymTensorField& t);

/// Max |v| over boundary nodes (Dirichlet check).
double boundary_max_abs(const VectorField& v);

void require_same_grid(const Grid& a, const Grid& b, const char* who);

}  // namespace kvt
