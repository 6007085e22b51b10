#include "kvt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "kvt/errors.hpp"
#include "kvt/kernels.hpp"

namespace kvt {

Grid::Grid(int dim, std::array<int, 3> n, std::array<double, 3> length) : dim_(dim) {
  if (dim < 1 || dim > 3) throw UsageError("grid: dimension must be 1, 2 or 3");
  for (int a = 0; a < 3; ++a) {
    const auto sa = static_cast<std::size_t>(a);
    if (a < dim) {
      if (n[sa] < 3) {
        throw UsageError("grid: axis " + std::to_string(a) + " needs at least 3 nodes, got " +
                         std::to_string(n[sa]));
      }
      if (!(length[sa] > 0.0) || !std::isfinite(length[sa])) {
        throw UsageError("grid: axis " + std::to_string(a) + " length must be positive");
      }
      n_[sa] = n[sa];
      length_[sa] = length[sa];
      h_[sa] = length[sa] / (n[sa] - 1);
      cell_volume_ *= h_[sa];
    } else {
      n_[sa] = 1;
      length_[sa] = 0.0;
      h_[sa] = 1.0;
    }
  }
  stride_ = {1, n_[0], static_cast<std::ptrdiff_t>(n_[0]) * n_[1]};
  size_ = static_cast<std::size_t>(n_[0]) * n_[1] * n_[2];

  boundary_mask_.assign(size_, 0);
  interior_slot_.assign(size_, -1);
  weights_.assign(size_, 0.0);
  normalized_weights_.assign(size_, 0.0);
  for (std::size_t node = 0; node < size_; ++node) {
    const auto idx = multi_index(node);
    double w = 1.0;
    bool boundary = false;
    for (int a = 0; a < dim_; ++a) {
      const int i = idx[static_cast<std::size_t>(a)];
      if (i == 0 || i == n_[static_cast<std::size_t>(a)] - 1) {
        boundary = true;
        w *= 0.5;
      }
    }
    boundary_mask_[node] = boundary ? 1 : 0;
    normalized_weights_[node] = w;
    weights_[node] = w * cell_volume_;
    if (boundary) {
      boundary_.push_back(node);
    } else {
      interior_slot_[node] = static_cast<std::int64_t>(interior_.size());
      interior_.push_back(node);
    }
  }
}

GridPtr make_grid(int dim, std::array<int, 3> n, std::array<double, 3> length) {
  return std::make_shared<const Grid>(dim, n, length);
}

std::array<int, 3> Grid::multi_index(std::size_t node) const noexcept {
  const auto n0 = static_cast<std::size_t>(n_[0]);
  const auto n1 = static_cast<std::size_t>(n_[1]);
  return {static_cast<int>(node % n0), static_cast<int>((node / n0) % n1),
          static_cast<int>(node / (n0 * n1))};
}

std::size_t Grid::index(int i0, int i1, int i2) const noexcept {
  return static_cast<std::size_t>(i0) +
         static_cast<std::size_t>(n_[0]) *
             (static_cast<std::size_t>(i1) + static_cast<std::size_t>(n_[1]) * static_cast<std::size_t>(i2));
}

Vec3 Grid::coord(std::size_t node) const noexcept {
  const auto idx = multi_index(node);
  Vec3 x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) {
    const auto sa = static_cast<std::size_t>(a);
    x[sa] = idx[sa] == n_[sa] - 1 ? length_[sa] : idx[sa] * h_[sa];
  }
  return x;
}

double Grid::volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= length_[static_cast<std::size_t>(a)];
  return v;
}

bool Grid::same_shape(const Grid& o) const noexcept {
  return dim_ == o.dim_ && n_ == o.n_ && length_ == o.length_;
}

void require_same_grid(const Grid& a, const Grid& b, const char* who) {
  if (!a.same_shape(b)) throw UsageError(std::string(who) + ": fields live on different grids");
}

namespace {

// First derivative along one axis: central in the interior, second-order
// one-sided at the two ends.
template <class Get>
double first_derivative(const Grid& g, std::size_t node, int axis, int i, Get get) {
  const int n = g.n(axis);
  const double inv2h = 0.5 / g.h(axis);
  const std::ptrdiff_t s = g.stride(axis);
  const auto at = [&](std::ptrdiff_t off) {
    return get(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) + off));
  };
  if (i == 0) return (-3.0 * at(0) + 4.0 * at(s) - at(2 * s)) * inv2h;
  if (i == n - 1) return (3.0 * at(0) - 4.0 * at(-s) + at(-2 * s)) * inv2h;
  return (at(s) - at(-s)) * inv2h;
}

}  // namespace

SymTensorField sym_gradient(const VectorField& u) {
  const Grid& g = u.grid();
  const int d = g.dim();
  SymTensorField eps(u.grid_ptr());
  double grad[3][3] = {};
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto idx = g.multi_index(node);
    for (int c = 0; c < d; ++c) {
      for (int a = 0; a < d; ++a) {
        grad[c][a] = first_derivative(g, node, a, idx[static_cast<std::size_t>(a)],
                                      [&](std::size_t m) { return u(m, c); });
      }
    }
    SymTensor t;
    t[SymTensor::XX] = grad[0][0];
    if (d > 1) {
      t[SymTensor::YY] = grad[1][1];
      t[SymTensor::XY] = 0.5 * (grad[0][1] + grad[1][0]);
    }
    if (d > 2) {
      t[SymTensor::ZZ] = grad[2][2];
      t[SymTensor::XZ] = 0.5 * (grad[0][2] + grad[2][0]);
      t[SymTensor::YZ] = 0.5 * (grad[1][2] + grad[2][1]);
    }
    eps.set_tensor(node, t);
  }
  return eps;
}

namespace {
constexpr int kSymIndex[3][3] = {{SymTensor::XX, SymTensor::XY, SymTensor::XZ},
                                 {SymTensor::XY, SymTensor::YY, SymTensor::YZ},
                                 {SymTensor::XZ, SymTensor::YZ, SymTensor::ZZ}};
}

VectorField divergence_sym_tensor(const SymTensorField& s) {
  const Grid& g = s.grid();
  const int d = g.dim();
  VectorField out(s.grid_ptr());
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto idx = g.multi_index(node);
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) {
        const int comp = kSymIndex[i][j];
        acc += first_derivative(g, node, j, idx[static_cast<std::size_t>(j)],
                                [&](std::size_t m) { return s(m, comp); });
      }
      out(node, i) = acc;
    }
  }
  return out;
}

VectorField gradient(const ScalarField& f) {
  const Grid& g = f.grid();
  VectorField out(f.grid_ptr());
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto idx = g.multi_index(node);
    for (int a = 0; a < g.dim(); ++a) {
      out(node, a) = first_derivative(g, node, a, idx[static_cast<std::size_t>(a)],
                                      [&](std::size_t m) { return f(m); });
    }
  }
  return out;
}

ScalarField laplacian_neumann(const ScalarField& theta) {
  const Grid& g = theta.grid();
  ScalarField out(theta.grid_ptr());
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto idx = g.multi_index(node);
    const double c = theta(node);
    double acc = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const int i = idx[static_cast<std::size_t>(a)];
      const std::ptrdiff_t s = g.stride(a);
      const double inv_h2 = 1.0 / (g.h(a) * g.h(a));
      const auto at = [&](std::ptrdiff_t off) {
        return theta(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) + off));
      };
      // Mirror ghost: the missing neighbor equals the one on the other side.
      const double lo = i == 0 ? at(s) : at(-s);
      const double hi = i == g.n(a) - 1 ? at(-s) : at(s);
      acc += (lo - 2.0 * c + hi) * inv_h2;
    }
    out(node) = acc;
  }
  return out;
}

VectorField gradient_neumann(const ScalarField& theta) {
  const Grid& g = theta.grid();
  VectorField out(theta.grid_ptr());
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto idx = g.multi_index(node);
    for (int a = 0; a < g.dim(); ++a) {
      const int i = idx[static_cast<std::size_t>(a)];
      if (i == 0 || i == g.n(a) - 1) {
        out(node, a) = 0.0;
        continue;
      }
      const std::ptrdiff_t s = g.stride(a);
      out(node, a) = (theta(node + static_cast<std::size_t>(s)) - theta(node - static_cast<std::size_t>(s))) *
                     (0.5 / g.h(a));
    }
  }
  return out;
}

double boundary_max_abs(const VectorField& v) {
  double m = 0.0;
  for (std::size_t node : v.grid().boundary_nodes()) {
    for (int c = 0; c < v.components(); ++c) m = std::max(m, std::fabs(v(node, c)));
  }
  return m;
}

VectorField elasticity_operator(Tensor p, const VectorField& u, const MaterialParams& params,
                                BoundaryCheck check) {
  const Grid& g = u.grid();
  const int d = g.dim();
  if (check == BoundaryCheck::Enforce) {
    const double b = boundary_max_abs(u);
    if (b != 0.0) {
      std::ostringstream os;
      os << "elasticity_operator: displacement must vanish on the boundary (max |u| = " << b << ")";
      throw PreconditionError(os.str());
    }
  }
  const double mu = params.mu(p);
  const double lm = params.lambda(p) + mu;
  VectorField out(u.grid_ptr());
  for (std::size_t node : g.interior_nodes()) {
    const auto at = [&](std::ptrdiff_t off, int c) {
      return u(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) + off), c);
    };
    for (int i = 0; i < d; ++i) {
      double lap = 0.0;
      for (int a = 0; a < d; ++a) {
        const std::ptrdiff_t s = g.stride(a);
        lap += (at(s, i) - 2.0 * at(0, i) + at(-s, i)) / (g.h(a) * g.h(a));
      }
      double graddiv = 0.0;
      const std::ptrdiff_t si = g.stride(i);
      graddiv += (at(si, i) - 2.0 * at(0, i) + at(-si, i)) / (g.h(i) * g.h(i));
      for (int j = 0; j < d; ++j) {
        if (j == i) continue;
        const std::ptrdiff_t sj = g.stride(j);
        graddiv += (at(si + sj, j) - at(si - sj, j) - at(-si + sj, j) + at(-si - sj, j)) /
                   (4.0 * g.h(i) * g.h(j));
      }
      out(node, i) = mu * lap + lm * graddiv;
    }
  }
  return out;
}

VectorField elasticity_operator(int p, const VectorField& u, const MaterialParams& params,
                                BoundaryCheck check) {
  return elasticity_operator(tensor_index(p), u, params, check);
}

double integrate(const ScalarField& f) {
  return kernels::weighted_sum(f.grid().weights(), f.values());
}

double lp_norm(const ScalarField& f, double p) {
  if (std::isinf(p) && p > 0) return kernels::max_abs(f.values());
  if (!(p >= 1.0)) throw UsageError("lp_norm: exponent must satisfy p >= 1");
  const auto w = f.grid().weights();
  const auto v = f.values();
  double acc = 0.0;
  if (p == 2.0) {
    acc = kernels::weighted_dot(w, v, v);
  } else {
    for (std::size_t i = 0; i < v.size(); ++i) acc += w[i] * std::pow(std::fabs(v[i]), p);
  }
  return std::pow(acc, 1.0 / p);
}

double inner(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "inner");
  return kernels::weighted_dot(a.grid().weights(), a.values(), b.values());
}

double inner(const VectorField& a, const VectorField& b) {
  require_same_grid(a.grid(), b.grid(), "inner");
  const Grid& g = a.grid();
  const int d = g.dim();
  double acc = 0.0;
  const auto w = g.weights();
  for (std::size_t node = 0; node < g.size(); ++node) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += a(node, c) * b(node, c);
    acc += w[node] * s;
  }
  return acc;
}

double l2_norm(const VectorField& v) { return std::sqrt(inner(v, v)); }

ScalarField magnitude(const VectorField& v) {
  ScalarField out(v.grid_ptr());
  for (std::size_t node = 0; node < v.nodes(); ++node) {
    double s = 0.0;
    for (int c = 0; c < v.components(); ++c) s += v(node, c) * v(node, c);
    out(node) = std::sqrt(s);
  }
  return out;
}

ScalarField magnitude(const SymTensorField& t) {
  ScalarField out(t.grid_ptr());
  for (std::size_t node = 0; node < t.nodes(); ++node) out(node) = norm(t.tensor(node));
  return out;
}

}  // namespace kvt
