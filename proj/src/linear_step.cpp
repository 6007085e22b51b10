#include "kvt/linear_step.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace kvt {

SparseOperator SparseOperator::from_entries(std::size_t n, std::vector<Entry> entries,
                                            bool symmetric) {
  if (n > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw UsageError("SparseOperator: dimension too large");
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseOperator op;
  op.n_ = n;
  op.symmetric_ = symmetric;
  op.row_ptr_.assign(n + 1, 0);
  op.cols_.reserve(entries.size());
  op.vals_.reserve(entries.size());
  std::size_t k = 0;
  for (std::size_t r = 0; r < n; ++r) {
    while (k < entries.size() && entries[k].row == r) {
      const std::size_t c = entries[k].col;
      if (c >= n) throw UsageError("SparseOperator: column index out of range");
      double v = 0.0;
      while (k < entries.size() && entries[k].row == r && entries[k].col == c) {
        v += entries[k].value;
        ++k;
      }
      op.cols_.push_back(static_cast<std::int32_t>(c));
      op.vals_.push_back(v);
    }
    op.row_ptr_[r + 1] = static_cast<std::int64_t>(op.cols_.size());
  }
  if (k != entries.size()) throw UsageError("SparseOperator: row index out of range");
  return op;
}

kernels::CsrView SparseOperator::view() const noexcept {
  return {n_, row_ptr_.data(), cols_.data(), vals_.data()};
}

void SparseOperator::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_) throw UsageError("SparseOperator: size mismatch");
  kernels::spmv(view(), x, y);
}

std::vector<double> SparseOperator::apply(std::span<const double> x) const {
  std::vector<double> y(n_);
  multiply(x, y);
  return y;
}

std::vector<double> SparseOperator::diagonal() const {
  std::vector<double> d(n_, 0.0);
  for (std::size_t r = 0; r < n_; ++r) d[r] = at(r, r);
  return d;
}

double SparseOperator::at(std::size_t row, std::size_t col) const {
  const auto begin = cols_.begin() + row_ptr_[row];
  const auto end = cols_.begin() + row_ptr_[row + 1];
  const auto it = std::lower_bound(begin, end, static_cast<std::int32_t>(col));
  if (it == end || *it != static_cast<std::int32_t>(col)) return 0.0;
  return vals_[static_cast<std::size_t>(it - cols_.begin())];
}

bool SparseOperator::bitwise_symmetric() const {
  for (std::size_t r = 0; r < n_; ++r) {
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const auto c = static_cast<std::size_t>(cols_[static_cast<std::size_t>(k)]);
      const auto begin = cols_.begin() + row_ptr_[c];
      const auto end = cols_.begin() + row_ptr_[c + 1];
      const auto it = std::lower_bound(begin, end, static_cast<std::int32_t>(r));
      if (it == end || *it != static_cast<std::int32_t>(r)) return false;
      const double mirrored = vals_[static_cast<std::size_t>(it - cols_.begin())];
      if (std::bit_cast<std::uint64_t>(mirrored) !=
          std::bit_cast<std::uint64_t>(vals_[static_cast<std::size_t>(k)])) {
        return false;
      }
    }
  }
  return true;
}

std::vector<double> SparseOperator::row_sums() const {
  std::vector<double> s(n_, 0.0);
  for (std::size_t r = 0; r < n_; ++r) {
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s[r] += vals_[static_cast<std::size_t>(k)];
  }
  return s;
}

// ---------------------------------------------------------------------------

LinearSolveResult solve_spd(const SparseOperator& a, std::span<const double> rhs, double tol,
                            int max_iter, std::span<const double> initial_guess) {
  const std::size_t n = a.dimension();
  if (rhs.size() != n) throw UsageError("solve_spd: rhs length does not match the operator");
  if (!initial_guess.empty() && initial_guess.size() != n) {
    throw UsageError("solve_spd: initial guess length does not match the operator");
  }
  if (!(tol > 0.0)) throw UsageError("solve_spd: tolerance must be positive");
  if (max_iter < 0) throw UsageError("solve_spd: max_iter must be non-negative");

  LinearSolveResult result;
  auto& x = result.solution;
  auto& rep = result.report;
  const double bnorm = std::sqrt(kernels::dot(rhs, rhs));
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    rep = {0, 0.0, true};
    return result;
  }
  if (initial_guess.empty()) {
    x.assign(n, 0.0);
  } else {
    x.assign(initial_guess.begin(), initial_guess.end());
  }

  std::vector<double> dinv = a.diagonal();
  for (double& d : dinv) {
    if (!(d > 0.0)) throw UsageError("solve_spd: operator has a nonpositive diagonal entry");
    d = 1.0 / d;
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  const auto true_residual = [&]() {
    a.multiply(x, r);
    kernels::xpay(rhs, -1.0, r);  // r = b - A x
    return std::sqrt(kernels::dot(r, r)) / bnorm;
  };

  double rel = true_residual();
  int it = 0;
  while (true) {
    if (rel <= tol) {
      rep = {it, rel, true};
      return result;
    }
    if (it >= max_iter) break;
    // (Re)start the recurrence from the current true residual.
    kernels::hadamard(dinv, r, z);
    p = z;
    double rz = kernels::dot(r, z);
    bool restart = false;
    while (it < max_iter) {
      a.multiply(p, q);
      const double pq = kernels::dot(p, q);
      if (!(pq > 0.0)) {
        if (pq == 0.0 && rz == 0.0) break;
        throw UsageError("solve_spd: operator is not positive definite (p.Ap <= 0)");
      }
      const double alpha = rz / pq;
      kernels::axpy(alpha, p, x);
      kernels::axpy(-alpha, q, r);
      ++it;
      const double rec = std::sqrt(kernels::dot(r, r)) / bnorm;
      if (rec <= tol) {
        restart = true;
        break;
      }
      kernels::hadamard(dinv, r, z);
      const double rz_new = kernels::dot(r, z);
      kernels::xpay(z, rz_new / rz, p);
      rz = rz_new;
    }
    const double previous = rel;
    rel = true_residual();
    if (!restart && rel > tol) break;
    // Guard against stagnation at round-off: the recursive residual said
    // converged but the true one cannot get there.
    if (restart && rel > tol && rel >= previous) break;
  }
  rep = {it, rel, false};
  std::ostringstream os;
  os << "solve_spd: no convergence after " << it << " iterations (relative residual " << rel
     << ", tolerance " << tol << ")";
  throw LinearSolveError(os.str(), rep);
}

// ---------------------------------------------------------------------------

std::vector<double> pack_interior(const VectorField& v) {
  const Grid& g = v.grid();
  const int d = g.dim();
  std::vector<double> x(g.interior_nodes().size() * static_cast<std::size_t>(d));
  std::size_t k = 0;
  for (std::size_t node : g.interior_nodes()) {
    for (int c = 0; c < d; ++c) x[k++] = v(node, c);
  }
  return x;
}

VectorField unpack_interior(std::span<const double> x, const GridPtr& grid) {
  const int d = grid->dim();
  if (x.size() != grid->interior_nodes().size() * static_cast<std::size_t>(d)) {
    throw UsageError("unpack_interior: length mismatch");
  }
  VectorField v(grid);
  std::size_t k = 0;
  for (std::size_t node : grid->interior_nodes()) {
    for (int c = 0; c < d; ++c) v(node, c) = x[k++];
  }
  return v;
}

namespace {

void require_dt(double dt, const char* who) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw UsageError(std::string(who) + ": time step must be positive");
  }
}

void require_dirichlet(const VectorField& v, const char* who, const char* name) {
  const double b = boundary_max_abs(v);
  if (b != 0.0) {
    std::ostringstream os;
    os << who << ": " << name << " must vanish on the boundary (max |.| = " << b << ")";
    throw PreconditionError(os.str());
  }
}

}  // namespace

SparseOperator velocity_operator(double dt, const Grid& g, const MaterialParams& params) {
  require_dt(dt, "velocity_operator");
  const int d = g.dim();
  const double mu = params.mu1;
  const double lm = params.lambda1 + params.mu1;
  const std::size_t n = g.interior_nodes().size() * static_cast<std::size_t>(d);
  std::vector<SparseOperator::Entry> entries;
  entries.reserve(n * static_cast<std::size_t>(1 + 2 * d + 4 * (d - 1)));

  const auto unknown = [&](std::size_t node, int c) -> std::int64_t {
    const auto slot = g.interior_slot(node);
    return slot < 0 ? -1 : slot * d + c;
  };

  for (std::size_t node : g.interior_nodes()) {
    for (int i = 0; i < d; ++i) {
      const auto row = static_cast<std::size_t>(unknown(node, i));
      double diag = 1.0 / dt;
      for (int a = 0; a < d; ++a) {
        const double ha2 = g.h(a) * g.h(a);
        double off = -mu / ha2;
        diag += 2.0 * mu / ha2;
        if (a == i) {
          off -= lm / ha2;
          diag += 2.0 * lm / ha2;
        }
        for (int sgn : {-1, 1}) {
          const auto nb = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) + sgn * g.stride(a));
          const auto col = unknown(nb, i);
          if (col >= 0) entries.push_back({row, static_cast<std::size_t>(col), off});
        }
      }
      entries.push_back({row, row, diag});
      for (int j = 0; j < d; ++j) {
        if (j == i) continue;
        const double c = lm / (4.0 * g.h(i) * g.h(j));
        for (int si : {-1, 1}) {
          for (int sj : {-1, 1}) {
            const auto nb = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) +
                                                     si * g.stride(i) + sj * g.stride(j));
            const auto col = unknown(nb, j);
            if (col >= 0) entries.push_back({row, static_cast<std::size_t>(col), -c * si * sj});
          }
        }
      }
    }
  }
  return SparseOperator::from_entries(n, std::move(entries), true);
}

std::vector<double> velocity_rhs(double dt, const VectorField& v_old, const VectorField& u_iter,
                                 const ScalarField& theta_iter, const VectorField& b,
                                 const MaterialParams& params) {
  require_dt(dt, "assemble_velocity_system");
  const Grid& g = v_old.grid();
  require_same_grid(g, u_iter.grid(), "assemble_velocity_system");
  require_same_grid(g, theta_iter.grid(), "assemble_velocity_system");
  require_same_grid(g, b.grid(), "assemble_velocity_system");
  require_dirichlet(v_old, "assemble_velocity_system", "v_old");
  require_dirichlet(u_iter, "assemble_velocity_system", "u_iter");

  const SymTensor m = thermal_stress_modulus(params);
  SymTensorField s = sym_gradient(u_iter);
  for (std::size_t node = 0; node < g.size(); ++node) {
    SymTensor t = apply_A(Tensor::Elasticity, s.tensor(node), params);
    t -= theta_iter(node) * m;
    s.set_tensor(node, t);
  }
  const VectorField force = divergence_sym_tensor(s);

  const int d = g.dim();
  std::vector<double> rhs(g.interior_nodes().size() * static_cast<std::size_t>(d));
  std::size_t k = 0;
  for (std::size_t node : g.interior_nodes()) {
    for (int c = 0; c < d; ++c) rhs[k++] = v_old(node, c) / dt + force(node, c) + b(node, c);
  }
  return rhs;
}

LinearSystem assemble_velocity_system(double dt, const VectorField& v_old,
                                      const VectorField& u_iter, const ScalarField& theta_iter,
                                      const VectorField& b, const MaterialParams& params) {
  auto rhs = velocity_rhs(dt, v_old, u_iter, theta_iter, b, params);
  return {velocity_operator(dt, v_old.grid(), params), std::move(rhs)};
}

SparseOperator heat_operator(double dt, const ScalarField& theta_frozen,
                             const MaterialParams& params) {
  require_dt(dt, "assemble_heat_system");
  const Grid& g = theta_frozen.grid();
  double tmin = std::numeric_limits<double>::infinity();
  for (double v : theta_frozen.values()) tmin = std::min(tmin, v);
  if (!(tmin > 0.0)) {
    std::ostringstream os;
    os << "assemble_heat_system: frozen temperature must be positive (min = " << tmin << ")";
    throw DegeneracyError(os.str());
  }
  const auto w = g.normalized_weights();
  const int d = g.dim();
  std::vector<SparseOperator::Entry> entries;
  entries.reserve(g.size() * static_cast<std::size_t>(1 + 2 * d));
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto idx = g.multi_index(node);
    double diag = params.cv * theta_frozen(node) / dt;
    for (int a = 0; a < d; ++a) {
      const int i = idx[static_cast<std::size_t>(a)];
      const double inv_h2 = 1.0 / (g.h(a) * g.h(a));
      const std::ptrdiff_t s = g.stride(a);
      diag += 2.0 * params.k * inv_h2;
      const bool lo_edge = i == 0;
      const bool hi_edge = i == g.n(a) - 1;
      // A boundary node has one neighbor along this axis, counted twice
      // through the mirror ghost.
      const double coeff = (lo_edge || hi_edge ? 2.0 : 1.0) * params.k * inv_h2;
      if (!lo_edge) {
        entries.push_back({node, static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) - s), -w[node] * coeff});
      }
      if (!hi_edge) {
        entries.push_back({node, static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) + s), -w[node] * coeff});
      }
    }
    entries.push_back({node, node, w[node] * diag});
  }
  return SparseOperator::from_entries(g.size(), std::move(entries), true);
}

std::vector<double> heat_rhs_vector(double dt, const ScalarField& theta_old,
                                    const ScalarField& theta_frozen, const VectorField& v_iter,
                                    const ScalarField& g, const MaterialParams& params) {
  require_dt(dt, "assemble_heat_system");
  const Grid& grid = theta_old.grid();
  require_same_grid(grid, theta_frozen.grid(), "assemble_heat_system");
  require_same_grid(grid, v_iter.grid(), "assemble_heat_system");
  require_same_grid(grid, g.grid(), "assemble_heat_system");
  const SymTensorField eps_t = sym_gradient(v_iter);
  const auto w = grid.normalized_weights();
  std::vector<double> rhs(grid.size());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double tf = theta_frozen(node);
    rhs[node] = w[node] * (params.cv / dt * tf * theta_old(node) +
                           heat_rhs(tf, eps_t.tensor(node), g(node), params));
  }
  return rhs;
}

LinearSystem assemble_heat_system(double dt, const ScalarField& theta_old,
                                  const ScalarField& theta_frozen, const VectorField& v_iter,
                                  const ScalarField& g, const MaterialParams& params) {
  SparseOperator op = heat_operator(dt, theta_frozen, params);
  return {std::move(op), heat_rhs_vector(dt, theta_old, theta_frozen, v_iter, g, params)};
}

}  // namespace kvt
