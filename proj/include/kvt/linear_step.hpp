#pragma once

// The two linear sub-problems of one successive-approximation sweep:
//
//   velocity:  (1/dt) v - Q_1 v = (1/dt) v_old + div[A_2 eps(u) - theta A_2 alpha] + b
//              over interior nodes (Dirichlet values eliminated);
//   heat:      (cv/dt) theta_f theta - k lap_N theta
//                 = (cv/dt) theta_f theta_old + heat_rhs(theta_f, eps(v), g)
//              over all nodes (mirror-ghost Neumann).
//
// The heat rows are scaled by the normalized trapezoid weights, which makes
// the Neumann Laplacian symmetric; row r therefore sums to
// w_r * (cv/dt) * theta_f[r] with w_r the normalized weight of node r.

#include <cstdint>
#include <span>
#include <vector>

#include "kvt/constitutive.hpp"
#include "kvt/errors.hpp"
#include "kvt/grid.hpp"
#include "kvt/kernels.hpp"

namespace kvt {

/// Compressed-row sparse matrix over the free unknowns of a sub-problem.
class SparseOperator {
 public:
  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseOperator() = default;
  /// Entries may repeat; repeated (row, col) pairs are summed in input order.
  static SparseOperator from_entries(std::size_t n, std::vector<Entry> entries, bool symmetric);

  std::size_t dimension() const noexcept { return n_; }
  std::size_t nonzeros() const noexcept { return vals_.size(); }
  bool symmetric() const noexcept { return symmetric_; }

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> apply(std::span<const double> x) const;
  std::vector<double> diagonal() const;
  /// Value at (row, col), 0 when not stored.
  double at(std::size_t row, std::size_t col) const;
  /// True when every stored (r, c, v) has a stored (c, r, v) with an
  /// identical bit pattern.
  bool bitwise_symmetric() const;
  std::vector<double> row_sums() const;

  std::span<const std::int64_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::int32_t> cols() const noexcept { return cols_; }
  std::span<const double> vals() const noexcept { return vals_; }

 private:
  kernels::CsrView view() const noexcept;

  std::size_t n_ = 0;
  bool symmetric_ = false;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<std::int32_t> cols_;
  std::vector<double> vals_;
};

struct LinearSystem {
  SparseOperator matrix;
  std::vector<double> rhs;
};

struct LinearSolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

class LinearSolveError : public ConvergenceError {
 public:
  LinearSolveError(const std::string& what, LinearSolveReport report)
      : ConvergenceError(what), report_(report) {}
  const LinearSolveReport& report() const noexcept { return report_; }

 private:
  LinearSolveReport report_;
};

struct LinearSolveResult {
  std::vector<double> solution;
  LinearSolveReport report;
};

/// Jacobi-preconditioned conjugate gradients. Stops when the true relative
/// residual |b - A x| / |b| is <= tol; the report carries that recomputed
/// residual. `initial_guess` may be empty (zero start). Throws
/// LinearSolveError after max_iter iterations, UsageError on bad arguments
/// or a matrix that is visibly not positive definite.
LinearSolveResult solve_spd(const SparseOperator& a, std::span<const double> rhs, double tol,
                            int max_iter, std::span<const double> initial_guess = {});

// ---------------------------------------------------------------------------
// Unknown layout helpers.

/// Velocity unknowns: interior_slot(node) * dim + component.
std::vector<double> pack_interior(const VectorField& v);
/// Inverse of pack_interior; boundary values are zero.
VectorField unpack_interior(std::span<const double> x, const GridPtr& grid);

// ---------------------------------------------------------------------------
// Velocity sub-problem.

/// (1/dt) I - Q_1 restricted to interior unknowns.
SparseOperator velocity_operator(double dt, const Grid& grid, const MaterialParams& params);

std::vector<double> velocity_rhs(double dt, const VectorField& v_old, const VectorField& u_iter,
                                 const ScalarField& theta_iter, const VectorField& b,
                                 const MaterialParams& params);

LinearSystem assemble_velocity_system(double dt, const VectorField& v_old,
                                      const VectorField& u_iter, const ScalarField& theta_iter,
                                      const VectorField& b, const MaterialParams& params);

// ---------------------------------------------------------------------------
// Heat sub-problem.

/// Throws DegeneracyError when min(theta_frozen) <= 0.
SparseOperator heat_operator(double dt, const ScalarField& theta_frozen,
                             const MaterialParams& params);

std::vector<double> heat_rhs_vector(double dt, const ScalarField& theta_old,
                                    const ScalarField& theta_frozen, const VectorField& v_iter,
                                    const ScalarField& g, const MaterialParams& params);

LinearSystem assemble_heat_system(double dt, const ScalarField& theta_old,
                                  const ScalarField& theta_frozen, const VectorField& v_iter,
                                  const ScalarField& g, const MaterialParams& params);

}  // namespace kvt
