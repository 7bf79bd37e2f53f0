#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#ifdef EMACFEM_WITH_UMFPACK
#include <umfpack.h>
#endif

#include "emacfem/common.hpp"

namespace emacfem {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXd;

/// Square sparse matrix with its right-hand side.
struct SparseSystem {
  SparseMatrix matrix;
  Vector rhs;

  Index size() const { return matrix.rows(); }
};

/// Relative residual a direct solve must reach before it is accepted.
inline constexpr double kLinearSolveTolerance = 1e-10;

/// Pivots below this fraction of the largest pivot mark the matrix singular.
inline constexpr double kSingularPivotRatio = 1e-13;

/// Sparse LU with partial pivoting. The symbolic analysis is kept between
/// factorizations of matrices with the same sparsity pattern.
class DirectSolver {
 public:
  DirectSolver() = default;
  DirectSolver(const DirectSolver&) = delete;
  DirectSolver& operator=(const DirectSolver&) = delete;
  ~DirectSolver() { release(); }

  void factorize(const SparseMatrix& a) {
    matrix_ = a;
    matrix_.makeCompressed();
    const bool same_pattern = analyzed_ && same_pattern_as_analyzed(matrix_);
#ifdef EMACFEM_WITH_UMFPACK
    factorize_umfpack(same_pattern);
#else
    csc_ = matrix_;
    csc_.makeCompressed();
    if (!same_pattern) {
      lu_.analyzePattern(csc_);
      remember_pattern(matrix_);
    }
    lu_.factorize(csc_);
    if (lu_.info() != Eigen::Success) {
      throw SolverError("sparse LU factorization failed: " + lu_.lastErrorMessage());
    }
    check_pivots();
#endif
  }

  /// Solves with the last factorization and verifies the relative residual,
  /// applying one step of iterative refinement if needed.
  Vector solve(const Vector& b) const {
    Vector x = raw_solve(b);
    const double bnorm = b.norm();
    if (bnorm == 0.0) return Vector::Zero(b.size());
    Vector r = b - matrix_ * x;
    if (!(r.norm() <= kLinearSolveTolerance * bnorm)) {
      x += raw_solve(r);
      r = b - matrix_ * x;
    }
    const double rel = r.norm() / bnorm;
    if (!(rel <= kLinearSolveTolerance) || !x.allFinite()) {
      std::ostringstream msg;
      msg << "direct solve residual " << rel << " exceeds " << kLinearSolveTolerance
          << " (matrix may be singular or ill-conditioned)";
      throw SolverError(msg.str());
    }
    return x;
  }

  /// Smallest and largest absolute pivot of the last factorization.
  std::pair<double, double> pivot_range() const { return pivots_; }

 private:
  bool same_pattern_as_analyzed(const SparseMatrix& a) const {
    if (a.rows() != pattern_rows_ || a.nonZeros() != static_cast<Index>(pattern_inner_.size())) return false;
    return std::equal(a.outerIndexPtr(), a.outerIndexPtr() + a.rows() + 1, pattern_outer_.begin()) &&
           std::equal(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros(), pattern_inner_.begin());
  }

  void remember_pattern(const SparseMatrix& a) {
    pattern_rows_ = a.rows();
    pattern_outer_.assign(a.outerIndexPtr(), a.outerIndexPtr() + a.rows() + 1);
    pattern_inner_.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
    analyzed_ = true;
  }

  void fail_singular(Index column) const {
    std::ostringstream msg;
    msg << "matrix is numerically singular: pivot ratio " << pivots_.first / pivots_.second << " (min |pivot| "
        << pivots_.first << ", max |pivot| " << pivots_.second << ")";
    if (column >= 0) msg << " at column " << column;
    throw SolverError(msg.str());
  }

#ifdef EMACFEM_WITH_UMFPACK
  void release() {
    if (numeric_) umfpack_di_free_numeric(&numeric_);
    if (symbolic_) umfpack_di_free_symbolic(&symbolic_);
    numeric_ = symbolic_ = nullptr;
  }

  // A row-major matrix is the column-major storage of its transpose, so the
  // factorization is of A^T and solves use UMFPACK_At.
  void factorize_umfpack(bool same_pattern) {
    double control[UMFPACK_CONTROL];
    double info[UMFPACK_INFO];
    umfpack_di_defaults(control);
    const int n = static_cast<int>(matrix_.rows());
    if (numeric_) umfpack_di_free_numeric(&numeric_);
    numeric_ = nullptr;
    if (!same_pattern) {
      if (symbolic_) umfpack_di_free_symbolic(&symbolic_);
      symbolic_ = nullptr;
      int status = umfpack_di_symbolic(n, n, matrix_.outerIndexPtr(), matrix_.innerIndexPtr(), matrix_.valuePtr(),
                                       &symbolic_, control, info);
      if (status != UMFPACK_OK) throw SolverError("UMFPACK symbolic analysis failed, status " + std::to_string(status));
      remember_pattern(matrix_);
    }
    int status = umfpack_di_numeric(matrix_.outerIndexPtr(), matrix_.innerIndexPtr(), matrix_.valuePtr(), symbolic_,
                                    &numeric_, control, info);
    pivots_ = {info[UMFPACK_UMIN], info[UMFPACK_UMAX]};
    if (status == UMFPACK_WARNING_singular_matrix) fail_singular(-1);
    if (status != UMFPACK_OK) throw SolverError("UMFPACK factorization failed, status " + std::to_string(status));
    if (!(pivots_.first > kSingularPivotRatio * pivots_.second)) fail_singular(-1);
  }

  Vector raw_solve(const Vector& b) const {
    Vector x(b.size());
    double control[UMFPACK_CONTROL];
    double info[UMFPACK_INFO];
    umfpack_di_defaults(control);
    control[UMFPACK_IRSTEP] = 0;
    int status = umfpack_di_solve(UMFPACK_At, matrix_.outerIndexPtr(), matrix_.innerIndexPtr(), matrix_.valuePtr(),
                                  x.data(), b.data(), numeric_, control, info);
    if (status != UMFPACK_OK) throw SolverError("UMFPACK solve failed, status " + std::to_string(status));
    return x;
  }

  void* symbolic_ = nullptr;
  void* numeric_ = nullptr;
#else
  void release() {}

  void check_pivots() {
    using LU = decltype(lu_);
    const auto& lstore = lu_.matrixL().m_mapL;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    Index lo_col = -1;
    for (Index j = 0; j < csc_.cols(); ++j) {
      for (typename LU::SCMatrix::InnerIterator it(lstore, j); it; ++it) {
        if (it.index() == j) {
          double v = std::abs(it.value());
          if (v < lo) {
            lo = v;
            lo_col = j;
          }
          hi = std::max(hi, v);
          break;
        }
      }
    }
    pivots_ = {lo, hi};
    if (!(lo > kSingularPivotRatio * hi)) fail_singular(lo_col);
  }

  Vector raw_solve(const Vector& b) const {
    Vector x = lu_.solve(b);
    return x;
  }

  Eigen::SparseMatrix<double, Eigen::ColMajor, int> csc_;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>, Eigen::COLAMDOrdering<int>> lu_;
#endif

  SparseMatrix matrix_;
  bool analyzed_ = false;
  Index pattern_rows_ = 0;
  std::vector<int> pattern_outer_, pattern_inner_;
  std::pair<double, double> pivots_{0.0, 0.0};
};

/// One-shot factorize and solve.
inline Vector solve_linear(const SparseSystem& system) {
  if (system.rhs.size() != system.size() || system.matrix.cols() != system.size()) {
    throw ParameterError("solve_linear: dimension mismatch");
  }
  DirectSolver solver;
  solver.factorize(system.matrix);
  return solver.solve(system.rhs);
}

}  // namespace emacfem
