#pragma once

// Sparse storage, factored inverse actions and the LinearOperator that the
// Arnoldi processes consume.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <regex>
#include <string>
#include <utility>
#include <vector>

#include "dle/dense.hpp"
#include "dle/errors.hpp"

namespace dle {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

inline Matrix sparse_apply(const SparseMatrix& a, const Matrix& v) {
  if (a.cols() != v.rows()) {
    throw DimensionError("sparse_apply: operand has " + std::to_string(v.rows()) +
                         " rows, expected " + std::to_string(a.cols()));
  }
  return a * v;
}

/// One-time sparse LU factorization (partial threshold pivoting).
///
/// Immutable after construction; copies share the factors.
class Factorization {
 public:
  explicit Factorization(const SparseMatrix& a) {
    if (a.rows() != a.cols()) {
      throw DimensionError("sparse_factor: matrix is not square");
    }
    n_ = a.rows();
    check_structure(a);
    auto lu = std::make_shared<Solver>();
    const Eigen::SparseMatrix<double> col_major = a;
    lu->analyzePattern(col_major);
    lu->factorize(col_major);
    if (lu->info() != Eigen::Success) {
      const std::string msg = lu->lastErrorMessage();
      throw FactorizationError("sparse_factor: " + msg, trailing_index(msg));
    }
    lu_ = std::move(lu);
  }

  Index size() const { return n_; }

  Matrix solve(const Matrix& rhs) const {
    if (rhs.rows() != n_) {
      throw DimensionError("Factorization::solve: right-hand side has " +
                           std::to_string(rhs.rows()) + " rows, expected " +
                           std::to_string(n_));
    }
    Matrix x = lu_->solve(rhs);
    return x;
  }

 private:
  using Solver = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;

  static void check_structure(const SparseMatrix& a) {
    std::vector<char> col_seen(static_cast<std::size_t>(a.cols()), 0);
    for (Index r = 0; r < a.outerSize(); ++r) {
      bool row_nonzero = false;
      for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
        if (it.value() != 0.0) {
          row_nonzero = true;
          col_seen[static_cast<std::size_t>(it.col())] = 1;
        }
      }
      if (!row_nonzero) {
        throw FactorizationError(
            "sparse_factor: structurally singular, zero row " + std::to_string(r), r);
      }
    }
    for (std::size_t c = 0; c < col_seen.size(); ++c) {
      if (!col_seen[c]) {
        throw FactorizationError(
            "sparse_factor: structurally singular, zero column " + std::to_string(c),
            static_cast<std::ptrdiff_t>(c));
      }
    }
  }

  static std::ptrdiff_t trailing_index(const std::string& msg) {
    std::smatch m;
    static const std::regex re("(\\d+)\\s*$");
    if (std::regex_search(msg, m, re)) return std::stoll(m[1].str());
    return -1;
  }

  Index n_ = 0;
  std::shared_ptr<const Solver> lu_;
};

inline Factorization sparse_factor(const SparseMatrix& a) { return Factorization(a); }

/// Square operator acting on n x k blocks, optionally with its inverse.
class LinearOperator {
 public:
  using Action = std::function<Matrix(const Matrix&)>;

  LinearOperator(Index n, Action forward, Action inverse = {})
      : n_(n), forward_(std::move(forward)), inverse_(std::move(inverse)) {}

  Index size() const { return n_; }
  bool has_inverse() const { return static_cast<bool>(inverse_); }

  Matrix apply(const Matrix& v) const {
    check(v, "apply");
    return forward_(v);
  }

  Matrix apply_inverse(const Matrix& v) const {
    if (!inverse_) throw CapabilityError("LinearOperator: no inverse action available");
    check(v, "apply_inverse");
    return inverse_(v);
  }

 private:
  void check(const Matrix& v, const char* what) const {
    if (v.rows() != n_) {
      throw DimensionError(std::string("LinearOperator::") + what + ": block has " +
                           std::to_string(v.rows()) + " rows, expected " +
                           std::to_string(n_));
    }
  }

  Index n_;
  Action forward_;
  Action inverse_;
};

/// Forward action A*V; with `with_inverse` the matrix is factored once and
/// A^{-1}V is available too.
inline LinearOperator operator_from_sparse(SparseMatrix a, bool with_inverse = true) {
  if (a.rows() != a.cols()) throw DimensionError("operator_from_sparse: not square");
  const Index n = a.rows();
  auto shared = std::make_shared<const SparseMatrix>(std::move(a));
  LinearOperator::Action fwd = [shared](const Matrix& v) -> Matrix { return *shared * v; };
  if (!with_inverse) return LinearOperator(n, std::move(fwd));
  Factorization lu(*shared);
  LinearOperator::Action inv = [lu](const Matrix& v) { return lu.solve(v); };
  return LinearOperator(n, std::move(fwd), std::move(inv));
}

inline LinearOperator operator_from_dense(Matrix a, bool with_inverse = true) {
  require_square(a, "operator_from_dense");
  const Index n = a.rows();
  auto shared = std::make_shared<const Matrix>(std::move(a));
  LinearOperator::Action fwd = [shared](const Matrix& v) -> Matrix { return *shared * v; };
  if (!with_inverse) return LinearOperator(n, std::move(fwd));
  auto lu = std::make_shared<const Eigen::PartialPivLU<Matrix>>(*shared);
  LinearOperator::Action inv = [lu](const Matrix& v) -> Matrix { return lu->solve(v); };
  return LinearOperator(n, std::move(fwd), std::move(inv));
}

/// A = lhs^{-1} * rhs with inverse rhs^{-1} * lhs, both matrices factored once.
inline LinearOperator operator_from_pair(const Factorization& lhs_factor,
                                         const SparseMatrix& lhs, const SparseMatrix& rhs) {
  if (lhs_factor.size() != rhs.rows() || lhs.rows() != rhs.rows() ||
      rhs.rows() != rhs.cols() || lhs.rows() != lhs.cols()) {
    throw DimensionError("operator_from_pair: incompatible dimensions");
  }
  const Index n = rhs.rows();
  auto l = std::make_shared<const SparseMatrix>(lhs);
  auto r = std::make_shared<const SparseMatrix>(rhs);
  Factorization rhs_factor(rhs);
  LinearOperator::Action fwd = [lhs_factor, r](const Matrix& v) {
    return lhs_factor.solve(*r * v);
  };
  LinearOperator::Action inv = [rhs_factor, l](const Matrix& v) {
    return rhs_factor.solve(*l * v);
  };
  return LinearOperator(n, std::move(fwd), std::move(inv));
}

inline Matrix to_dense(const SparseMatrix& a) { return Matrix(a); }

/// Assemble the operator column by column (desk-scale use only).
inline Matrix to_dense(const LinearOperator& op) {
  return op.apply(Matrix::Identity(op.size(), op.size()));
}

/// 2-logarithmic norm of a sparse matrix. Small matrices use a dense
/// symmetric eigensolve; larger ones run Lanczos with full
/// reorthogonalization on (A + A^T)/2.
inline double log_norm_mu2(const SparseMatrix& a, Index dense_limit = 1500,
                           Index max_iter = 800, double rel_tol = 1e-10) {
  if (a.rows() != a.cols()) throw DimensionError("log_norm_mu2: not square");
  const Index n = a.rows();
  if (n <= dense_limit) return log_norm_mu2(to_dense(a));

  const SparseMatrix at = a.transpose();
  const SparseMatrix sym = 0.5 * (a + at);
  const Index kmax = std::min(n, max_iter);
  Matrix q(n, kmax + 1);
  Vector alpha(kmax);
  Vector beta(kmax);
  Vector v = Vector::LinSpaced(n, 1.0, 2.0);
  q.col(0) = v.normalized();
  for (Index k = 0; k < kmax; ++k) {
    Vector w = sym * q.col(k);
    alpha(k) = q.col(k).dot(w);
    for (int pass = 0; pass < 2; ++pass) {
      w.noalias() -= q.leftCols(k + 1) * (q.leftCols(k + 1).transpose() * w);
    }
    beta(k) = w.norm();
    const bool last = (k + 1 == kmax) || beta(k) == 0.0;
    if ((k + 1) % 10 == 0 || last) {
      Eigen::SelfAdjointEigenSolver<Matrix> tri;
      tri.computeFromTridiagonal(alpha.head(k + 1), beta.head(k), Eigen::ComputeEigenvectors);
      const Index top = k;  // eigenvalues ascending
      const double theta = tri.eigenvalues()(top);
      const double resid = std::abs(beta(k) * tri.eigenvectors()(k, top));
      if (resid <= rel_tol * std::max(std::abs(theta), 1.0) || beta(k) == 0.0) {
        return theta;
      }
      if (last) break;
    }
    q.col(k + 1) = w / beta(k);
  }
  throw IterationLimitError("log_norm_mu2: Lanczos did not converge in " +
                            std::to_string(kmax) + " iterations");
}

}  // namespace dle
