#pragma once

// Dense kernels for small projected matrices and desk-scale references.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "dle/errors.hpp"

namespace dle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw DomainError(std::string(what) + ": non-finite entry");
}

/// (M + M^T) / 2
inline Matrix symmetrize(const Matrix& m) {
  require_square(m, "symmetrize");
  return 0.5 * (m + m.transpose());
}

inline double frob_norm(const Matrix& m) { return m.norm(); }

/// Largest singular value.
inline double spec_norm_2(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

// ---------------------------------------------------------------------------
// Thin QR with rank detection

struct ThinQr {
  Matrix q;  ///< n x rank, orthonormal columns
  Matrix r;  ///< rank x k, q * r reproduces the block
  Index rank = 0;
};

/// Gram-Schmidt QR of a tall block, each column orthogonalized twice.
///
/// A column is dropped when its orthogonal remainder is not larger than
/// `rank_tol * reference_norm`. `reference_norm` defaults to the Frobenius
/// norm of `block`; callers that pass an already-projected remainder should
/// supply the norm of the block before projection, otherwise rounding noise
/// would be promoted to new directions.
inline ThinQr qr_thin(const Matrix& block, double rank_tol = 1e-12,
                      double reference_norm = -1.0) {
  const Index n = block.rows();
  const Index k = block.cols();
  if (n < k) {
    throw DimensionError("qr_thin: block has fewer rows than columns (" +
                         std::to_string(n) + " < " + std::to_string(k) + ")");
  }
  const double ref = reference_norm >= 0.0 ? reference_norm : block.norm();
  const double threshold = rank_tol * ref;

  Matrix q(n, k);
  Matrix r = Matrix::Zero(k, k);
  Index rank = 0;
  for (Index j = 0; j < k; ++j) {
    Vector v = block.col(j);
    Vector coeff = Vector::Zero(rank);
    for (int pass = 0; pass < 2; ++pass) {
      if (rank == 0) break;
      const Vector c = q.leftCols(rank).transpose() * v;
      v.noalias() -= q.leftCols(rank) * c;
      coeff += c;
    }
    const double nrm = v.norm();
    r.col(j).head(rank) = coeff;
    if (nrm > threshold && nrm > 0.0) {
      q.col(rank) = v / nrm;
      r(rank, j) = nrm;
      ++rank;
    }
  }
  return ThinQr{q.leftCols(rank), r.topRows(rank), rank};
}

// ---------------------------------------------------------------------------
// Matrix exponential

/// e^M by scaling and squaring around the degree-13 diagonal Pade approximant.
inline Matrix expm(const Matrix& m) {
  require_square(m, "expm");
  require_finite(m, "expm");
  const Index n = m.rows();
  if (n == 0) return m;

  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  }
  const Matrix a = m / std::ldexp(1.0, squarings);
  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;

  const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
                         b[5] * a4 + b[3] * a2 + b[1] * id;
  const Matrix u = a * u_inner;
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                   b[4] * a4 + b[2] * a2 + b[0] * id;
  Matrix result = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition

struct SymEig {
  Vector values;   ///< sorted decreasing
  Matrix vectors;  ///< orthonormal columns, matching `values`
};

/// Eigendecomposition of the symmetric part of `m`.
inline SymEig sym_eig(const Matrix& m) {
  require_square(m, "sym_eig");
  const Index n = m.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  if (es.info() != Eigen::Success) {
    throw IterationLimitError("sym_eig: symmetric eigensolver did not converge");
  }
  SymEig out{Vector(n), Matrix(n, n)};
  for (Index i = 0; i < n; ++i) {
    out.values(i) = es.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return out;
}

/// 2-logarithmic norm: largest eigenvalue of (A + A^T)/2.
inline double log_norm_mu2(const Matrix& a) {
  require_square(a, "log_norm_mu2");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw IterationLimitError("log_norm_mu2: symmetric eigensolver did not converge");
  }
  return es.eigenvalues().maxCoeff();
}

// ---------------------------------------------------------------------------
// Lyapunov equations F X + X F^T + Q = 0

namespace detail {

struct DiagBlock {
  Index start;
  Index size;  // 1 or 2
};

inline std::vector<DiagBlock> quasi_triangular_blocks(const Matrix& s) {
  std::vector<DiagBlock> blocks;
  const Index n = s.rows();
  for (Index i = 0; i < n;) {
    if (i + 1 < n && s(i + 1, i) != 0.0) {
      blocks.push_back({i, 2});
      i += 2;
    } else {
      blocks.push_back({i, 1});
      i += 1;
    }
  }
  return blocks;
}

using Small = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

// Solves S_ii Y + Y M^T = rhs for a (ki x kj) block Y with ki, kj <= 2.
inline void solve_small_sylvester(const Small& sii, const Small& mjj, Small& rhs,
                                  double singular_tol) {
  const Index ki = sii.rows();
  const Index kj = mjj.rows();
  if (ki == 1 && kj == 1) {
    const double denom = sii(0, 0) + mjj(0, 0);
    if (std::abs(denom) <= singular_tol) {
      throw SolvabilityError("lyap_direct: eigenvalues of F and -F^T coincide");
    }
    rhs(0, 0) /= denom;
    return;
  }
  const Index dim = ki * kj;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4> k(dim, dim);
  k.setZero();
  // vec(S Y) = (I (x) S) vec Y, vec(Y M^T) = (M (x) I) vec Y, column-major.
  for (Index c = 0; c < kj; ++c) {
    k.block(c * ki, c * ki, ki, ki) += sii;
    for (Index c2 = 0; c2 < kj; ++c2) {
      for (Index r = 0; r < ki; ++r) k(c * ki + r, c2 * ki + r) += mjj(c, c2);
    }
  }
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1> rv(dim);
  for (Index c = 0; c < kj; ++c) {
    for (Index r = 0; r < ki; ++r) rv(c * ki + r) = rhs(r, c);
  }
  Eigen::FullPivLU<decltype(k)> lu(k);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (min_pivot <= singular_tol) {
    throw SolvabilityError("lyap_direct: eigenvalues of F and -F^T coincide");
  }
  const auto sol = lu.solve(rv).eval();
  for (Index c = 0; c < kj; ++c) {
    for (Index r = 0; r < ki; ++r) rhs(r, c) = sol(c * ki + r);
  }
}

}  // namespace detail

/// Real-Schur based solver for F X + X F^T + Q = 0.
///
/// The Schur factorization of F is computed once; `solve` may be called for
/// any number of right-hand sides and for any affine variant
/// `scale * F + shift * I` of the coefficient, which shares the Schur
/// vectors. All solves are pure and may run concurrently.
class LyapunovSolver {
 public:
  explicit LyapunovSolver(const Matrix& f) {
    require_square(f, "lyap_direct");
    require_finite(f, "lyap_direct");
    Eigen::RealSchur<Matrix> schur(f);
    if (schur.info() != Eigen::Success) {
      throw IterationLimitError("lyap_direct: real Schur iteration did not converge");
    }
    u_ = schur.matrixU();
    s_ = schur.matrixT();
    // Clean the strictly lower part below the quasi-triangular structure.
    for (Index j = 0; j < s_.cols(); ++j) {
      for (Index i = j + 2; i < s_.rows(); ++i) s_(i, j) = 0.0;
    }
    blocks_ = detail::quasi_triangular_blocks(s_);
  }

  Index size() const { return s_.rows(); }
  const Matrix& schur_vectors() const { return u_; }
  const Matrix& schur_form() const { return s_; }

  /// Solve with coefficient (scale*F + shift*I) for X; Q is symmetrized.
  Matrix solve(const Matrix& q, double scale = 1.0, double shift = 0.0) const {
    check_rhs(q);
    const Matrix qt = u_.transpose() * symmetrize(q) * u_;
    return from_schur(solve_schur(qt, scale, shift));
  }

  /// Same as `solve` but with right-hand side and result in Schur
  /// coordinates (X~ = U^T X U).
  Matrix solve_schur(const Matrix& q_schur, double scale = 1.0,
                     double shift = 0.0) const {
    check_rhs(q_schur);
    const Index n = s_.rows();
    const Matrix s = scale * s_ + shift * Matrix::Identity(n, n);
    const double singular_tol =
        64.0 * std::numeric_limits<double>::epsilon() *
        std::max(s.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    // S Y + Y S^T = C with C = -Q.
    Matrix y = -q_schur;
    for (auto jb = blocks_.rbegin(); jb != blocks_.rend(); ++jb) {
      const Index j = jb->start;
      const Index kj = jb->size;
      const Index col_tail = n - (j + kj);
      auto yb = y.middleCols(j, kj);
      if (col_tail > 0) {
        yb.noalias() -= y.rightCols(col_tail) * s.block(j, j + kj, kj, col_tail).transpose();
      }
      const detail::Small mjj = s.block(j, j, kj, kj);
      for (auto ib = blocks_.rbegin(); ib != blocks_.rend(); ++ib) {
        const Index i = ib->start;
        const Index ki = ib->size;
        const Index row_tail = n - (i + ki);
        auto rhs = yb.middleRows(i, ki);
        if (row_tail > 0) {
          rhs.noalias() -= s.block(i, i + ki, ki, row_tail) * yb.bottomRows(row_tail);
        }
        detail::Small tmp = rhs;
        const detail::Small sii = s.block(i, i, ki, ki);
        detail::solve_small_sylvester(sii, mjj, tmp, singular_tol);
        rhs = tmp;
      }
    }
    return 0.5 * (y + y.transpose());
  }

  Matrix from_schur(const Matrix& x_schur) const {
    const Matrix x = u_ * x_schur * u_.transpose();
    return 0.5 * (x + x.transpose());
  }

  Matrix to_schur(const Matrix& x) const { return u_.transpose() * x * u_; }

 private:
  void check_rhs(const Matrix& q) const {
    if (q.rows() != s_.rows() || q.cols() != s_.cols()) {
      throw DimensionError("lyap_direct: right-hand side has wrong dimension");
    }
  }

  Matrix u_;
  Matrix s_;
  std::vector<detail::DiagBlock> blocks_;
};

/// Symmetric X with F X + X F^T + Q = 0 (Bartels-Stewart on the real Schur form).
inline Matrix lyap_direct(const Matrix& f, const Matrix& q) {
  require_square(q, "lyap_direct");
  return LyapunovSolver(f).solve(q);
}

}  // namespace dle
