#pragma once

// Block and extended block Arnoldi processes.
//
// After m steps the decomposition holds V_1..V_{m+1} and satisfies
//   A V_m = V_{m+1} Tbar_m = V_m T_m + V_{m+1} T_{m+1,m} E_m^T,
// with T_m = V_m^T A V_m formed by explicit projection. Blocks carry a
// forward part (columns from A * previous block) followed by an inverse part
// (columns from A^{-1} * previous block, extended variant only).

#include <string>
#include <utility>
#include <vector>

#include "dle/dense.hpp"
#include "dle/errors.hpp"
#include "dle/sparse.hpp"

namespace dle {

enum class KrylovVariant { block, extended };

inline const char* to_string(KrylovVariant v) {
  return v == KrylovVariant::block ? "block" : "extended";
}

struct ArnoldiStep {
  Index rank = 0;         ///< width of the newly generated block V_{m+1}
  bool deflated = false;  ///< rank below the nominal width
  bool breakdown = false; ///< rank zero: range(V_m) is invariant
};

class KrylovDecomposition {
 public:
  /// Orthonormalize the start block (and, for the extended variant,
  /// A^{-1} times it) into V_1. The decomposition is at step m = 0.
  static KrylovDecomposition start(const LinearOperator& op, const Matrix& start_block,
                                   KrylovVariant variant, double rank_tol = 1e-12) {
    if (start_block.rows() != op.size()) {
      throw DimensionError("Krylov start block has " + std::to_string(start_block.rows()) +
                           " rows, operator has size " + std::to_string(op.size()));
    }
    if (variant == KrylovVariant::extended && !op.has_inverse()) {
      throw CapabilityError("extended block Arnoldi requires an inverse action");
    }
    KrylovDecomposition kd;
    kd.variant_ = variant;
    kd.rank_tol_ = rank_tol;
    kd.n_ = op.size();
    kd.nominal_width_ = variant == KrylovVariant::block ? start_block.cols()
                                                        : 2 * start_block.cols();
    kd.basis_.resize(kd.n_, 0);
    kd.abasis_.resize(kd.n_, 0);
    Matrix inverse_part;
    if (variant == KrylovVariant::extended) inverse_part = op.apply_inverse(start_block);
    kd.append_block(start_block, inverse_part);
    kd.broken_ = kd.widths_.back() == 0;
    return kd;
  }

  /// Advance from step m to m + 1.
  ArnoldiStep extend(const LinearOperator& op) {
    if (broken_) {
      return ArnoldiStep{0, true, true};
    }
    if (op.size() != n_) throw DimensionError("Krylov extend: operator size changed");
    const Index offset = dim();
    const Index width = widths_.back();
    const Index fwd = forward_cols_.back();
    const Matrix newest = basis_.middleCols(offset, width);
    const Matrix a_newest = op.apply(newest);
    abasis_.conservativeResize(Eigen::NoChange, offset + width);
    abasis_.middleCols(offset, width) = a_newest;
    ++m_;
    projected_valid_ = false;

    Matrix forward_part = a_newest.leftCols(fwd);
    Matrix inverse_part;
    if (variant_ == KrylovVariant::extended && width - fwd > 0) {
      inverse_part = op.apply_inverse(newest.rightCols(width - fwd));
    }
    append_block(forward_part, inverse_part);
    const Index rank = widths_.back();
    broken_ = rank == 0;
    return ArnoldiStep{rank, rank < nominal_width_, broken_};
  }

  KrylovVariant variant() const { return variant_; }
  Index size() const { return n_; }
  Index steps() const { return m_; }
  bool broken_down() const { return broken_; }
  Index nominal_width() const { return nominal_width_; }

  /// Width d_j of block V_j, 1-based j in [1, m+1].
  Index block_width(Index j) const { return widths_.at(static_cast<std::size_t>(j - 1)); }
  Index last_width() const { return m_ == 0 ? 0 : block_width(m_); }
  Index next_width() const { return widths_.back(); }

  /// Number of columns of V_m.
  Index dim() const { return offsets_.at(static_cast<std::size_t>(m_)); }

  /// V_m (n x dim()).
  auto basis() const { return basis_.leftCols(dim()); }
  /// V_{m+1}.
  auto basis_next() const { return basis_.leftCols(dim() + next_width()); }
  /// A V_m, cached from the forward applications.
  auto applied_basis() const { return abasis_.leftCols(dim()); }

  /// Block V_j, 1-based j in [1, m+1].
  auto block(Index j) const {
    return basis_.middleCols(offsets_.at(static_cast<std::size_t>(j - 1)), block_width(j));
  }

  /// Tbar_m = V_{m+1}^T A V_m.
  const Matrix& hessenberg() const {
    refresh();
    return hessenberg_;
  }

  /// T_m = V_m^T A V_m.
  Matrix projected() const { return hessenberg().topRows(dim()); }

  /// T_{m+1,m}, a d_{m+1} x d_m block.
  Matrix coupling() const {
    return hessenberg().bottomRightCorner(next_width(), last_width());
  }

  Matrix project(const Matrix& x) const { return basis().transpose() * x; }
  Matrix lift(const Matrix& y) const { return basis() * y; }

 private:
  KrylovDecomposition() = default;

  // Orthogonalize [forward, inverse] against all stored columns (two block
  // Gram-Schmidt sweeps over the blocks) and append the result as the next
  // block. Each part is rank-tested against its own pre-projection norm.
  void append_block(const Matrix& forward, const Matrix& inverse) {
    const Index stored = basis_.cols();
    auto orthogonalize = [&](Matrix w, const Matrix& extra) {
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < widths_.size(); ++j) {
          const auto vj = basis_.middleCols(offsets_[j], widths_[j]);
          w.noalias() -= vj * (vj.transpose() * w);
        }
        if (extra.cols() > 0) w.noalias() -= extra * (extra.transpose() * w);
      }
      return w;
    };
    ThinQr qf{Matrix(n_, 0), Matrix(0, 0), 0};
    if (forward.cols() > 0) {
      qf = qr_thin(orthogonalize(forward, Matrix(n_, 0)), rank_tol_, forward.norm());
    }
    ThinQr qi{Matrix(n_, 0), Matrix(0, 0), 0};
    if (inverse.cols() > 0) {
      qi = qr_thin(orthogonalize(inverse, qf.q), rank_tol_, inverse.norm());
    }
    const Index width = qf.rank + qi.rank;
    basis_.conservativeResize(Eigen::NoChange, stored + width);
    basis_.middleCols(stored, qf.rank) = qf.q;
    basis_.middleCols(stored + qf.rank, qi.rank) = qi.q;
    if (offsets_.empty()) offsets_.push_back(0);
    offsets_.push_back(stored + width);
    widths_.push_back(width);
    forward_cols_.push_back(qf.rank);
  }

  void refresh() const {
    if (projected_valid_) return;
    hessenberg_ = basis_next().transpose() * applied_basis();
    projected_valid_ = true;
  }

  KrylovVariant variant_ = KrylovVariant::block;
  double rank_tol_ = 1e-12;
  Index n_ = 0;
  Index m_ = 0;
  Index nominal_width_ = 0;
  bool broken_ = false;
  Matrix basis_;   // all m+1 blocks
  Matrix abasis_;  // A times the first m blocks
  std::vector<Index> offsets_;  // offsets_[j] = first column of block j+1
  std::vector<Index> widths_;
  std::vector<Index> forward_cols_;
  mutable Matrix hessenberg_;
  mutable bool projected_valid_ = false;
};

}  // namespace dle
