#pragma once

// X = Z Z^T factors and the eigen-truncation that lifts a projected
// solution through the Krylov basis.

#include <algorithm>
#include <cmath>
#include <limits>

#include "dle/dense.hpp"
#include "dle/errors.hpp"

namespace dle {

struct SymLowRank {
  Matrix z;  ///< n x r

  Index size() const { return z.rows(); }
  Index rank() const { return z.cols(); }
  Matrix dense() const { return z * z.transpose(); }
};

/// Z = V U_l D_l^{1/2} from the eigenvalues of `small` exceeding dtol.
///
/// Negative eigenvalues below -dtol raise PsdViolationError, except those
/// within rounding of zero (64 eps * dim * lambda_max), which are dropped
/// like any other small eigenvalue.
inline SymLowRank truncate_lowrank(const Matrix& basis, const Matrix& small, double dtol = 1e-12) {
  require_square(small, "truncate_lowrank");
  if (basis.cols() != small.rows()) {
    throw DimensionError("truncate_lowrank: basis has " + std::to_string(basis.cols()) +
                         " columns, projected solution has size " +
                         std::to_string(small.rows()));
  }
  if (!(dtol >= 0.0)) throw DomainError("truncate_lowrank: dtol must be nonnegative");
  if (small.rows() == 0) return {Matrix::Zero(basis.rows(), 0)};
  const SymEig eig = sym_eig(symmetrize(small));
  const double top = std::max(eig.values(0), 0.0);
  const double rounding = 64.0 * std::numeric_limits<double>::epsilon() *
                          static_cast<double>(small.rows()) * top;
  const double lowest = eig.values(eig.values.size() - 1);
  if (lowest < -dtol && lowest < -rounding) {
    throw PsdViolationError("truncate_lowrank: eigenvalue " + std::to_string(lowest) +
                            " below -dtol");
  }
  Index keep = 0;
  while (keep < eig.values.size() && eig.values(keep) > dtol) ++keep;
  Matrix z = basis * eig.vectors.leftCols(keep);
  for (Index j = 0; j < keep; ++j) z.col(j) *= std::sqrt(eig.values(j));
  return {std::move(z)};
}

}  // namespace dle
