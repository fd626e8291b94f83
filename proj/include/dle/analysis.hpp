#pragma once

// Dense reference solutions (desk scale) and a-posteriori / a-priori error
// bounds for the projection solvers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dle/dense.hpp"
#include "dle/errors.hpp"
#include "dle/quadrature.hpp"
#include "dle/solvers.hpp"

namespace dle {

inline constexpr Index kIntegralOracleMaxN = 500;
inline constexpr Index kKronOracleMaxN = 60;

/// Dense solution at selected grid nodes.
struct DenseTrajectory {
  std::vector<Index> indices;
  std::vector<double> times;
  std::vector<Matrix> x;
};

namespace detail {

inline std::vector<Index> selected_nodes(const TimeGrid& grid, std::vector<Index> keep) {
  if (keep.empty()) {
    keep.resize(static_cast<std::size_t>(grid.size()));
    for (Index k = 0; k < grid.size(); ++k) keep[static_cast<std::size_t>(k)] = k;
  }
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.front() < 0 || keep.back() > grid.steps()) {
    throw DomainError("selected node index outside the grid");
  }
  return keep;
}

inline Matrix initial_value(Index n, const Matrix& x0) {
  if (x0.size() == 0) return Matrix::Zero(n, n);
  if (x0.rows() != n || x0.cols() != n) throw DimensionError("X0 has wrong dimension");
  return symmetrize(x0);
}

}  // namespace detail

/// X(t) = e^{(t-t0)A} X0 e^{(t-t0)A^T} + int_{t0}^t e^{(t-tau)A} B B^T e^{(t-tau)A^T} dtau
/// with q-point composite Gauss-Legendre on the grid panels.
inline DenseTrajectory dense_reference_integral(const Matrix& a, const Matrix& b,
                                                const Matrix& x0, const TimeGrid& grid,
                                                int q = 8, std::vector<Index> keep = {},
                                                double max_stiffness = 0.25) {
  require_square(a, "dense_reference_integral");
  const Index n = a.rows();
  if (n > kIntegralOracleMaxN) {
    throw SizeGuardError("dense_reference_integral: n = " + std::to_string(n) +
                         " exceeds the oracle limit " + std::to_string(kIntegralOracleMaxN));
  }
  if (b.rows() != n) throw DimensionError("dense_reference_integral: B has wrong row count");
  const std::vector<Index> nodes = detail::selected_nodes(grid, std::move(keep));
  DenseTrajectory out;
  Matrix x = detail::initial_value(n, x0);
  std::size_t next = 0;
  auto visit = [&](Index k) {
    if (next < nodes.size() && nodes[next] == k) {
      out.indices.push_back(k);
      out.times.push_back(grid.at(k));
      out.x.push_back(x);
      ++next;
    }
  };
  visit(0);
  if (grid.steps() > 0) {
    const GramPropagator prop(a, b, grid.step(), q, max_stiffness);
    for (Index k = 1; k <= grid.steps() && next < nodes.size(); ++k) {
      x = prop.advance(x);
      visit(k);
    }
  }
  return out;
}

/// Vectorized ODE x' = (I (x) A + A (x) I) x + vec(B B^T) integrated with
/// fixed-step BDF-p. Starting values come from a Taylor expansion of the
/// exact flow on sub-steps.
inline DenseTrajectory dense_reference_kron_ode(const Matrix& a, const Matrix& b,
                                                const Matrix& x0, const TimeGrid& grid,
                                                int p = 3, std::vector<Index> keep = {}) {
  require_square(a, "dense_reference_kron_ode");
  const Index n = a.rows();
  if (n > kKronOracleMaxN) {
    throw SizeGuardError("dense_reference_kron_ode: n = " + std::to_string(n) +
                         " exceeds the oracle limit " + std::to_string(kKronOracleMaxN));
  }
  if (b.rows() != n) throw DimensionError("dense_reference_kron_ode: B has wrong row count");
  const BdfCoefficients co = bdf_coefficients(p);
  const std::vector<Index> nodes = detail::selected_nodes(grid, std::move(keep));
  const double h = grid.step();
  const Matrix bb = b * b.transpose();

  // Exact-flow step by Taylor series of Y' = A Y + Y A^T + BB^T.
  const double anorm = a.cwiseAbs().colwise().sum().maxCoeff();
  const auto substeps = static_cast<Index>(std::max(1.0, std::ceil(4.0 * anorm * h)));
  const double dt = h / static_cast<double>(substeps);
  auto taylor_step = [&](const Matrix& y0) {
    Matrix y = y0;
    for (Index s = 0; s < substeps; ++s) {
      Matrix term = a * y + y * a.transpose() + bb;  // first derivative
      Matrix acc = y + dt * term;
      double coef = dt;
      for (int k = 2; k <= 80; ++k) {
        term = a * term + term * a.transpose();
        coef *= dt / k;
        const Matrix inc = coef * term;
        acc += inc;
        if (inc.norm() <= 1e-18 * acc.norm()) break;
      }
      y = acc;
    }
    return symmetrize(y);
  };

  const Index nn = n * n;
  Matrix kron = Matrix::Zero(nn, nn);
  const Matrix id = Matrix::Identity(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      // (I (x) A) block (i, j) = delta_ij A ; (A (x) I) block (i, j) = a_ij I
      auto blk = kron.block(i * n, j * n, n, n);
      if (i == j) blk += a;
      blk += a(i, j) * id;
    }
  }
  const double hb = h * co.beta;
  const Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(nn, nn) - hb * kron);
  const Vector bvec = Eigen::Map<const Vector>(bb.data(), nn);

  DenseTrajectory out;
  std::size_t next = 0;
  std::vector<Matrix> hist{detail::initial_value(n, x0)};  // most recent first
  auto visit = [&](Index k) {
    if (next < nodes.size() && nodes[next] == k) {
      out.indices.push_back(k);
      out.times.push_back(grid.at(k));
      out.x.push_back(hist.front());
      ++next;
    }
  };
  visit(0);
  for (Index k = 1; k <= grid.steps() && next < nodes.size(); ++k) {
    Matrix y;
    if (static_cast<int>(hist.size()) < co.p) {
      y = taylor_step(hist.front());
    } else {
      Vector rhs = hb * bvec;
      for (int i = 0; i < co.p; ++i) {
        const Matrix& yi = hist[static_cast<std::size_t>(i)];
        rhs += co.alpha[static_cast<std::size_t>(i)] * Eigen::Map<const Vector>(yi.data(), nn);
      }
      const Vector sol = lu.solve(rhs);
      y = symmetrize(Eigen::Map<const Matrix>(sol.data(), n, n));
    }
    hist.insert(hist.begin(), std::move(y));
    if (static_cast<int>(hist.size()) > co.p) hist.pop_back();
    visit(k);
  }
  return out;
}

/// Dense residual X_m' - A X_m - X_m A^T - B B^T of X_m = V G V^T, with
/// X_m' = V (T G + G T^T + B_m B_m^T) V^T taken from the projected equation.
inline Matrix dense_residual(const Matrix& a, const Matrix& b, const Matrix& v,
                             const Matrix& t, const Matrix& bm, const Matrix& g) {
  const Matrix x = v * g * v.transpose();
  const Matrix gdot = t * g + g * t.transpose() + bm * bm.transpose();
  const Matrix xdot = v * gdot * v.transpose();
  return xdot - a * x - x * a.transpose() - b * b.transpose();
}

/// ||T_{m+1,m}|| ||Gbar||_inf (e^{2(t-t0)mu} - 1) / (2 mu) for mu < 0.
inline double error_bound_stable(double mu2, double coupling_norm, double gbar_sup, double t0,
                                 double t) {
  if (!(mu2 < 0.0)) {
    throw PreconditionError("error_bound_stable: requires mu2(A) < 0, got " +
                            std::to_string(mu2));
  }
  if (t < t0) throw DomainError("error_bound_stable: t < t0");
  return coupling_norm * gbar_sup * std::expm1(2.0 * (t - t0) * mu2) / (2.0 * mu2);
}

/// 2 ||B|| rho^m e^rho / m!.
inline double expm_action_bound(double rho, double b_norm, Index m) {
  if (m < 1) throw DomainError("expm_action_bound: m must be positive");
  if (rho == 0.0) return 0.0;
  const double md = static_cast<double>(m);
  return 2.0 * b_norm * std::exp(md * std::log(rho) + rho - std::lgamma(md + 1.0));
}

struct BoundReport {
  std::vector<double> times;
  std::vector<double> bound_stable;   ///< NaN where mu2 >= 0
  std::vector<double> bound_general;  ///< integral bound with the true exponential action
  std::vector<double> bound_apriori;  ///< integral bound with the factorial estimate
  std::vector<double> measured;       ///< filled by the caller, if a reference is available
  double mu2 = 0.0;
  double rho = 0.0;
  double coupling_norm = 0.0;
  std::vector<double> gbar_sup;  ///< running max over nodes of ||Gbar(tau)||
};

/// Bounds at every grid node for a computed trajectory of the dense matrix
/// A. Norms are spectral norms. The integrals use q-point composite
/// Gauss-Legendre on the grid panels.
inline BoundReport error_bounds(const Matrix& a, const Matrix& b, const Trajectory& traj,
                                const TimeGrid& grid, int q = 8) {
  require_square(a, "error_bounds");
  const Index n = a.rows();
  if (n > kIntegralOracleMaxN) {
    throw SizeGuardError("error_bounds: n = " + std::to_string(n) + " exceeds the oracle limit");
  }
  if (traj.times.size() != static_cast<std::size_t>(grid.size())) {
    throw DimensionError("error_bounds: trajectory does not match the grid");
  }
  BoundReport rep;
  rep.times = traj.times;
  rep.mu2 = log_norm_mu2(a);
  rep.rho = spec_norm_2(a);
  rep.coupling_norm = spec_norm_2(traj.coupling);
  const Index d = traj.coupling.cols();

  double sup = 0.0;
  for (const Matrix& g : traj.small) {
    if (d > 0 && g.size() > 0) sup = std::max(sup, spec_norm_2(g.bottomRows(d)));
    rep.gbar_sup.push_back(sup);
  }
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    rep.bound_stable.push_back(
        rep.mu2 < 0.0 ? error_bound_stable(rep.mu2, rep.coupling_norm, rep.gbar_sup[k],
                                           grid.t0(), rep.times[k])
                      : std::numeric_limits<double>::quiet_NaN());
  }

  // Integrals over sigma = t - tau in [0, t - t0], accumulated panel by panel.
  const double b_norm = spec_norm_2(b);
  const double bm_norm = spec_norm_2(traj.projected_b);
  const Matrix v = traj.basis_matrix();
  const GaussRule rule = gauss_legendre(q);
  const double h = grid.step();
  const Index m = std::max<Index>(traj.m, 1);
  std::vector<Matrix> za;  // e^{(j + xi_i) h A} B
  std::vector<Matrix> zt;  // e^{(j + xi_i) h T} B_m
  Matrix step_a;
  Matrix step_t;
  if (grid.steps() > 0) {
    step_a = expm(h * a);
    step_t = v.cols() > 0 ? expm(h * traj.projected) : Matrix(0, 0);
    for (double xi : rule.nodes) {
      za.push_back(expm_action_small(a, b, xi * h));
      zt.push_back(v.cols() > 0 ? expm_action_small(traj.projected, traj.projected_b, xi * h)
                                : Matrix(0, b.cols()));
    }
  }
  double acc_general = 0.0;
  double acc_apriori = 0.0;
  const double logc = std::log(2.0 * b_norm) + static_cast<double>(m) * std::log(rep.rho) -
                      std::lgamma(static_cast<double>(m) + 1.0);
  rep.bound_general.push_back(0.0);
  rep.bound_apriori.push_back(0.0);
  for (Index j = 0; j < grid.steps(); ++j) {
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double sigma = (static_cast<double>(j) + rule.nodes[i]) * h;
      const double w = rule.weights[i] * h;
      const Matrix diff = v.cols() > 0 ? Matrix(za[i] - v * zt[i]) : za[i];
      acc_general += w * std::exp(sigma * rep.mu2) * spec_norm_2(diff);
      if (sigma > 0.0 && b_norm > 0.0 && rep.rho > 0.0) {
        acc_apriori += w * std::exp(logc + sigma * (rep.mu2 + rep.rho) +
                                    static_cast<double>(m) * std::log(sigma));
      }
      za[i] = step_a * za[i];
      if (v.cols() > 0) zt[i] = step_t * zt[i];
    }
    rep.bound_general.push_back((b_norm + bm_norm) * acc_general);
    rep.bound_apriori.push_back((b_norm + bm_norm) * acc_apriori);
  }
  return rep;
}

}  // namespace dle
