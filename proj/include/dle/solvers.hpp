#pragma once

// Projection solvers for X' = A X + X A^T + B B^T, X(t0) = Z0 Z0^T.
//
// Both methods project onto the (extended) block Krylov space of [B, Z0]
// and solve the small problem
//   G' = T G + G T^T + B_m B_m^T,  G(t0) = V^T Z0 Z0^T V,
// either through the exponential integral (eba_exp) or with fixed-step BDF
// (eba_bdf). The residual of X_m = V G V^T is measured by
// ||T_{m+1,m} Gbar||_F with Gbar the last block row of G.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dle/bdf.hpp"
#include "dle/dense.hpp"
#include "dle/errors.hpp"
#include "dle/krylov.hpp"
#include "dle/lowrank.hpp"
#include "dle/quadrature.hpp"
#include "dle/sparse.hpp"

namespace dle {

/// Uniform grid t0 = t_0 < ... < t_N = tf; the step is h, shrunk slightly if
/// (tf - t0)/h is not an integer.
class TimeGrid {
 public:
  TimeGrid(double t0, double tf, double h) : t0_(t0), tf_(tf) {
    if (!std::isfinite(t0) || !std::isfinite(tf) || tf < t0) {
      throw DomainError("time grid needs finite t0 <= tf");
    }
    if (!(h > 0.0)) throw DomainError("time grid step must be positive");
    steps_ = tf == t0 ? 0 : static_cast<Index>(std::ceil((tf - t0) / h - 1e-9));
    step_ = steps_ == 0 ? h : (tf - t0) / static_cast<double>(steps_);
  }

  double t0() const { return t0_; }
  double tf() const { return tf_; }
  double step() const { return step_; }
  Index steps() const { return steps_; }
  Index size() const { return steps_ + 1; }
  double at(Index k) const {
    return k == steps_ ? tf_ : t0_ + static_cast<double>(k) * step_;
  }
  std::vector<double> nodes() const {
    std::vector<double> out(static_cast<std::size_t>(size()));
    for (Index k = 0; k <= steps_; ++k) out[static_cast<std::size_t>(k)] = at(k);
    return out;
  }
  /// Every `stride`-th node plus both endpoints.
  std::vector<Index> probe_indices(Index stride) const {
    stride = std::max<Index>(stride, 1);
    std::vector<Index> out;
    for (Index k = 0; k < steps_; k += stride) out.push_back(k);
    out.push_back(steps_);
    return out;
  }

 private:
  double t0_;
  double tf_;
  double step_ = 0.0;
  Index steps_ = 0;
};

enum class Method { eba_exp, eba_bdf };

inline const char* to_string(Method m) { return m == Method::eba_exp ? "eba-exp" : "eba-bdf"; }

inline Method parse_method(const std::string& s) {
  if (s == "eba-exp" || s == "eba_exp") return Method::eba_exp;
  if (s == "eba-bdf" || s == "eba_bdf") return Method::eba_bdf;
  throw DomainError("unknown method '" + s + "' (expected eba-exp or eba-bdf)");
}

struct IterationRecord {
  Index m = 0;
  Index dim = 0;
  double max_residual = 0.0;    ///< over the nodes checked in this iteration
  double final_residual = 0.0;  ///< at tf
  bool full_grid = false;       ///< all nodes checked (otherwise probe subset)
  bool deflated = false;
};

struct SolverConfig {
  Method method = Method::eba_exp;
  KrylovVariant krylov = KrylovVariant::extended;
  Index m_max = 50;
  double tol = 1e-10;
  int bdf_order = 2;
  BdfStart bdf_start = BdfStart::exact_flow;
  int quadrature_order = 4;
  double max_panel_stiffness = 0.25;  ///< panel width * ||T||_1 bound; <= 0: one panel per step
  double dtol = 1e-12;
  Index probe_stride = 10;
  double rank_tol = 1e-12;
  std::function<void(const IterationRecord&)> observer;

  void validate() const {
    if (!(tol > 0.0)) throw DomainError("config: tol must be positive");
    if (m_max < 1) throw DomainError("config: m_max must be at least 1");
    if (bdf_order < 1 || bdf_order > 3) throw DomainError("config: bdf_order must be 1, 2 or 3");
    if (quadrature_order < 1) throw DomainError("config: quadrature_order must be positive");
    if (!(dtol >= 0.0)) throw DomainError("config: dtol must be nonnegative");
    if (!(rank_tol > 0.0)) throw DomainError("config: rank_tol must be positive");
  }
};

/// ||T_{m+1,m} times the last d_m rows of `small`||_F.
inline double residual_norm(const Matrix& coupling, const Matrix& small) {
  if (coupling.size() == 0 || small.size() == 0) return 0.0;
  if (coupling.cols() > small.rows()) {
    throw DimensionError("residual_norm: coupling block wider than projected solution");
  }
  return (coupling * small.bottomRows(coupling.cols())).norm();
}

struct Trajectory {
  Method method = Method::eba_exp;
  Index n = 0;
  std::vector<double> times;
  std::vector<Matrix> small;  ///< G_m(t_k) or Y_m(t_k)
  std::vector<double> residuals;
  std::optional<KrylovDecomposition> basis;
  Matrix projected;    ///< T_m
  Matrix projected_b;  ///< B_m = V^T B
  Matrix coupling;     ///< T_{m+1,m}
  std::vector<IterationRecord> iterations;
  Index m = 0;
  bool converged = false;
  bool breakdown = false;

  Index dim() const { return basis ? basis->dim() : 0; }
  double max_residual() const {
    return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
  }
  /// V_m (n x dim).
  Matrix basis_matrix() const { return basis ? Matrix(basis->basis()) : Matrix(n, 0); }
  /// X_m(t_k) = V G V^T, assembled densely.
  Matrix dense(std::size_t k) const {
    if (dim() == 0) return Matrix::Zero(n, n);
    const Matrix v = basis_matrix();
    return symmetrize(v * small.at(k) * v.transpose());
  }
  SymLowRank factor(std::size_t k, double dtol = 1e-12) const {
    return truncate_lowrank(basis_matrix(), small.at(k), dtol);
  }
};

namespace detail {

struct ProjectedProblem {
  Matrix t;
  Matrix b;
  Matrix g0;
  Matrix coupling;
};

struct Pass {
  std::vector<Index> nodes;
  std::vector<double> residuals;
  std::vector<Matrix> small;  // only for full passes
};

// One integration of the projected problem. `full` visits and stores every
// grid node, otherwise only the probe subset.
using Integrator =
    std::function<Pass(const ProjectedProblem&, const TimeGrid&, const SolverConfig&, bool full)>;

inline Pass integrate_exp(const ProjectedProblem& pp, const TimeGrid& grid,
                          const SolverConfig& cfg, bool full) {
  Pass pass;
  const Index steps = grid.steps();
  Matrix g = pp.g0;
  auto visit = [&](Index k) {
    pass.nodes.push_back(k);
    pass.residuals.push_back(residual_norm(pp.coupling, g));
    if (full) pass.small.push_back(g);
  };
  visit(0);
  if (steps == 0) return pass;
  const GramPropagator prop(pp.t, pp.b, grid.step(), cfg.quadrature_order,
                              cfg.max_panel_stiffness);
  if (full || cfg.probe_stride <= 1) {
    for (Index k = 1; k <= steps; ++k) {
      g = prop.advance(g);
      visit(k);
    }
    return pass;
  }
  const Index stride = cfg.probe_stride;
  const auto [es, ps] = prop.jump(stride);
  Index k = 0;
  while (k + stride <= steps) {
    g = GramPropagator::propagate(es, ps, g);
    k += stride;
    visit(k);
  }
  if (k < steps) {
    const auto [er, pr] = prop.jump(steps - k);
    g = GramPropagator::propagate(er, pr, g);
    visit(steps);
  }
  return pass;
}

inline Pass integrate_bdf(const ProjectedProblem& pp, const TimeGrid& grid,
                          const SolverConfig& cfg, bool /*full*/) {
  Pass pass;
  const ProjectedBdf bdf(pp.t, pp.b, grid.step(), cfg.bdf_order, cfg.bdf_start);
  const LyapunovSolver& schur = bdf.schur();
  // Residual in Schur coordinates: ||T_c U_last Y~||_F.
  Matrix w;
  if (pp.coupling.size() > 0) {
    w = pp.coupling * schur.schur_vectors().bottomRows(pp.coupling.cols());
  }
  bdf.run(schur.to_schur(pp.g0), grid.steps(), [&](Index k, const Matrix& y) {
    pass.nodes.push_back(k);
    pass.residuals.push_back(w.size() == 0 ? 0.0 : (w * y).norm());
    pass.small.push_back(y);
  });
  for (Matrix& y : pass.small) y = schur.from_schur(y);
  return pass;
}

inline Trajectory run_projection(const LinearOperator& op, const Matrix& b, const SymLowRank& x0,
                                 const TimeGrid& grid, const SolverConfig& cfg,
                                 const Integrator& integrate) {
  cfg.validate();
  const Index n = op.size();
  if (b.rows() != n) {
    throw DimensionError("B has " + std::to_string(b.rows()) + " rows, operator has size " +
                         std::to_string(n));
  }
  if (x0.z.size() != 0 && x0.z.rows() != n) {
    throw DimensionError("X0 factor has " + std::to_string(x0.z.rows()) +
                         " rows, operator has size " + std::to_string(n));
  }
  require_finite(b, "B");
  const Matrix z0 = x0.z.size() == 0 ? Matrix(n, 0) : x0.z;
  Matrix start(n, b.cols() + z0.cols());
  start << b, z0;

  Trajectory traj;
  traj.method = cfg.method;
  traj.n = n;
  traj.times = grid.nodes();

  KrylovDecomposition kd = KrylovDecomposition::start(op, start, cfg.krylov, cfg.rank_tol);
  if (kd.next_width() == 0) {
    // Zero data: X(t) = 0 exactly.
    traj.m = 1;
    traj.converged = true;
    traj.breakdown = true;
    traj.small.assign(traj.times.size(), Matrix(0, 0));
    traj.residuals.assign(traj.times.size(), 0.0);
    traj.projected = Matrix(0, 0);
    traj.projected_b = Matrix(0, b.cols());
    traj.coupling = Matrix(0, 0);
    traj.basis = std::move(kd);
    traj.iterations.push_back(IterationRecord{1, 0, 0.0, 0.0, true, true});
    if (cfg.observer) cfg.observer(traj.iterations.back());
    return traj;
  }

  for (Index m = 1; m <= cfg.m_max; ++m) {
    const ArnoldiStep step = kd.extend(op);
    ProjectedProblem pp;
    pp.t = kd.projected();
    pp.b = kd.project(b);
    const Matrix z0m = kd.project(z0);
    pp.g0 = z0m * z0m.transpose();
    pp.coupling = kd.coupling();

    const bool last = step.breakdown || m == cfg.m_max;
    Pass pass = integrate(pp, grid, cfg, false);
    double worst = *std::max_element(pass.residuals.begin(), pass.residuals.end());
    const bool probe_only = pass.small.empty();
    if (probe_only && (worst < cfg.tol || last)) {
      pass = integrate(pp, grid, cfg, true);
      worst = *std::max_element(pass.residuals.begin(), pass.residuals.end());
    }
    const bool full = !pass.small.empty();

    IterationRecord rec;
    rec.m = m;
    rec.dim = kd.dim();
    rec.max_residual = worst;
    rec.final_residual = pass.residuals.back();
    rec.full_grid = full;
    rec.deflated = step.deflated;
    traj.iterations.push_back(rec);
    if (cfg.observer) cfg.observer(rec);

    if (full && (worst < cfg.tol || last)) {
      traj.m = m;
      traj.converged = worst < cfg.tol;
      traj.breakdown = step.breakdown;
      traj.small = std::move(pass.small);
      traj.residuals = std::move(pass.residuals);
      traj.projected = std::move(pp.t);
      traj.projected_b = std::move(pp.b);
      traj.coupling = std::move(pp.coupling);
      traj.basis = std::move(kd);
      return traj;
    }
  }
  throw Error("projection solver: iteration loop ended without a result");  // unreachable
}

}  // namespace detail

/// Exponential-integral approach: G_m(t) by composite Gauss-Legendre
/// quadrature (q nodes per grid step).
inline Trajectory solve_eba_exp(const LinearOperator& op, const Matrix& b, const SymLowRank& x0,
                                const TimeGrid& grid, SolverConfig cfg) {
  cfg.method = Method::eba_exp;
  return detail::run_projection(op, b, x0, grid, cfg, detail::integrate_exp);
}

/// Projected BDF approach: Y_m(t) by p-step BDF at the grid step.
inline Trajectory solve_eba_bdf(const LinearOperator& op, const Matrix& b, const SymLowRank& x0,
                                const TimeGrid& grid, SolverConfig cfg) {
  cfg.method = Method::eba_bdf;
  return detail::run_projection(op, b, x0, grid, cfg, detail::integrate_bdf);
}

inline Trajectory solve(const LinearOperator& op, const Matrix& b, const SymLowRank& x0,
                        const TimeGrid& grid, const SolverConfig& cfg) {
  return cfg.method == Method::eba_exp ? solve_eba_exp(op, b, x0, grid, cfg)
                                       : solve_eba_bdf(op, b, x0, grid, cfg);
}

}  // namespace dle
