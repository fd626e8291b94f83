#pragma once

// Gauss-Legendre rules and the controllability-type Gramian integral
//   G(t) = e^{(t-t0)T} G0 e^{(t-t0)T^T} + int_{t0}^{t} e^{(t-tau)T} B B^T e^{(t-tau)T^T} dtau
// evaluated by composite Gauss-Legendre quadrature on panels of width <= h.

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "dle/dense.hpp"
#include "dle/errors.hpp"

namespace dle {

struct GaussRule {
  std::vector<double> nodes;    ///< on [0, 1]
  std::vector<double> weights;  ///< sum to 1
};

/// q-point Gauss-Legendre rule mapped to [0, 1] (Newton on P_q).
inline GaussRule gauss_legendre(int q) {
  if (q < 1) throw DomainError("gauss_legendre: order must be positive");
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(q));
  rule.weights.resize(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= q; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= q; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = q * (x * p1 - p0) / (x * x - 1.0);
    const auto idx = static_cast<std::size_t>(q - 1 - i);
    rule.nodes[idx] = 0.5 * (x + 1.0);
    rule.weights[idx] = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/((1-x^2)P'^2), halved
  }
  return rule;
}

/// e^{s T} B.
inline Matrix expm_action_small(const Matrix& t, const Matrix& b, double s) {
  require_square(t, "expm_action_small");
  if (b.rows() != t.rows()) throw DimensionError("expm_action_small: B has wrong row count");
  if (s < 0.0) throw DomainError("expm_action_small: negative duration");
  if (s == 0.0) return b;
  return expm(s * t) * b;
}

/// Exact one-panel increment int_0^h e^{sT} Q e^{sT^T} ds via the block
/// exponential of [[-T, Q], [0, T^T]]. Cross-check oracle for the quadrature.
inline Matrix gram_increment_exact(const Matrix& t, const Matrix& q, double h) {
  require_square(t, "gram_increment_exact");
  const Index n = t.rows();
  Matrix c = Matrix::Zero(2 * n, 2 * n);
  c.topLeftCorner(n, n) = -t;
  c.topRightCorner(n, n) = q;
  c.bottomRightCorner(n, n) = t.transpose();
  const Matrix e = expm(h * c);
  const Matrix inc = e.bottomRightCorner(n, n).transpose() * e.topRightCorner(n, n);
  return 0.5 * (inc + inc.transpose());
}

/// Advances G over steps of length h: G <- E G E^T + P with E = e^{hT} and
/// P the composite q-point Gauss-Legendre value of the one-step integral.
/// A step is split into 2^k equal panels with (h / 2^k) ||T||_1 <= max_stiffness
/// (max_stiffness <= 0: one panel per step); the panel maps are composed by
/// doubling, which is algebraically composite Gauss-Legendre over all panels.
class GramPropagator {
 public:
  GramPropagator(const Matrix& t, const Matrix& b, double step, int q,
                 double max_stiffness = 0.25)
      : width_(step) {
    require_square(t, "gram_integral");
    if (b.rows() != t.rows()) throw DimensionError("gram_integral: B has wrong row count");
    if (!(step > 0.0)) throw DomainError("gram_integral: step must be positive");
    const double tnorm = t.size() == 0 ? 0.0 : t.cwiseAbs().colwise().sum().maxCoeff();
    while (max_stiffness > 0.0 && step / std::ldexp(1.0, levels_) * tnorm > max_stiffness &&
           levels_ < 40) {
      ++levels_;
    }
    const double panel = std::ldexp(step, -levels_);
    const GaussRule rule = gauss_legendre(q);
    step_ = expm(panel * t);
    increment_ = Matrix::Zero(t.rows(), t.rows());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const Matrix z = expm_action_small(t, b, panel * rule.nodes[i]);
      increment_.noalias() += (panel * rule.weights[i]) * z * z.transpose();
    }
    increment_ = 0.5 * (increment_ + increment_.transpose());
    for (int l = 0; l < levels_; ++l) {
      increment_ = propagate(step_, increment_, increment_);
      step_ = step_ * step_;
    }
  }

  double step() const { return width_; }
  Index panels_per_step() const { return Index{1} << levels_; }
  const Matrix& step_matrix() const { return step_; }
  const Matrix& increment() const { return increment_; }

  /// One step.
  Matrix advance(const Matrix& g) const { return propagate(step_, increment_, g); }

  /// Combined map for `steps` consecutive steps.
  std::pair<Matrix, Matrix> jump(Index steps) const {
    Matrix e = Matrix::Identity(step_.rows(), step_.cols());
    Matrix p = Matrix::Zero(step_.rows(), step_.cols());
    for (Index i = 0; i < steps; ++i) {
      p = propagate(step_, increment_, p);
      e = step_ * e;
    }
    return {e, p};
  }

  static Matrix propagate(const Matrix& e, const Matrix& p, const Matrix& g) {
    Matrix out = p;
    out.noalias() += e * g * e.transpose();
    return 0.5 * (out + out.transpose());
  }

 private:
  double width_;
  int levels_ = 0;
  Matrix step_;
  Matrix increment_;
};

/// G(t) with G(t0) = g0 (zero by default) on panels of width <= h.
inline Matrix gram_integral(const Matrix& t_mat, const Matrix& b, double t0, double t,
                            int q = 4, double h = 1e-3, const Matrix& g0 = Matrix(),
                            double max_stiffness = 0.25) {
  if (t < t0) throw DomainError("gram_integral: t < t0");
  const Index n = t_mat.rows();
  Matrix g = g0.size() == 0 ? Matrix::Zero(n, n) : g0;
  if (t == t0) return g;
  const auto panels = static_cast<Index>(std::ceil((t - t0) / h - 1e-9));
  GramPropagator prop(t_mat, b, (t - t0) / static_cast<double>(panels), q, max_stiffness);
  for (Index k = 0; k < panels; ++k) g = prop.advance(g);
  return g;
}

}  // namespace dle
