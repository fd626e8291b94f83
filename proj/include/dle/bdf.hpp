#pragma once

// Fixed-step BDF integration of a small projected DLE
//   Y' = T Y + Y T^T + C C^T,   Y(t0) = Y0.
// Every step is one algebraic Lyapunov equation
//   (h beta T - I/2) Y + Y (h beta T - I/2)^T + Q = 0,
//   Q = h beta C C^T + sum_i alpha_i Y_{k-i}.

#include <array>
#include <deque>
#include <vector>

#include "dle/dense.hpp"
#include "dle/errors.hpp"
#include "dle/quadrature.hpp"

namespace dle {

struct BdfCoefficients {
  int p = 1;
  double beta = 1.0;
  std::array<double, 3> alpha{1.0, 0.0, 0.0};  ///< weights of Y_k, Y_{k-1}, Y_{k-2}
};

inline BdfCoefficients bdf_coefficients(int p) {
  switch (p) {
    case 1: return {1, 1.0, {1.0, 0.0, 0.0}};
    case 2: return {2, 2.0 / 3.0, {4.0 / 3.0, -1.0 / 3.0, 0.0}};
    case 3: return {3, 6.0 / 11.0, {18.0 / 11.0, -9.0 / 11.0, 2.0 / 11.0}};
    default: throw DomainError("BDF order must be 1, 2 or 3, got " + std::to_string(p));
  }
}

/// How Y_1..Y_{p-1} are produced before the p-step formula can run.
enum class BdfStart {
  lower_order,  ///< BDF1, then BDF2, ...
  exact_flow,   ///< exact projected flow over one step (block exponential)
};

/// One step. `history` holds Y_k, Y_{k-1}, ... (most recent first), at
/// least coeffs.p entries.
inline Matrix bdf_step(const Matrix& t, const Matrix& c, const std::vector<Matrix>& history,
                       double h, const BdfCoefficients& coeffs) {
  require_square(t, "bdf_step");
  if (c.rows() != t.rows()) throw DimensionError("bdf_step: B_m has wrong row count");
  if (static_cast<int>(history.size()) < coeffs.p) {
    throw DimensionError("bdf_step: history shorter than the BDF order");
  }
  if (!(h > 0.0)) throw DomainError("bdf_step: step must be positive");
  const Index n = t.rows();
  Matrix q = (h * coeffs.beta) * (c * c.transpose());
  for (int i = 0; i < coeffs.p; ++i) {
    const Matrix& y = history[static_cast<std::size_t>(i)];
    if (y.rows() != n || y.cols() != n) throw DimensionError("bdf_step: history block size");
    q += coeffs.alpha[static_cast<std::size_t>(i)] * y;
  }
  const Matrix f = (h * coeffs.beta) * t - 0.5 * Matrix::Identity(n, n);
  return lyap_direct(f, q);
}

/// Fixed-step integrator for one projected problem. Works in the real Schur
/// coordinates of T so every step is a single quasi-triangular solve.
class ProjectedBdf {
 public:
  ProjectedBdf(const Matrix& t, const Matrix& c, double h, int p,
               BdfStart start = BdfStart::exact_flow)
      : solver_(t), h_(h), coeffs_(bdf_coefficients(p)), start_(start) {
    if (c.rows() != t.rows()) throw DimensionError("bdf: B_m has wrong row count");
    if (!(h > 0.0)) throw DomainError("bdf: step must be positive");
    const Matrix cs = solver_.schur_vectors().transpose() * c;
    ccs_ = cs * cs.transpose();
    if (start_ == BdfStart::exact_flow && coeffs_.p > 1) {
      const Matrix& u = solver_.schur_vectors();
      flow_e_ = u.transpose() * expm(h * t) * u;
      flow_p_ = u.transpose() * gram_increment_exact(t, c * c.transpose(), h) * u;
    }
  }

  const LyapunovSolver& schur() const { return solver_; }

  /// Integrate `steps` steps from Y0 given in Schur coordinates; calls
  /// visit(k, Y_k) for k = 0..steps (Schur coordinates).
  template <class Visit>
  void run(const Matrix& y0_schur, Index steps, Visit&& visit) const {
    std::deque<Matrix> hist;  // most recent first
    hist.push_front(y0_schur);
    visit(Index{0}, hist.front());
    for (Index k = 0; k < steps; ++k) {
      const int avail = static_cast<int>(hist.size());
      Matrix next;
      if (avail >= coeffs_.p) {
        next = step(coeffs_, hist);
      } else if (start_ == BdfStart::exact_flow) {
        next = GramPropagator::propagate(flow_e_, flow_p_, hist.front());
      } else {
        next = step(bdf_coefficients(avail), hist);
      }
      hist.push_front(std::move(next));
      if (static_cast<int>(hist.size()) > coeffs_.p) hist.pop_back();
      visit(k + 1, hist.front());
    }
  }

 private:
  Matrix step(const BdfCoefficients& co, const std::deque<Matrix>& hist) const {
    const double hb = h_ * co.beta;
    Matrix q = hb * ccs_;
    for (int i = 0; i < co.p; ++i) {
      q += co.alpha[static_cast<std::size_t>(i)] * hist[static_cast<std::size_t>(i)];
    }
    return solver_.solve_schur(q, hb, -0.5);
  }

  LyapunovSolver solver_;
  double h_;
  BdfCoefficients coeffs_;
  BdfStart start_;
  Matrix ccs_;
  Matrix flow_e_;
  Matrix flow_p_;
};

}  // namespace dle
