#pragma once

// Partial-fraction rational approximations r(z) = a0 + sum_i a_i / (z - theta_i)
// of e^z on the negative real axis, and their action on a block.

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "dle/dense.hpp"
#include "dle/errors.hpp"

namespace dle {

using Complex = std::complex<double>;

/// Poles come in complex-conjugate pairs (or are real); the represented
/// function is real on the real axis and is evaluated as the real part of
/// the complex sum.
struct RationalExp {
  double a0 = 0.0;
  std::vector<Complex> residues;
  std::vector<Complex> poles;

  Complex operator()(Complex z) const {
    Complex r = a0;
    for (std::size_t i = 0; i < poles.size(); ++i) r += residues[i] / (z - poles[i]);
    return r;
  }
};

/// a0 * B + sum_i a_i (s T - theta_i I)^{-1} B.
inline Matrix expm_action_rational(const Matrix& t, const Matrix& b, double s,
                                   const RationalExp& coeffs) {
  require_square(t, "expm_action_rational");
  if (b.rows() != t.rows()) throw DimensionError("expm_action_rational: B has wrong row count");
  if (coeffs.residues.size() != coeffs.poles.size()) {
    throw DimensionError("expm_action_rational: residue/pole count mismatch");
  }
  const Index n = t.rows();
  using CMatrix = Eigen::MatrixXcd;
  const CMatrix st = (s * t).cast<Complex>();
  const CMatrix cb = b.cast<Complex>();
  CMatrix acc = CMatrix::Zero(n, b.cols());
  const double scale = std::max(st.cwiseAbs().maxCoeff(), 1.0);
  for (std::size_t i = 0; i < coeffs.poles.size(); ++i) {
    const CMatrix shifted = st - coeffs.poles[i] * CMatrix::Identity(n, n);
    Eigen::FullPivLU<CMatrix> lu(shifted);
    const double min_pivot =
        n == 0 ? 1.0 : lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (min_pivot <= 64.0 * std::numeric_limits<double>::epsilon() * scale) {
      throw SolvabilityError("expm_action_rational: shifted matrix is singular");
    }
    acc += coeffs.residues[i] * lu.solve(cb);
  }
  return coeffs.a0 * b + acc.real();
}

namespace detail {

// Samples of (-inf, 0] through x = scale (t - 1) / (t + 1), t Chebyshev.
inline std::vector<double> halfline_samples(int count, double scale) {
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(count) + 1);
  for (int j = 0; j < count; ++j) {
    const double t = std::cos(std::numbers::pi * (j + 0.5) / count);
    xs.push_back(scale * (t - 1.0) / (t + 1.0));
  }
  xs.push_back(0.0);
  return xs;
}

}  // namespace detail

/// Type (p, p) near-best rational approximation of e^x on (-inf, 0].
///
/// Poles come from the Caratheodory-Fejer construction (singular vector of
/// the Hankel matrix of Chebyshev coefficients of the transplanted
/// exponential); the constant and the residues are then fitted in the
/// least-squares sense on a dense sample of the half line. The achieved
/// maximum error on the samples is returned in `max_error`.
inline RationalExp chebyshev_rational_exp(int p, double* max_error = nullptr) {
  if (p < 1 || p > 24) throw DomainError("chebyshev_rational_exp: degree must be in [1, 24]");
  constexpr int K = 75;
  constexpr int nf = 1024;
  constexpr double scl = 9.0;

  // Carried out in extended precision: for p near 16 the relevant Hankel
  // singular value is close to double-precision rounding.
  using Real = long double;
  using CReal = std::complex<Real>;
  using MatrixL = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorL = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  const Real pi = std::numbers::pi_v<Real>;
  std::vector<CReal> samples(nf);
  for (int j = 0; j < nf; ++j) {
    const Real t = std::cos(2 * pi * j / nf);
    samples[static_cast<std::size_t>(j)] =
        std::exp(Real(scl) * (t - 1) / (t + 1 + Real(1e-16)));
  }
  Eigen::FFT<Real> fft;
  std::vector<CReal> spectrum;
  fft.fwd(spectrum, samples);
  std::vector<Real> c(K + 1);
  for (int k = 0; k <= K; ++k) {
    c[static_cast<std::size_t>(k)] = spectrum[static_cast<std::size_t>(k)].real() / nf;
  }

  MatrixL hankel = MatrixL::Zero(K, K);
  for (int i = 0; i < K; ++i) {
    for (int j = 0; i + j < K; ++j) hankel(i, j) = c[static_cast<std::size_t>(i + j + 1)];
  }
  Eigen::JacobiSVD<MatrixL> svd(hankel, Eigen::ComputeFullV);
  const VectorL v = svd.matrixV().col(p);

  // Roots of sum_k v(k) z^{K-1-k}: eigenvalues of the companion matrix.
  Index lead = 0;
  while (lead < K - 1 && std::abs(v(lead)) == Real(0)) ++lead;
  const Index degree = K - 1 - lead;
  MatrixL companion = MatrixL::Zero(degree, degree);
  for (Index j = 0; j < degree; ++j) companion(0, j) = -v(lead + 1 + j) / v(lead);
  for (Index i = 1; i < degree; ++i) companion(i, i - 1) = 1;
  Eigen::EigenSolver<MatrixL> roots(companion, false);
  if (roots.info() != Eigen::Success) {
    throw IterationLimitError("chebyshev_rational_exp: companion eigensolver failed");
  }
  std::vector<Complex> poles;
  for (Index i = 0; i < degree; ++i) {
    const CReal q = roots.eigenvalues()(i);
    if (std::abs(q) > 1) {
      const CReal z = Real(scl) * (q - Real(1)) * (q - Real(1)) / ((q + Real(1)) * (q + Real(1)));
      poles.emplace_back(static_cast<double>(z.real()), static_cast<double>(z.imag()));
    }
  }
  if (static_cast<int>(poles.size()) != p) {
    throw IterationLimitError("chebyshev_rational_exp: expected " + std::to_string(p) +
                              " poles, found " + std::to_string(poles.size()));
  }
  // Conjugate pairs: keep upper-half representatives and real poles.
  std::vector<Complex> reps;
  std::vector<bool> is_real;
  for (const Complex& z : poles) {
    const bool real = std::abs(z.imag()) <= 1e-10 * std::max(1.0, std::abs(z));
    if (real) {
      reps.emplace_back(z.real(), 0.0);
      is_real.push_back(true);
    } else if (z.imag() > 0.0) {
      reps.push_back(z);
      is_real.push_back(false);
    }
  }

  // Real least squares for a0 and the residues.
  const std::vector<double> xs = detail::halfline_samples(4000, scl);
  Index unknowns = 1;
  for (bool r : is_real) unknowns += r ? 1 : 2;
  Matrix lsq(static_cast<Index>(xs.size()), unknowns);
  Vector rhs(static_cast<Index>(xs.size()));
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const auto row = static_cast<Index>(j);
    Index col = 0;
    lsq(row, col++) = 1.0;
    for (std::size_t k = 0; k < reps.size(); ++k) {
      const Complex g = 1.0 / (xs[j] - reps[k]);
      if (is_real[k]) {
        lsq(row, col++) = g.real();
      } else {
        // 2 Re(a g) = 2 (Re a Re g - Im a Im g)
        lsq(row, col++) = 2.0 * g.real();
        lsq(row, col++) = -2.0 * g.imag();
      }
    }
    rhs(row) = std::exp(xs[j]);
  }
  const Vector sol = lsq.colPivHouseholderQr().solve(rhs);

  RationalExp r;
  Index col = 0;
  r.a0 = sol(col++);
  for (std::size_t k = 0; k < reps.size(); ++k) {
    if (is_real[k]) {
      r.poles.push_back(reps[k]);
      r.residues.emplace_back(sol(col++), 0.0);
    } else {
      const Complex a(sol(col), sol(col + 1));
      col += 2;
      r.poles.push_back(reps[k]);
      r.residues.push_back(a);
      r.poles.push_back(std::conj(reps[k]));
      r.residues.push_back(std::conj(a));
    }
  }
  if (max_error != nullptr) {
    double err = 0.0;
    for (double x : detail::halfline_samples(20000, scl)) {
      err = std::max(err, std::abs(r(Complex(x, 0.0)).real() - std::exp(x)));
    }
    *max_error = err;
  }
  return r;
}

}  // namespace dle
