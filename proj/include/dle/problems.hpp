#pragma once

// Benchmark problem generators: 2-D convection-diffusion, 1-D heat flow
// (finite elements + semi-implicit Euler), diagonal test matrices and
// uniform random blocks.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dle/dense.hpp"
#include "dle/errors.hpp"
#include "dle/matrix_market.hpp"
#include "dle/sparse.hpp"

namespace dle {

/// n x s block, entries uniform on [0, 1). mt19937_64 with the top 53 bits
/// mapped to a double, so the stream is identical on every platform.
inline Matrix gen_random_block(Index n, Index s, std::uint64_t seed) {
  if (n < 1 || s < 1) throw DomainError("gen_random_block: n and s must be positive");
  std::mt19937_64 rng(seed);
  Matrix out(n, s);
  for (Index j = 0; j < s; ++j) {
    for (Index i = 0; i < n; ++i) out(i, j) = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  }
  return out;
}

/// Coefficients of  Lu = Laplace(u) - f1 u_x + f2 u_y + g1 u.
struct ConvDiffCoefficients {
  std::function<double(double, double)> f1 = [](double x, double y) { return 10.0 * x * y; };
  std::function<double(double, double)> f2 = [](double x, double y) {
    return std::exp(x * x * y);
  };
  std::function<double(double, double)> g1 = [](double, double y) { return 20.0 * y; };

  static ConvDiffCoefficients laplacian() {
    auto zero = [](double, double) { return 0.0; };
    return {zero, zero, zero};
  }
};

/// 5-point centered finite differences on the n0 x n0 interior grid of the
/// unit square (Dirichlet boundary), mesh width 1/(n0+1). Unknown (i, j) at
/// (x, y) = (i h, j h) has index (j-1) n0 + (i-1).
inline SparseMatrix gen_convdiff(Index n0, const ConvDiffCoefficients& c = {}) {
  if (n0 < 2) throw DomainError("gen_convdiff: n0 must be at least 2");
  const double h = 1.0 / static_cast<double>(n0 + 1);
  const double ih2 = 1.0 / (h * h);
  const double i2h = 1.0 / (2.0 * h);
  const Index n = n0 * n0;
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(5 * n));
  for (Index j = 1; j <= n0; ++j) {
    for (Index i = 1; i <= n0; ++i) {
      const double x = static_cast<double>(i) * h;
      const double y = static_cast<double>(j) * h;
      const Index row = (j - 1) * n0 + (i - 1);
      const double f1 = c.f1(x, y);
      const double f2 = c.f2(x, y);
      trip.emplace_back(row, row, -4.0 * ih2 + c.g1(x, y));
      if (i > 1) trip.emplace_back(row, row - 1, ih2 + f1 * i2h);
      if (i < n0) trip.emplace_back(row, row + 1, ih2 - f1 * i2h);
      if (j > 1) trip.emplace_back(row, row - n0, ih2 - f2 * i2h);
      if (j < n0) trip.emplace_back(row, row + n0, ih2 + f2 * i2h);
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  return a;
}

inline SparseMatrix tridiag(Index n, double lower, double diag, double upper) {
  std::vector<Triplet> trip;
  for (Index i = 0; i < n; ++i) {
    trip.emplace_back(i, i, diag);
    if (i > 0) trip.emplace_back(i, i - 1, lower);
    if (i + 1 < n) trip.emplace_back(i, i + 1, upper);
  }
  SparseMatrix t(n, n);
  t.setFromTriplets(trip.begin(), trip.end());
  t.makeCompressed();
  return t;
}

/// 1-D heat flow: M x' = K x + F u, one semi-implicit Euler step of size dt
/// gives A = (M - dt K)^{-1} M and B = dt (M - dt K)^{-1} F.
struct HeatFem {
  SparseMatrix mass;
  SparseMatrix stiffness;
  SparseMatrix lhs;  ///< M - dt K
  double dt = 0.0;
  Factorization lhs_factor;
  LinearOperator op;

  Matrix input(const Matrix& f) const { return dt * lhs_factor.solve(f); }
};

inline HeatFem gen_heat_fem(Index n, double dt, double alpha) {
  if (n < 2) throw DomainError("gen_heat_fem: n must be at least 2");
  if (!(dt > 0.0)) throw DomainError("gen_heat_fem: dt must be positive");
  const double nd = static_cast<double>(n);
  SparseMatrix mass = tridiag(n, 1.0, 4.0, 1.0) * (1.0 / (6.0 * nd));
  SparseMatrix stiff = tridiag(n, -1.0, 2.0, -1.0) * (-alpha * nd);
  SparseMatrix lhs = mass - dt * stiff;
  lhs.makeCompressed();
  Factorization lf(lhs);
  LinearOperator op = operator_from_pair(lf, lhs, mass);
  return HeatFem{std::move(mass), std::move(stiff), std::move(lhs), dt, std::move(lf),
                 std::move(op)};
}

/// diag(-1, -2, ..., -n).
inline SparseMatrix gen_diagonal(Index n) {
  if (n < 1) throw DomainError("gen_diagonal: n must be positive");
  std::vector<Triplet> trip;
  for (Index i = 0; i < n; ++i) trip.emplace_back(i, i, -static_cast<double>(i + 1));
  SparseMatrix a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

enum class ProblemKind { convdiff, heat_fem, diagonal, external };

inline const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::convdiff: return "convdiff";
    case ProblemKind::heat_fem: return "heat_fem";
    case ProblemKind::diagonal: return "diagonal";
    case ProblemKind::external: return "external";
  }
  return "?";
}

inline ProblemKind parse_problem_kind(const std::string& s) {
  if (s == "convdiff") return ProblemKind::convdiff;
  if (s == "heat_fem") return ProblemKind::heat_fem;
  if (s == "diagonal") return ProblemKind::diagonal;
  if (s == "external") return ProblemKind::external;
  throw DomainError("unknown problem kind '" + s + "'");
}

struct ProblemSpec {
  ProblemKind kind = ProblemKind::convdiff;
  Index n0 = 10;  ///< convdiff grid points per direction
  Index n = 0;    ///< heat_fem / diagonal size
  Index s = 2;
  std::uint64_t seed = 1;
  double dt = 0.01;
  double alpha = 0.05;
  double t0 = 0.0;
  double tf = 2.0;
  double h = 1e-3;
  std::filesystem::path a_path;   ///< external: Matrix Market A
  std::filesystem::path b_path;   ///< optional Matrix Market B (else random)
  std::filesystem::path x0_path;  ///< optional Matrix Market factor Z0

  void validate() const {
    if (s < 1) throw DomainError("problem: s must be at least 1");
    if (kind == ProblemKind::convdiff && n0 < 2) throw DomainError("problem: n0 must be >= 2");
    if ((kind == ProblemKind::heat_fem && n < 2) || (kind == ProblemKind::diagonal && n < 1)) {
      throw DomainError("problem: n too small for " + std::string(to_string(kind)));
    }
    if (kind == ProblemKind::external && a_path.empty()) {
      throw DomainError("problem: external kind needs a_path");
    }
    if (!(h > 0.0) || tf < t0) throw DomainError("problem: need h > 0 and t0 <= tf");
  }

  Index dimension() const {
    switch (kind) {
      case ProblemKind::convdiff: return n0 * n0;
      case ProblemKind::heat_fem:
      case ProblemKind::diagonal: return n;
      case ProblemKind::external: return -1;
    }
    return -1;
  }
};

struct Problem {
  ProblemSpec spec;
  LinearOperator op;
  Matrix b;
  Matrix z0;  ///< n x 0 when X0 = 0
  std::optional<SparseMatrix> a_sparse;  ///< when A is an explicit matrix

  Index size() const { return op.size(); }
  /// Dense A (desk scale only).
  Matrix dense_a() const { return a_sparse ? to_dense(*a_sparse) : to_dense(op); }
};

inline Problem build_problem(const ProblemSpec& spec) {
  spec.validate();
  auto random_b = [&](Index n) { return gen_random_block(n, spec.s, spec.seed); };
  auto with_inputs = [&](LinearOperator op, Matrix b, std::optional<SparseMatrix> a) {
    const Index n = op.size();
    Matrix z0(n, 0);
    if (!spec.b_path.empty()) {
      b = read_matrix_market_dense(spec.b_path);
      if (b.rows() != n) throw DimensionError("B file has wrong row count");
    }
    if (!spec.x0_path.empty()) {
      z0 = read_matrix_market_dense(spec.x0_path);
      if (z0.rows() != n) throw DimensionError("X0 factor file has wrong row count");
    }
    return Problem{spec, std::move(op), std::move(b), std::move(z0), std::move(a)};
  };
  switch (spec.kind) {
    case ProblemKind::convdiff: {
      SparseMatrix a = gen_convdiff(spec.n0);
      LinearOperator op = operator_from_sparse(a);
      return with_inputs(std::move(op), random_b(a.rows()), std::move(a));
    }
    case ProblemKind::heat_fem: {
      HeatFem fem = gen_heat_fem(spec.n, spec.dt, spec.alpha);
      Matrix b = fem.input(random_b(spec.n));
      return with_inputs(fem.op, std::move(b), std::nullopt);
    }
    case ProblemKind::diagonal: {
      SparseMatrix a = gen_diagonal(spec.n);
      LinearOperator op = operator_from_sparse(a);
      return with_inputs(std::move(op), random_b(spec.n), std::move(a));
    }
    case ProblemKind::external: {
      SparseMatrix a = read_matrix_market(spec.a_path);
      if (a.rows() != a.cols()) throw DimensionError("external A is not square");
      LinearOperator op = operator_from_sparse(a);
      return with_inputs(std::move(op), random_b(a.rows()), std::move(a));
    }
  }
  throw DomainError("unhandled problem kind");
}

}  // namespace dle
