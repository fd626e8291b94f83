#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dle/bdf.hpp"
#include "dle/lowrank.hpp"
#include "dle/problems.hpp"
#include "dle/quadrature.hpp"
#include "dle/rational.hpp"
#include "dle/solvers.hpp"
#include "test_util.hpp"

using namespace dle;
using dle::testing::random_matrix;
using dle::testing::random_stable;
using dle::testing::rel_diff;

namespace {

// X(t) for diagonal A = diag(lambda), X0 = 0: entrywise closed form.
Matrix diagonal_closed_form(const Vector& lambda, const Matrix& b, double t) {
  const Matrix bb = b * b.transpose();
  Matrix x(bb.rows(), bb.cols());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) {
      const double s = lambda(i) + lambda(j);
      x(i, j) = bb(i, j) * std::expm1(s * t) / s;
    }
  return x;
}

// Residual of X_m = V G V^T with X_m' taken from the projected equation.
Matrix true_residual(const Matrix& a, const Matrix& b, const Trajectory& traj, std::size_t k) {
  const Matrix v = traj.basis_matrix();
  const Matrix& g = traj.small[k];
  const Matrix& t = traj.projected;
  const Matrix gdot = t * g + g * t.transpose() + traj.projected_b * traj.projected_b.transpose();
  const Matrix x = v * g * v.transpose();
  return v * gdot * v.transpose() - a * x - x * a.transpose() - b * b.transpose();
}

SolverConfig config(Method method, Index m_max, double tol = 1e-10) {
  SolverConfig cfg;
  cfg.method = method;
  cfg.m_max = m_max;
  cfg.tol = tol;
  return cfg;
}

}  // namespace

// ---------------------------------------------------------------- grid

TEST(TimeGrid, NodesAndProbe) {
  const TimeGrid grid(0.0, 2.0, 1e-3);
  EXPECT_EQ(grid.steps(), 2000);
  EXPECT_EQ(grid.at(2000), 2.0);
  const auto probe = grid.probe_indices(10);
  EXPECT_EQ(probe.size(), 201u);
  EXPECT_EQ(probe.back(), 2000);
  const TimeGrid odd(0.0, 1.0, 0.3);
  EXPECT_EQ(odd.steps(), 4);
  EXPECT_DOUBLE_EQ(odd.step(), 0.25);
  EXPECT_EQ(odd.probe_indices(3), (std::vector<Index>{0, 3, 4}));
  EXPECT_THROW(TimeGrid(1.0, 0.0, 0.1), DomainError);
  EXPECT_THROW(TimeGrid(0.0, 1.0, 0.0), DomainError);
}

// ---------------------------------------------------------------- quadrature

TEST(GramIntegral, ZeroGeneratorIsLinearInTime) {
  const Matrix b = random_matrix(4, 2, 1);
  const Matrix g = gram_integral(Matrix::Zero(4, 4), b, 0.5, 2.0);
  EXPECT_LE(rel_diff(g, 1.5 * b * b.transpose()), 1e-12);  // 1500 accumulated steps
}

TEST(GramIntegral, ScalarClosedForm) {
  const Matrix g = gram_integral(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1), 0.0, 1.0);
  EXPECT_NEAR(g(0, 0), (1.0 - std::exp(-2.0)) / 2.0, 1e-14);
}

TEST(GramIntegral, QuadratureSelfConvergence) {
  const Matrix t = random_stable(6, 2);
  const Matrix b = random_matrix(6, 2, 3);
  const Matrix g4 = gram_integral(t, b, 0.0, 1.0, 4);
  const Matrix g8 = gram_integral(t, b, 0.0, 1.0, 8);
  EXPECT_LE((g4 - g8).norm(), 1e-12 * g8.norm());
}

TEST(GramIntegral, AgreesWithBlockExponential) {
  const Matrix t = random_stable(6, 4);
  const Matrix b = random_matrix(6, 2, 5);
  const Matrix exact = gram_increment_exact(t, b * b.transpose(), 0.7);
  EXPECT_LE(rel_diff(gram_integral(t, b, 0.0, 0.7), exact), 1e-12);
}

TEST(GramIntegral, InitialValueIsPropagated) {
  const Matrix t = random_stable(5, 6);
  const Matrix b = random_matrix(5, 1, 7);
  const Matrix z = random_matrix(5, 2, 8);
  const Matrix g0 = z * z.transpose();
  const Matrix e = expm(0.4 * t);
  const Matrix expect = e * g0 * e.transpose() + gram_increment_exact(t, b * b.transpose(), 0.4);
  EXPECT_LE(rel_diff(gram_integral(t, b, 1.0, 1.4, 4, 1e-3, g0), expect), 1e-12);
}

TEST(GramIntegral, ReversedIntervalRejected) {
  EXPECT_THROW(gram_integral(Matrix::Zero(1, 1), Matrix::Ones(1, 1), 1.0, 0.5), DomainError);
}

TEST(GramPropagator, StiffGeneratorIsSubdivided) {
  const Matrix t = -5e4 * Matrix::Identity(2, 2);
  const GramPropagator sub(t, Matrix::Ones(2, 1), 1e-3, 4);
  EXPECT_GE(sub.panels_per_step(), 256);
  const GramPropagator literal(t, Matrix::Ones(2, 1), 1e-3, 4, 0.0);
  EXPECT_EQ(literal.panels_per_step(), 1);
  // -1 / (2 * 5e4) * (e^{-100} - 1)
  const double exact = 1.0 / 1e5;
  EXPECT_NEAR(sub.increment()(0, 0) / exact, 1.0, 1e-12);
  EXPECT_GT(std::abs(literal.increment()(0, 0) / exact - 1.0), 1e-3);
}

TEST(GramPropagator, JumpComposesSteps) {
  const Matrix t = random_stable(4, 9);
  const GramPropagator prop(t, random_matrix(4, 2, 10), 0.01, 4);
  Matrix g = Matrix::Zero(4, 4);
  for (int i = 0; i < 7; ++i) g = prop.advance(g);
  const auto [e, p] = prop.jump(7);
  EXPECT_LE(rel_diff(GramPropagator::propagate(e, p, Matrix::Zero(4, 4)), g), 1e-13);
}

// ---------------------------------------------------------------- exponential actions

TEST(ExpmActionSmall, ZeroDurationAndDiagonal) {
  const Matrix b = random_matrix(3, 2, 11);
  Matrix t = Matrix::Zero(3, 3);
  t.diagonal() << -1.0, 0.5, -3.0;
  EXPECT_EQ(expm_action_small(t, b, 0.0), b);
  const Matrix z = expm_action_small(t, b, 0.7);
  for (Index i = 0; i < 3; ++i) {
    EXPECT_LE((z.row(i) - std::exp(0.7 * t(i, i)) * b.row(i)).norm(), 1e-14);
  }
  EXPECT_THROW(expm_action_small(t, b, -1.0), DomainError);
}

TEST(ExpmActionRational, ConstantApproximantReturnsBlock) {
  RationalExp r;
  r.a0 = 1.0;
  const Matrix b = random_matrix(3, 2, 12);
  EXPECT_EQ(expm_action_rational(random_matrix(3, 3, 13), b, 0.5, r), b);
}

TEST(ExpmActionRational, SinglePoleScalar) {
  RationalExp r;
  r.a0 = 0.1;
  r.poles = {Complex(-2.0, 0.0)};
  r.residues = {Complex(1.5, 0.0)};
  const Matrix z = expm_action_rational(Matrix::Constant(1, 1, -3.0), Matrix::Constant(1, 1, 2.0),
                                        0.5, r);
  // 2 * (0.1 + 1.5 / (-1.5 + 2))
  EXPECT_NEAR(z(0, 0), 2.0 * (0.1 + 1.5 / 0.5), 1e-14);
}

TEST(ExpmActionRational, SingularShiftRejected) {
  RationalExp r;
  r.poles = {Complex(-2.0, 0.0)};
  r.residues = {Complex(1.0, 0.0)};
  EXPECT_THROW(expm_action_rational(Matrix::Constant(1, 1, -2.0), Matrix::Ones(1, 1), 1.0, r),
               SolvabilityError);
}

TEST(ExpmActionRational, Degree16MatchesExpm) {
  double err = 0.0;
  const RationalExp r = chebyshev_rational_exp(16, &err);
  EXPECT_EQ(r.poles.size(), 16u);
  EXPECT_LE(err, 1e-12);
  const Matrix z = random_matrix(12, 12, 14);
  const Matrix t = -(z * z.transpose()) - 0.1 * Matrix::Identity(12, 12);
  const Matrix b = random_matrix(12, 2, 15);
  for (double s : {0.01, 0.5, 3.0}) {
    const Matrix exact = expm_action_small(t, b, s);
    EXPECT_LE((expm_action_rational(t, b, s, r) - exact).norm(), 1e-10 * b.norm()) << s;
  }
}

TEST(ChebyshevRational, ErrorDecreasesWithDegree) {
  double e4 = 0.0;
  double e8 = 0.0;
  double e12 = 0.0;
  chebyshev_rational_exp(4, &e4);
  chebyshev_rational_exp(8, &e8);
  chebyshev_rational_exp(12, &e12);
  EXPECT_LT(e8, 1e-2 * e4);
  EXPECT_LT(e12, 1e-2 * e8);
  EXPECT_THROW(chebyshev_rational_exp(0), DomainError);
}

// ---------------------------------------------------------------- BDF

TEST(Bdf, CoefficientTable) {
  const BdfCoefficients c1 = bdf_coefficients(1);
  EXPECT_EQ(c1.beta, 1.0);
  EXPECT_EQ(c1.alpha[0], 1.0);
  const BdfCoefficients c2 = bdf_coefficients(2);
  EXPECT_EQ(c2.beta, 2.0 / 3.0);
  EXPECT_EQ(c2.alpha[0], 4.0 / 3.0);
  EXPECT_EQ(c2.alpha[1], -1.0 / 3.0);
  const BdfCoefficients c3 = bdf_coefficients(3);
  EXPECT_EQ(c3.beta, 6.0 / 11.0);
  EXPECT_EQ(c3.alpha[0], 18.0 / 11.0);
  EXPECT_EQ(c3.alpha[1], -9.0 / 11.0);
  EXPECT_EQ(c3.alpha[2], 2.0 / 11.0);
  EXPECT_THROW(bdf_coefficients(4), DomainError);
}

TEST(Bdf, ScalarImplicitEuler) {
  const double a = -1.7;
  const double bv = 0.8;
  const double h = 0.05;
  double y = 0.3;
  for (int k = 0; k < 10; ++k) {
    const Matrix next = bdf_step(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, bv),
                                 {Matrix::Constant(1, 1, y)}, h, bdf_coefficients(1));
    const double expect = (y + h * bv * bv) / (1.0 - 2.0 * a * h);
    EXPECT_NEAR(next(0, 0), expect, 1e-15);
    y = expect;
  }
}

TEST(Bdf, DiagonalTwoStepMatchesScalarRecurrence) {
  Matrix t = Matrix::Zero(3, 3);
  t.diagonal() << -1.0, -4.0, -0.3;
  const Matrix c = random_matrix(3, 1, 16);
  const double h = 0.02;
  const BdfCoefficients co = bdf_coefficients(2);
  std::vector<Matrix> hist{symmetrize(random_matrix(3, 3, 17)), symmetrize(random_matrix(3, 3, 18))};
  const Matrix next = bdf_step(t, c, hist, h, co);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) {
      const double rhs = co.alpha[0] * hist[0](i, j) + co.alpha[1] * hist[1](i, j) +
                         h * co.beta * c(i) * c(j);
      const double expect = rhs / (1.0 - h * co.beta * (t(i, i) + t(j, j)));
      EXPECT_NEAR(next(i, j), expect, 1e-14);
    }
}

TEST(Bdf, ShortHistoryRejected) {
  EXPECT_THROW(bdf_step(Matrix::Zero(1, 1), Matrix::Ones(1, 1), {Matrix::Zero(1, 1)}, 0.1,
                        bdf_coefficients(2)),
               DimensionError);
}

TEST(Bdf, SchurIntegratorMatchesDirectSteps) {
  const Matrix t = random_stable(5, 19);
  const Matrix c = random_matrix(5, 2, 20);
  const double h = 0.01;
  const ProjectedBdf bdf(t, c, h, 2, BdfStart::lower_order);
  std::vector<Matrix> direct{Matrix::Zero(5, 5)};
  direct.insert(direct.begin(), bdf_step(t, c, direct, h, bdf_coefficients(1)));
  for (int k = 0; k < 8; ++k) {
    direct.insert(direct.begin(), bdf_step(t, c, direct, h, bdf_coefficients(2)));
  }
  Matrix last;
  bdf.run(Matrix::Zero(5, 5), 9, [&](Index, const Matrix& y) { last = bdf.schur().from_schur(y); });
  EXPECT_LE(rel_diff(last, direct.front()), 1e-12);
}

namespace {

// Observed orders of BDF-p for the 5x5 diagonal problem on [0, 1].
std::vector<double> observed_orders(int p, BdfStart start) {
  Vector lambda(5);
  lambda << -1, -2, -3, -4, -5;
  const Matrix t = lambda.asDiagonal();
  const Matrix c = Matrix::Ones(5, 1);
  const Matrix exact = diagonal_closed_form(lambda, c, 1.0);
  std::vector<double> errors;
  for (double h : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
    const ProjectedBdf bdf(t, c, h, p, start);
    Matrix last;
    bdf.run(Matrix::Zero(5, 5), static_cast<Index>(std::llround(1.0 / h)),
            [&](Index, const Matrix& y) { last = y; });
    errors.push_back((bdf.schur().from_schur(last) - exact).norm());
  }
  std::vector<double> orders;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    orders.push_back(std::log2(errors[i - 1] / errors[i]));
  }
  return orders;
}

}  // namespace

TEST(Bdf, ObservedOrders) {
  for (int p = 1; p <= 3; ++p) {
    for (double order : observed_orders(p, BdfStart::exact_flow)) {
      EXPECT_GE(order, p - 0.2) << "p = " << p;
      EXPECT_LE(order, p + 0.4) << "p = " << p;
    }
  }
}

TEST(Bdf, LowerOrderStartCapsBdf3AtSecondOrder) {
  for (double order : observed_orders(3, BdfStart::lower_order)) {
    EXPECT_NEAR(order, 2.0, 0.3);
  }
}

// ---------------------------------------------------------------- residual and truncation

TEST(ResidualNorm, ZeroCouplingAndScalarFactor) {
  const Matrix g = symmetrize(random_matrix(4, 4, 21));
  EXPECT_EQ(residual_norm(Matrix::Zero(1, 1), g), 0.0);
  EXPECT_NEAR(residual_norm(Matrix::Constant(1, 1, -2.5), g), 2.5 * g.row(3).norm(), 1e-15);
}

TEST(TruncateLowRank, IdentityKeepsBasis) {
  const Matrix v = qr_thin(random_matrix(10, 4, 22)).q;
  const SymLowRank z = truncate_lowrank(v, Matrix::Identity(4, 4));
  EXPECT_EQ(z.rank(), 4);
  EXPECT_LE((z.dense() - v * v.transpose()).norm(), 1e-14);
}

TEST(TruncateLowRank, RankOne) {
  const Matrix v = qr_thin(random_matrix(10, 4, 23)).q;
  const Vector u = random_matrix(4, 1, 24);
  EXPECT_EQ(truncate_lowrank(v, u * u.transpose()).rank(), 1);
}

TEST(TruncateLowRank, RandomPsdReconstruction) {
  const Matrix v = qr_thin(random_matrix(30, 8, 25)).q;
  const Matrix w = random_matrix(8, 5, 26);
  const Matrix g = w * w.transpose();
  const SymLowRank z = truncate_lowrank(v, g, 1e-12);
  EXPECT_EQ(z.rank(), 5);
  EXPECT_LE((z.dense() - v * g * v.transpose()).norm(), 1e-11);
}

TEST(TruncateLowRank, NegativeEigenvalueRejected) {
  Matrix g = Matrix::Identity(3, 3);
  g(2, 2) = -1e-6;
  EXPECT_THROW(truncate_lowrank(Matrix::Identity(3, 3), g), PsdViolationError);
  g(2, 2) = -1e-17;  // rounding level: dropped
  EXPECT_EQ(truncate_lowrank(Matrix::Identity(3, 3), g).rank(), 2);
}

// ---------------------------------------------------------------- end-to-end solvers

TEST(Solvers, ZeroInputGivesZeroTrajectory) {
  const LinearOperator op = operator_from_sparse(gen_convdiff(5));
  const TimeGrid grid(0.0, 1.0, 0.01);
  for (Method method : {Method::eba_exp, Method::eba_bdf}) {
    const Trajectory traj = solve(op, Matrix::Zero(25, 2), {}, grid, config(method, 10));
    EXPECT_TRUE(traj.converged);
    EXPECT_EQ(traj.m, 1);
    EXPECT_EQ(traj.dim(), 0);
    EXPECT_EQ(traj.max_residual(), 0.0);
    EXPECT_EQ(traj.dense(traj.times.size() - 1), Matrix::Zero(25, 25));
    EXPECT_EQ(traj.factor(traj.times.size() - 1).rank(), 0);
  }
}

TEST(Solvers, ExpMatchesDiagonalClosedForm) {
  const Index n = 10;
  Vector lambda(n);
  for (Index i = 0; i < n; ++i) lambda(i) = -(i + 1.0);
  const LinearOperator op = operator_from_sparse(gen_diagonal(n));
  const Matrix b = gen_random_block(n, 1, 3);
  const TimeGrid grid(0.0, 2.0, 1e-3);
  const Trajectory traj = solve_eba_exp(op, b, {}, grid, config(Method::eba_exp, 10));
  ASSERT_TRUE(traj.converged);
  for (std::size_t k : {std::size_t{100}, std::size_t{1000}, traj.times.size() - 1}) {
    const Matrix x = traj.dense(k);
    const Matrix exact = diagonal_closed_form(lambda, b, traj.times[k]);
    EXPECT_LE((x - exact).cwiseAbs().maxCoeff(), 1e-10) << "t = " << traj.times[k];
  }
}

TEST(Solvers, NonzeroInitialValue) {
  const Index n = 8;
  Vector lambda(n);
  for (Index i = 0; i < n; ++i) lambda(i) = -(i + 1.0);
  const LinearOperator op = operator_from_sparse(gen_diagonal(n));
  const Matrix b = gen_random_block(n, 1, 4);
  const Matrix z0 = gen_random_block(n, 1, 5);
  const TimeGrid grid(0.0, 1.0, 1e-3);
  for (Method method : {Method::eba_exp, Method::eba_bdf}) {
    SolverConfig cfg = config(method, 10);
    cfg.tol = 1e-8;
    const Trajectory traj = solve(op, b, SymLowRank{z0}, grid, cfg);
    ASSERT_TRUE(traj.converged);
    const Matrix e = Matrix(lambda.array().exp().matrix().asDiagonal());
    const Matrix exact =
        e * z0 * z0.transpose() * e + diagonal_closed_form(lambda, b, 1.0);
    EXPECT_LE(rel_diff(traj.dense(traj.times.size() - 1), exact),
              method == Method::eba_exp ? 1e-10 : 1e-5);
    EXPECT_LE(rel_diff(traj.dense(0), z0 * z0.transpose()), 1e-13);
  }
}

TEST(Solvers, ExpAndBdfAgreeOnConvDiff) {
  const SparseMatrix a = gen_convdiff(10);
  const LinearOperator op = operator_from_sparse(a);
  const Matrix b = gen_random_block(100, 2, 7);
  const TimeGrid grid(0.0, 2.0, 1e-3);
  const Trajectory exp = solve_eba_exp(op, b, {}, grid, config(Method::eba_exp, 30));
  const Trajectory bdf = solve_eba_bdf(op, b, {}, grid, config(Method::eba_bdf, 30));
  ASSERT_TRUE(exp.converged);
  ASSERT_TRUE(bdf.converged);
  const std::size_t last = exp.times.size() - 1;
  EXPECT_LE(rel_diff(bdf.dense(last), exp.dense(last)), 1e-6);
}

TEST(Solvers, ResidualFormulaAndPetrovGalerkin) {
  const SparseMatrix as = gen_convdiff(10);
  const Matrix a(as);
  const LinearOperator op = operator_from_sparse(as);
  const Matrix b = gen_random_block(100, 2, 8);
  const TimeGrid grid(0.0, 1.0, 1e-2);
  const double bb = (b * b.transpose()).norm();
  for (Method method : {Method::eba_exp, Method::eba_bdf}) {
    for (Index m : {1, 3, 6}) {
      SolverConfig cfg = config(method, m, 1e-300);
      const Trajectory traj = solve(op, b, {}, grid, cfg);
      ASSERT_EQ(traj.m, m);
      const Matrix v = traj.basis_matrix();
      for (std::size_t k = 10; k < traj.times.size(); k += 30) {
        const Matrix r = true_residual(a, b, traj, k);
        const double reported = traj.residuals[k];
        EXPECT_NEAR(reported, residual_norm(traj.coupling, traj.small[k]), 1e-12 * (1 + reported));
        EXPECT_NEAR(spec_norm_2(r), spec_norm_2(traj.coupling *
                                                traj.small[k].bottomRows(traj.coupling.cols())),
                    1e-10 * (1.0 + bb));
        // Frobenius norm of the symmetric residual counts the coupling block twice.
        EXPECT_NEAR(r.norm(), std::numbers::sqrt2 * reported, 1e-10 * (1.0 + bb));
        EXPECT_LE((v.transpose() * r * v).norm(), 1e-10 * bb);
      }
    }
  }
}

TEST(Solvers, ProjectedSolutionsStayPsd) {
  const LinearOperator op = operator_from_sparse(gen_convdiff(8));
  const Matrix b = gen_random_block(64, 2, 9);
  const TimeGrid grid(0.0, 1.0, 1e-2);
  for (Method method : {Method::eba_exp, Method::eba_bdf}) {
    const Trajectory traj = solve(op, b, {}, grid, config(method, 8, 1e-300));
    for (const Matrix& g : traj.small) {
      const SymEig e = sym_eig(g);
      EXPECT_GE(e.values.minCoeff(), -1e-10 * std::max(e.values(0), 0.0));
    }
  }
}

TEST(Solvers, BreakdownGivesZeroResidual) {
  // B inside an invariant subspace of A.
  const LinearOperator op = operator_from_sparse(gen_diagonal(12));
  Matrix b = Matrix::Zero(12, 1);
  b(2) = 1.0;
  b(5) = 0.5;
  const TimeGrid grid(0.0, 1.0, 1e-2);
  const Trajectory traj = solve_eba_exp(op, b, {}, grid, config(Method::eba_exp, 10));
  EXPECT_TRUE(traj.breakdown);
  EXPECT_TRUE(traj.converged);
  EXPECT_LE(traj.max_residual(), 1e-8 * (b * b.transpose()).norm());
}

TEST(Solvers, IterationLimitReportsBestEffort) {
  const LinearOperator op = operator_from_sparse(gen_convdiff(10));
  const Matrix b = gen_random_block(100, 2, 10);
  const TimeGrid grid(0.0, 1.0, 1e-2);
  std::vector<IterationRecord> seen;
  SolverConfig cfg = config(Method::eba_exp, 3);
  cfg.observer = [&](const IterationRecord& r) { seen.push_back(r); };
  const Trajectory traj = solve(op, b, {}, grid, cfg);
  EXPECT_FALSE(traj.converged);
  EXPECT_EQ(traj.m, 3);
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_TRUE(seen.back().full_grid);
  EXPECT_DOUBLE_EQ(seen.back().max_residual, traj.max_residual());
  EXPECT_EQ(traj.times.size(), traj.small.size());
}

TEST(Solvers, ProbeStoppingMatchesFullGridStopping) {
  const LinearOperator op = operator_from_sparse(gen_convdiff(10));
  const Matrix b = gen_random_block(100, 2, 11);
  const TimeGrid grid(0.0, 2.0, 1e-3);
  SolverConfig probe = config(Method::eba_exp, 30);
  SolverConfig full = probe;
  full.probe_stride = 1;
  const Trajectory tp = solve(op, b, {}, grid, probe);
  const Trajectory tf = solve(op, b, {}, grid, full);
  EXPECT_EQ(tp.m, tf.m);
  EXPECT_LE(std::abs(tp.max_residual() - tf.max_residual()), 1e-12);
}

TEST(Solvers, BlockVariantNeedsNoInverse) {
  const LinearOperator op = operator_from_sparse(gen_diagonal(30), false);
  const Matrix b = gen_random_block(30, 1, 12);
  SolverConfig cfg = config(Method::eba_exp, 30, 1e-9);
  cfg.krylov = KrylovVariant::block;
  const Trajectory traj = solve(op, b, {}, TimeGrid(0.0, 1.0, 1e-2), cfg);
  EXPECT_TRUE(traj.converged);
}

TEST(Solvers, InvalidInputs) {
  const LinearOperator op = operator_from_sparse(gen_diagonal(5));
  const TimeGrid grid(0.0, 1.0, 0.1);
  SolverConfig cfg;
  cfg.tol = 0.0;
  EXPECT_THROW(solve(op, Matrix::Ones(5, 1), {}, grid, cfg), DomainError);
  cfg = SolverConfig{};
  cfg.bdf_order = 4;
  EXPECT_THROW(solve(op, Matrix::Ones(5, 1), {}, grid, cfg), DomainError);
  EXPECT_THROW(solve(op, Matrix::Ones(4, 1), {}, grid, SolverConfig{}), DimensionError);
  EXPECT_THROW(parse_method("rk4"), DomainError);
  EXPECT_EQ(parse_method("eba_bdf"), Method::eba_bdf);
}
