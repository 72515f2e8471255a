#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "generators.hpp"
#include "l1reg/errors.hpp"
#include "l1reg/solver.hpp"

using namespace l1reg;
using l1reg::testing::for_all;
using l1reg::testing::Gen;
using l1reg::testing::reference_matrix;

namespace {

double soft(double v, double lambda) { return std::copysign(std::max(std::abs(v) - lambda, 0.0), v); }

TikhonovProblem make_problem(const OperatorSpec& spec, const Vector& y, double alpha, double p = 2.0,
                             double eta = 0.0, NormKind image_norm = NormKind::L2) {
  return TikhonovProblem(assemble(spec, static_cast<std::size_t>(y.size()), image_norm), TruncatedSequence(y), p,
                         alpha, eta);
}

// Violation of the subgradient conditions, recomputed from the dense reference matrix.
double certificate_violation(const OperatorSpec& spec, const Vector& y, double alpha, const Vector& x) {
  const Eigen::MatrixXd a = reference_matrix(spec, static_cast<std::size_t>(y.size()));
  const Vector g = a.transpose() * (a * x - y);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (x(k) == 0.0)
      worst = std::max(worst, std::abs(g(k)) - alpha);
    else
      worst = std::max(worst, std::abs(g(k) + alpha * (x(k) > 0 ? 1.0 : -1.0)));
  }
  return worst;
}

}  // namespace

TEST(Solve, IdentitySoftThreshold) {
  const auto r = solve_tikhonov(make_problem(OperatorSpec::identity(), (Vector(2) << 2.0, 0.1).finished(), 1.0));
  EXPECT_TRUE(r.diagnostics.converged);
  EXPECT_NEAR(r.x.coord(1), 1.0, 1e-9);
  EXPECT_EQ(r.x.coord(2), 0.0);
}

TEST(Solve, DiagonalClosedForm) {
  // Separable: argmin 1/2 (s x - y)^2 + alpha |x| = S_alpha(s y) / s^2.
  for_all(10, 60, [](Gen& g) {
    const std::size_t n = g.index(1, 40);
    const OperatorSpec spec = OperatorSpec::diagonal_power(g.uniform(0.5, 2.0), g.uniform(0.0, 1.0));
    const Vector y = g.gaussian(n);
    const double alpha = g.log_uniform(1e-3, 1.0);
    const auto r = solve_tikhonov(make_problem(spec, y, alpha));
    ASSERT_TRUE(r.diagnostics.converged);
    const Vector s = reference_matrix(spec, n).diagonal();
    for (std::size_t k = 0; k < n; ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      EXPECT_NEAR(r.x.values()(i), soft(s(i) * y(i), alpha) / (s(i) * s(i)), 1e-7);
    }
  });
}

TEST(Solve, ElasticNetIdentityClosedForm) {
  // 1/2 (x - y)^2 + alpha (x^2 / 2 + eta |x|) is minimized by S_{alpha eta}(y) / (1 + alpha).
  for_all(11, 40, [](Gen& g) {
    const std::size_t n = g.index(1, 30);
    const Vector y = g.gaussian(n, 2.0);
    const double alpha = g.log_uniform(1e-2, 3.0), eta = g.log_uniform(1e-2, 2.0);
    const auto r = solve_tikhonov(make_problem(OperatorSpec::identity(), y, alpha, 2.0, eta));
    ASSERT_TRUE(r.diagnostics.converged);
    for (Eigen::Index i = 0; i < y.size(); ++i)
      EXPECT_NEAR(r.x.values()(i), soft(y(i), alpha * eta) / (1.0 + alpha), 1e-9);
  });
}

TEST(Solve, LargeAlphaGivesZero) {
  for_all(12, 40, [](Gen& g) {
    const OperatorSpec spec = g.op_spec();
    const std::size_t n = g.index(1, 50);
    const Vector y = g.gaussian(n);
    const Vector aty = reference_matrix(spec, n).transpose() * y;
    const double alpha = aty.lpNorm<Eigen::Infinity>() * g.uniform(1.0, 3.0);
    const auto r = solve_tikhonov(make_problem(spec, y, alpha));
    EXPECT_EQ(support_size(r.x.values()), 0u) << spec.kind_name();
  });
}

TEST(Solve, NearNoiselessBidiagonal) {
  const OperatorSpec spec = OperatorSpec::bidiagonal_sum();
  const Vector x_true = (Vector(5) << 0.0, 1.5, 0.0, 0.0, -0.7).finished();
  const Vector y = reference_matrix(spec, 5) * x_true;
  const auto r = solve_tikhonov(make_problem(spec, y, 1e-10));
  ASSERT_TRUE(r.diagnostics.converged);
  EXPECT_LT((r.x.values() - x_true).lpNorm<Eigen::Infinity>(), 1e-4);
}

TEST(Solve, OptimalityCertificate) {
  for_all(13, 150, [](Gen& g) {
    const OperatorSpec spec = g.op_spec();
    const std::size_t n = g.index(1, 80);
    const Vector y = g.gaussian(n, g.log_uniform(0.1, 10.0));
    const double alpha = g.log_uniform(1e-4, 1.0);
    const auto problem = make_problem(spec, y, alpha);
    const auto r = solve_tikhonov(problem);
    ASSERT_TRUE(r.diagnostics.converged) << spec.kind_name() << " N=" << n;
    EXPECT_LE(certificate_violation(spec, y, alpha, r.x.values()), 1e-7) << spec.kind_name() << " N=" << n;
    EXPECT_LE(optimality_violation(problem, r.x.values()), 1e-7);
  });
}

TEST(Solve, ObjectiveBelowZeroAndLeastSquares) {
  for_all(14, 80, [](Gen& g) {
    const OperatorSpec spec = g.op_spec();
    const std::size_t n = g.index(1, 40);
    const Vector y = g.gaussian(n);
    const auto problem = make_problem(spec, y, g.log_uniform(1e-3, 1.0));
    const auto r = solve_tikhonov(problem);
    const double f = objective_value(problem, r.x);
    const Vector ls = reference_matrix(spec, n).colPivHouseholderQr().solve(y);
    EXPECT_LE(f, objective_value(problem, Vector(Vector::Zero(y.size()))) + 1e-12);
    EXPECT_LE(f, objective_value(problem, ls) + 1e-12);
  });
}

TEST(Solve, SupportShrinksWithAlphaForSeparableOperators) {
  for_all(15, 40, [](Gen& g) {
    const OperatorSpec spec =
        g.coin() ? OperatorSpec::identity() : OperatorSpec::diagonal_power(g.uniform(0.5, 2.0), g.uniform(0.0, 1.0));
    const std::size_t n = g.index(2, 60);
    const Vector y = g.gaussian(n);
    const double top = (reference_matrix(spec, n).transpose() * y).lpNorm<Eigen::Infinity>();
    std::size_t prev = n + 1;
    for (double alpha = 1e-3 * top; alpha <= top; alpha *= 1.5) {
      const std::size_t s = support_size(solve_tikhonov(make_problem(spec, y, alpha)).x.values());
      EXPECT_LE(s, prev) << "alpha " << alpha;
      prev = s;
    }
    EXPECT_EQ(support_size(solve_tikhonov(make_problem(spec, y, top * 1.0001)).x.values()), 0u);
  });
}

TEST(Solve, SupportEndpointsForBidiagonal) {
  for_all(16, 20, [](Gen& g) {
    const OperatorSpec spec = OperatorSpec::bidiagonal_sum();
    const std::size_t n = g.index(5, 60);
    const Vector y = g.gaussian(n);
    const double top = (reference_matrix(spec, n).transpose() * y).lpNorm<Eigen::Infinity>();
    const std::size_t small = support_size(solve_tikhonov(make_problem(spec, y, 1e-3 * top)).x.values());
    const std::size_t mid = support_size(solve_tikhonov(make_problem(spec, y, 0.3 * top)).x.values());
    EXPECT_LE(mid, small);
    EXPECT_EQ(support_size(solve_tikhonov(make_problem(spec, y, top * 1.0001)).x.values()), 0u);
  });
}

TEST(Solve, PowerMisfitAboveTwo) {
  for_all(17, 30, [](Gen& g) {
    const OperatorSpec spec = g.op_spec();
    const std::size_t n = g.index(1, 30);
    const Vector y = g.gaussian(n);
    const double p = g.uniform(2.0, 4.0);
    const auto problem = make_problem(spec, y, g.log_uniform(1e-3, 0.5), p);
    const auto r = solve_tikhonov(problem);
    ASSERT_TRUE(r.diagnostics.converged) << "p=" << p;
    EXPECT_LE(optimality_violation(problem, r.x.values()), 1e-7) << "p=" << p;
    // No random nearby point does better.
    const double f = objective_value(problem, r.x);
    for (int t = 0; t < 20; ++t) {
      const Vector z = r.x.values() + g.gaussian(n, 1e-3);
      EXPECT_LE(f, objective_value(problem, z) + 1e-12);
    }
  });
}

TEST(Solve, WarmStartReachesSameMinimizer) {
  Gen g(18);
  const OperatorSpec spec = OperatorSpec::bidiagonal_sum();
  const Vector y = g.gaussian(40);
  const auto problem = make_problem(spec, y, 0.05);
  const auto cold = solve_tikhonov(problem);
  SolveOptions opts;
  opts.warm_start = g.gaussian(40);
  const auto warm = solve_tikhonov(problem, opts);
  EXPECT_LT((cold.x.values() - warm.x.values()).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(Solve, IterationCapReportsNonConvergence) {
  Gen g(19);
  const auto problem = make_problem(OperatorSpec::bidiagonal_sum(), g.gaussian(50), 1e-3);
  SolveOptions opts;
  opts.max_iter = 1;
  const auto r = solve_tikhonov(problem, opts);
  EXPECT_FALSE(r.diagnostics.converged);
  EXPECT_EQ(r.diagnostics.iterations, 1u);
  EXPECT_LE(r.diagnostics.objective, objective_value(problem, Vector(Vector::Zero(50))));
}

TEST(Solve, CheckpointsNonincreasing) {
  Gen g(20);
  const auto problem = make_problem(OperatorSpec::bidiagonal_sum(), g.gaussian(300), 1e-4);
  SolveOptions opts;
  opts.checkpoint_every = 10;
  const auto r = solve_tikhonov(problem, opts);
  ASSERT_GE(r.diagnostics.checkpoints.size(), 2u);
  for (std::size_t i = 1; i < r.diagnostics.checkpoints.size(); ++i)
    EXPECT_LE(r.diagnostics.checkpoints[i], r.diagnostics.checkpoints[i - 1]);
}

TEST(Solve, Deterministic) {
  Gen g(21);
  const auto problem = make_problem(OperatorSpec::first_row_summation(), g.gaussian(70), 0.01);
  EXPECT_EQ(solve_tikhonov(problem).x.values(), solve_tikhonov(problem).x.values());
}

TEST(Problem, RejectsInvalidSetups) {
  const Vector y = Vector::Ones(3);
  EXPECT_THROW(make_problem(OperatorSpec::identity(), y, 0.0), InvalidArgument);
  EXPECT_THROW(make_problem(OperatorSpec::identity(), y, 1.0, 0.5), InvalidArgument);
  EXPECT_THROW(make_problem(OperatorSpec::identity(), y, 1.0, 2.0, -1.0), InvalidArgument);
  EXPECT_THROW(make_problem(OperatorSpec::bidiagonal_sum(), y, 0.5, 1.0, 0.0, NormKind::L1), InvalidArgument);
  EXPECT_THROW(make_problem(OperatorSpec::identity(), y, 0.5, 1.0, 0.0, NormKind::L2), InvalidArgument);
  EXPECT_THROW(TikhonovProblem(assemble(OperatorSpec::identity(), 4), TruncatedSequence(y), 2.0, 1.0),
               DimensionMismatch);
  EXPECT_THROW(solve_tikhonov(make_problem(OperatorSpec::identity(), y, 1.0, 1.5)), InvalidArgument);
  EXPECT_THROW(solve_tikhonov(make_problem(OperatorSpec::identity(), y, 1.0, 2.0, 0.0, NormKind::L1)),
               InvalidArgument);
}

TEST(IdentityP1, Examples) {
  const TruncatedSequence y{1.0, -2.0};
  EXPECT_EQ(solve_identity_p1(y, 0.5).values(), y.values());
  EXPECT_EQ(solve_identity_p1(y, 2.0).values(), Vector::Zero(2));
  EXPECT_EQ(solve_identity_p1(TruncatedSequence::zeros(3), 0.3).values(), Vector::Zero(3));
  EXPECT_THROW(solve_identity_p1(y, 1.0), InvalidArgument);
  EXPECT_THROW(solve_identity_p1(y, 0.0), InvalidArgument);
}

TEST(IdentityP1, OutputIsDataOrZero) {
  for_all(22, 100, [](Gen& g) {
    const std::size_t n = g.index(1, 20);
    const TruncatedSequence y(g.gaussian(n));
    double alpha = g.log_uniform(1e-2, 1e2);
    if (alpha == 1.0) alpha = 2.0;
    const auto x = solve_identity_p1(y, alpha);
    EXPECT_TRUE(x.values() == y.values() || x.values() == Vector::Zero(static_cast<Eigen::Index>(n)));
    // It beats every point of a coarse coordinate scan.
    const auto problem = make_problem(OperatorSpec::identity(), y.values(), alpha, 1.0, 0.0, NormKind::L1);
    const double f = objective_value(problem, x);
    for (int t = 0; t < 20; ++t) EXPECT_LE(f, objective_value(problem, Vector(g.gaussian(n))) + 1e-12);
    EXPECT_EQ(solve_tikhonov(problem).x.values(), x.values());
  });
}

TEST(Oracle, Examples) {
  const auto one = brute_force_oracle(make_problem(OperatorSpec::identity(), Vector::Constant(1, 2.0), 1.0), 3.0, 301);
  EXPECT_NEAR(one.coord(1), 1.0, 1e-12);
  const auto zero = brute_force_oracle(make_problem(OperatorSpec::diagonal_values({1.0, 1.0}), Vector::Zero(2), 1.0),
                                       3.0, 101);
  EXPECT_EQ(zero.values(), Vector::Zero(2));
}

TEST(Oracle, AgreesWithSolverOnSmallBidiagonal) {
  for_all(23, 30, [](Gen& g) {
    const auto problem = make_problem(OperatorSpec::bidiagonal_sum(), g.gaussian(2), 0.1);
    const auto oracle = brute_force_oracle(problem, 5.0, 201);
    const auto solved = solve_tikhonov(problem);
    EXPECT_LE((oracle.values() - solved.x.values()).lpNorm<Eigen::Infinity>(), 1e-6);
  });
}

TEST(Oracle, RejectsLargeProblems) {
  EXPECT_THROW(brute_force_oracle(make_problem(OperatorSpec::identity(), Vector::Ones(4), 1.0), 1.0, 11),
               InvalidArgument);
  EXPECT_THROW(brute_force_oracle(make_problem(OperatorSpec::identity(), Vector::Ones(2), 1.0), 1.0, 402),
               InvalidArgument);
}

TEST(Objective, Examples) {
  const Vector y = (Vector(2) << 1.0, 0.0).finished();
  const auto problem = make_problem(OperatorSpec::identity(), y, 1.0);
  EXPECT_DOUBLE_EQ(objective_value(problem, y), 1.0);
  EXPECT_DOUBLE_EQ(objective_value(problem, Vector(Vector::Zero(2))), 0.5);
  const auto p3 = make_problem(OperatorSpec::identity(), (Vector(2) << 3.0, 4.0).finished(), 0.7, 3.0);
  EXPECT_NEAR(objective_value(p3, Vector(Vector::Zero(2))), 125.0 / 3.0, 1e-12);
  EXPECT_NEAR(objective_value(p3, p3.data().values()), 0.7 * 7.0, 1e-12);
  EXPECT_THROW(objective_value(problem, Vector(Vector::Zero(3))), DimensionMismatch);
}
