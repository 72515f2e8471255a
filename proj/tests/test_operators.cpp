#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "generators.hpp"
#include "l1reg/errors.hpp"
#include "l1reg/operators.hpp"

using namespace l1reg;
using l1reg::testing::for_all;
using l1reg::testing::Gen;
using l1reg::testing::reference_matrix;

namespace {

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
}

}  // namespace

TEST(Assemble, BidiagonalRows) {
  const auto op = assemble(OperatorSpec::bidiagonal_sum(), 3);
  Eigen::Matrix3d expected;
  expected << 1, 1, 0, 0, 1, 1, 0, 0, 1;
  EXPECT_EQ(op.dense(), expected);
}

TEST(Assemble, IdentityAndDiagonal) {
  EXPECT_EQ(assemble(OperatorSpec::identity(), 2).dense(), Eigen::Matrix2d::Identity());
  const auto d = assemble(OperatorSpec::diagonal_power(1.0, 0.5), 2).dense();
  EXPECT_EQ(d(0, 0), 1.0);
  EXPECT_NEAR(d(1, 1), 1.0 / std::sqrt(2.0), 2e-16);
  EXPECT_EQ(d(0, 1), 0.0);
  EXPECT_EQ(d(1, 0), 0.0);
}

TEST(Assemble, FirstRowSummation) {
  const auto m = assemble(OperatorSpec::first_row_summation(), 4).dense();
  Eigen::Matrix4d expected;
  expected << 1, 1, 1, 1, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_EQ(m, expected);
}

TEST(Assemble, MatchesReferenceMatrices) {
  for_all(3, 100, [](Gen& g) {
    const OperatorSpec spec = g.op_spec();
    const std::size_t n = g.index(1, 60);
    EXPECT_EQ(assemble(spec, n).dense(), reference_matrix(spec, n)) << spec.kind_name();
  });
}

TEST(Assemble, RejectsInvalidSpecs) {
  EXPECT_THROW(OperatorSpec::embedding(0.5), InvalidArgument);
  EXPECT_THROW(OperatorSpec::embedding(INFINITY), InvalidArgument);
  EXPECT_THROW(OperatorSpec::diagonal_power(0.0, 0.5), InvalidArgument);
  EXPECT_THROW(OperatorSpec::diagonal_values({1.0, 0.0}), InvalidArgument);
  EXPECT_THROW(OperatorSpec::diagonal_values({1.0, -2.0}), InvalidArgument);
  EXPECT_THROW(assemble(OperatorSpec::identity(), 0), InvalidArgument);
  EXPECT_THROW(assemble(OperatorSpec::diagonal_values({1.0, 2.0}), 3), InvalidArgument);
}

TEST(Apply, BidiagonalExamples) {
  const auto op = assemble(OperatorSpec::bidiagonal_sum(), 3);
  EXPECT_EQ(apply(op, TruncatedSequence{1, 0, 0}).values(), (Vector(3) << 1, 0, 0).finished());
  EXPECT_EQ(apply(op, TruncatedSequence{0, 1, 0}).values(), (Vector(3) << 1, 1, 0).finished());
  EXPECT_EQ(apply_adjoint(op, TruncatedSequence{1, 0, 0}).values(), (Vector(3) << 1, 1, 0).finished());
}

TEST(Apply, IdentityAndDiagonalAdjoint) {
  for_all(4, 50, [](Gen& g) {
    const std::size_t n = g.index(1, 30);
    const TruncatedSequence x(g.gaussian(n));
    const auto id = assemble(OperatorSpec::identity(), n);
    EXPECT_EQ(apply(id, x).values(), x.values());
    EXPECT_EQ(apply_adjoint(id, x).values(), x.values());
    const auto d = assemble(OperatorSpec::diagonal_power(2.0, 0.7), n);
    const Vector expected = x.values().cwiseProduct(reference_matrix(d.spec(), n).diagonal());
    EXPECT_TRUE(apply_adjoint(d, x).values().isApprox(expected, 1e-15));
  });
}

TEST(Apply, DimensionMismatch) {
  const auto op = assemble(OperatorSpec::bidiagonal_sum(), 3);
  EXPECT_THROW(apply(op, TruncatedSequence{1, 2}), DimensionMismatch);
  EXPECT_THROW(apply_adjoint(op, TruncatedSequence{1, 2, 3, 4}), DimensionMismatch);
}

TEST(Apply, AdjointConsistency) {
  for_all(5, 200, [](Gen& g) {
    const OperatorSpec spec = g.op_spec();
    const std::size_t n = g.index(1, 500);
    const auto op = assemble(spec, n);
    const Vector x = g.gaussian(n), y = g.gaussian(n);
    const double lhs = op.apply(x).dot(y), rhs = x.dot(op.apply_adjoint(y));
    const double scale = (reference_matrix(spec, n) * x).norm() * y.norm() + x.norm() * y.norm();
    EXPECT_NEAR(lhs, rhs, 1e-12 * scale) << spec.kind_name() << " N=" << n;
  });
}

TEST(Apply, BidiagonalBoundedInL1) {
  for_all(6, 300, [](Gen& g) {
    const std::size_t n = g.index(1, 200);
    const Vector x = g.coin() ? g.gaussian(n) : g.sparse(n, 0.1);
    const auto op = assemble(OperatorSpec::bidiagonal_sum(), n);
    EXPECT_LE(op.apply(x).lpNorm<1>(), 2.0 * x.lpNorm<1>() * (1 + 1e-15));
  });
}

TEST(Apply, BidiagonalBackSubstitutionForE2) {
  // A x = e^(2) is solvable at every truncation: x = (-1, 1, 0, ..., 0).
  for (std::size_t n : {2u, 3u, 10u, 500u}) {
    const auto op = assemble(OperatorSpec::bidiagonal_sum(), n);
    Vector x = Vector::Zero(static_cast<Eigen::Index>(n));
    const Vector e2 = TruncatedSequence::unit(n, 2).values();
    for (Eigen::Index k = x.size() - 1; k >= 0; --k) x(k) = e2(k) - (k + 1 < x.size() ? x(k + 1) : 0.0);
    Vector expected = Vector::Zero(x.size());
    expected(0) = -1.0;
    expected(1) = 1.0;
    EXPECT_EQ(x, expected);
    EXPECT_EQ(op.apply(x), e2);
  }
}

TEST(OperatorNorm, Examples) {
  const double tol = 1e-8;
  const double id = operator_norm_estimate(assemble(OperatorSpec::identity(), 10), tol);
  EXPECT_NEAR(id, 1.0, 2 * tol);
  const double d = operator_norm_estimate(assemble(OperatorSpec::diagonal_values({3.0, 1.0}), 2), tol);
  EXPECT_NEAR(d, 3.0, 6 * tol);
  const double b = operator_norm_estimate(assemble(OperatorSpec::bidiagonal_sum(), 50), tol);
  EXPECT_GT(b, 1.0);
  EXPECT_LE(b, 2.0);
}

TEST(OperatorNorm, AgreesWithDenseSvd) {
  for_all(7, 40, [](Gen& g) {
    const OperatorSpec spec = g.op_spec();
    const std::size_t n = g.index(1, 120);
    const double tol = g.coin() ? 1e-9 : 1e-6;
    const double exact = singular_values(reference_matrix(spec, n))(0);
    const double est = operator_norm_estimate(assemble(spec, n), tol);
    EXPECT_GE(est, exact * (1 - tol)) << spec.kind_name() << " N=" << n;
    EXPECT_LE(est, exact * (1 + 2 * tol)) << spec.kind_name() << " N=" << n;
  });
}

TEST(OperatorNorm, LargeBidiagonal) {
  // sigma_max = 2 cos(pi / (2N + 1)); the top of the spectrum is tightly clustered.
  for (auto [n, tol] : {std::pair<std::size_t, double>{400, 1e-6}, {1000, 1e-4}, {2000, 1e-4}, {2000, 1e-3}}) {
    const double exact = 2.0 * std::cos(M_PI / (2.0 * static_cast<double>(n) + 1.0));
    const double est = operator_norm_estimate(assemble(OperatorSpec::bidiagonal_sum(), n), tol);
    EXPECT_GE(est, exact * (1 - tol)) << n;
    EXPECT_LE(est, exact * (1 + 2 * tol)) << n;
  }
}

TEST(OperatorNorm, RejectsBadTolerance) {
  EXPECT_THROW(operator_norm_estimate(assemble(OperatorSpec::identity(), 3), 0.0), InvalidArgument);
}

TEST(SigmaMin, AgreesWithJacobiSvd) {
  for_all(8, 40, [](Gen& g) {
    const OperatorSpec spec = g.op_spec();
    const std::size_t n = g.index(1, 150);
    const auto sv = singular_values(reference_matrix(spec, n));
    const double s = sigma_min(assemble(spec, n));
    EXPECT_GT(s, 0.0);
    EXPECT_NEAR(s, sv(sv.size() - 1), 1e-12 * sv(0)) << spec.kind_name() << " N=" << n;
  });
}

TEST(SigmaMin, RejectsLargeTruncations) {
  EXPECT_THROW(sigma_min(assemble(OperatorSpec::identity(), kMaxDenseSvd + 1)), InvalidArgument);
}

TEST(Conditioning, Identity) {
  const auto r = conditioning_scan(OperatorSpec::identity(), {10, 100});
  EXPECT_NEAR(r.sigma_min[0], 1.0, 1e-14);
  EXPECT_NEAR(r.sigma_min[1], 1.0, 1e-14);
  EXPECT_EQ(r.verdict, ConditioningVerdict::Stable);
}

TEST(Conditioning, BidiagonalDegenerates) {
  const auto r = conditioning_scan(OperatorSpec::bidiagonal_sum(), {10, 100, 1000});
  EXPECT_GT(r.sigma_min[0], r.sigma_min[1]);
  EXPECT_GT(r.sigma_min[1], r.sigma_min[2]);
  EXPECT_EQ(r.verdict, ConditioningVerdict::Degenerating);
  // 1/sigma_min grows roughly like N.
  EXPECT_GT(r.growth_exponent, 0.8);
  EXPECT_LT(r.growth_exponent, 1.2);
}

TEST(Conditioning, DiagonalInverseSqrt) {
  const auto r = conditioning_scan(OperatorSpec::diagonal_power(1.0, 0.5), {10, 1000});
  EXPECT_NEAR(r.sigma_min[0], 1.0 / std::sqrt(10.0), 1e-14);
  EXPECT_NEAR(r.sigma_min[1], 1.0 / std::sqrt(1000.0), 1e-14);
  EXPECT_EQ(r.verdict, ConditioningVerdict::Degenerating);
  EXPECT_NEAR(r.growth_exponent, 0.5, 1e-10);
}

TEST(Conditioning, RejectsBadGrids) {
  EXPECT_THROW(conditioning_scan(OperatorSpec::identity(), {}), InvalidArgument);
  EXPECT_THROW(conditioning_scan(OperatorSpec::identity(), {10, 5}), InvalidArgument);
}

TEST(WeakStar, HarmonicProbeDecays) {
  const TruncatedSequence xi{1.0, 0.5, 1.0 / 3.0, 0.25};
  const auto v = weak_star_diagnostic(OperatorSpec::bidiagonal_sum(), 4, xi);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_NEAR(v[0], 1.0, 1e-15);
  EXPECT_NEAR(v[1], 1.5, 1e-15);
  EXPECT_NEAR(v[2], 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(v[3], 7.0 / 12.0, 1e-15);
}

TEST(WeakStar, ConstantProbeDoesNotDecay) {
  const auto v = weak_star_diagnostic(OperatorSpec::bidiagonal_sum(), 4, ConstantOneProbe{});
  EXPECT_EQ(v, (std::vector<double>{1, 2, 2, 2}));
}

TEST(WeakStar, FirstRowSummationStaysAtOne) {
  const auto v = weak_star_diagnostic(OperatorSpec::first_row_summation(), 3, TruncatedSequence::unit(3, 1));
  EXPECT_EQ(v, (std::vector<double>{1, 1, 1}));
}

TEST(WeakStar, ShortProbeRejected) {
  EXPECT_THROW(weak_star_diagnostic(OperatorSpec::identity(), 4, TruncatedSequence{1.0, 2.0}), DimensionMismatch);
}
