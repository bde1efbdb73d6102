#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace timrp;
using namespace timrp::testing;

TEST(Cost, ZeroMatrixOnDiagonalMask) {
  const CompletionProblem p = single_stream_problem(direct_only(4));
  EXPECT_DOUBLE_EQ(cost(p, Matrix::Zero(4, 4)), 2.0);
  EXPECT_DOUBLE_EQ(residual(p, Matrix::Zero(4, 4)), 1.0);
  EXPECT_DOUBLE_EQ(cost(p, Matrix::Ones(4, 4)), 0.0);
}

TEST(Cost, ThreeUserCycleCompletion) {
  const CompletionProblem p = single_stream_problem(three_user_cycle());
  Matrix X(3, 3);
  X << 1, 0, 1, 1, 1, 0, 0, -1, 1;
  EXPECT_EQ(Eigen::FullPivLU<Matrix>(X).rank(), 2);
  EXPECT_DOUBLE_EQ(cost(p, X), 0.0);
  EXPECT_DOUBLE_EQ(residual(p, X), 0.0);
  EXPECT_LE(euclidean_gradient(p, X).norm(), 0.0);
  // The same completion as a rank-2 point.
  const FixedRankPoint Y = point_from_matrix(X, 2);
  EXPECT_LE(cost(p, Y), 1e-28);
}

TEST(Cost, OffMaskEntriesAreIgnored) {
  const CompletionProblem p = single_stream_problem(three_user_cycle());
  Matrix X = Matrix::Identity(3, 3);
  X(0, 2) = 7.0;  // receiver 0 hears only transmitters 0 and 1
  EXPECT_FALSE(p.observed(0, 2));
  EXPECT_DOUBLE_EQ(cost(p, X), 0.0);
  X(0, 1) = 3.0;
  EXPECT_DOUBLE_EQ(cost(p, X), 4.5);
  Matrix G = Matrix::Zero(3, 3);
  G(0, 1) = 3.0;
  EXPECT_EQ(euclidean_gradient(p, X), G);
}

TEST(Cost, ResidualIdentityAndFactoredAgreement) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const CompletionProblem p = single_stream_problem(random_topology(12, 30, static_cast<std::uint64_t>(trial)));
    const FixedRankPoint X = random_general_point(rng, 12, 1 + trial % 4);
    const ObjectiveValue v = evaluate(p, X);
    const double eps = residual(p, X);
    EXPECT_LE(std::abs(eps * eps * 12 - 2.0 * v.f), 1e-12 * 2.0 * v.f);
    EXPECT_DOUBLE_EQ(v.residual, eps);
    EXPECT_NEAR(cost(p, X), cost(p, embed(X)), 1e-12 * v.f);
    EXPECT_NEAR(residual_from_cost(v.f, 12), eps, 1e-14);
    const Matrix A = p.project(embed(X)) - Matrix::Identity(12, 12);
    EXPECT_LE((euclidean_gradient(p, X) - A).norm(), 1e-13 * A.norm());
  }
}

TEST(Cost, ExactlyQuadraticAlongAmbientLines) {
  std::mt19937_64 rng(4);
  const CompletionProblem p = single_stream_problem(random_topology(8, 20, 4));
  const Matrix X = gaussian(rng, 8, 8), D = gaussian(rng, 8, 8);
  const double f0 = cost(p, X), slope = frob_inner(euclidean_gradient(p, X), D), curv = p.project(D).squaredNorm();
  for (double a : {-2.0, 0.5, 3.0}) EXPECT_NEAR(cost(p, Matrix(X + a * D)), f0 + a * slope + 0.5 * a * a * curv, 1e-10 * f0);
}
