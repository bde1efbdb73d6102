#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace timrp;
using namespace timrp::testing;

namespace {

CompletionProblem problem20(std::uint64_t seed) { return single_stream_problem(random_topology(20, 60, seed)); }

double rel(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

TEST(Lyapunov, MatchesKroneckerSolve) {
  std::mt19937_64 rng(1);
  for (int r = 1; r <= 6; ++r) {
    const Matrix G = gaussian(rng, r, r);
    const Matrix P = G * G.transpose() + 0.1 * Matrix::Identity(r, r);
    const Matrix C = gaussian(rng, r, r);
    const Matrix B = solve_lyapunov_sym(P, C);
    const Matrix oracle = kron_lyapunov(P, C);
    EXPECT_LE((B - oracle).norm(), 1e-10 * oracle.norm()) << "r=" << r;
    EXPECT_LE((B - B.transpose()).norm(), 1e-12 * B.norm());
  }
}

TEST(Lyapunov, ClosedForms) {
  std::mt19937_64 rng(2);
  const Matrix C = sym(gaussian(rng, 4, 4));
  EXPECT_LE((solve_lyapunov_sym(Matrix::Identity(4, 4), C) - 0.5 * C).norm(), 1e-14);
  const Vector d = (Vector(4) << 1.0, 2.0, 5.0, 0.25).finished();
  const Matrix B = solve_lyapunov_sym(d.asDiagonal(), C);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(B(i, j), C(i, j) / (d(i) + d(j)), 1e-14);
}

TEST(CoupledSkew, MatchesDenseSkewBasisSolve) {
  std::mt19937_64 rng(3);
  for (int r = 1; r <= 5; ++r) {
    const FixedRankPoint X = random_general_point(rng, 8, r);
    const Matrix R1 = random_skew(rng, r), R2 = random_skew(rng, r);
    const SkewPair got = solve_coupled_skew(X, R1, R2);
    const SkewPair want = dense_coupled_skew(X.Sigma, R1, R2);
    const double scale = std::max(1.0, want.theta1.norm() + want.theta2.norm());
    EXPECT_LE((got.theta1 - want.theta1).norm() + (got.theta2 - want.theta2).norm(), 1e-10 * scale) << "r=" << r;
    auto [s1, s2] = coupled_skew_apply(X.Sigma, got.theta1, got.theta2);
    EXPECT_LE((s1 - R1).norm() + (s2 - R2).norm(), 1e-10 * (R1.norm() + R2.norm()));
  }
}

TEST(CoupledSkew, IdentitySigmaClosedForm) {
  std::mt19937_64 rng(4);
  FixedRankPoint X = random_point(6, 3, 4);
  X.Sigma = Matrix::Identity(3, 3);
  const Matrix R1 = random_skew(rng, 3), R2 = random_skew(rng, 3);
  const SkewPair t = solve_coupled_skew(X, R1, R2);
  // 2 T1 - T2 = R1, 2 T2 - T1 = R2.
  EXPECT_LE((t.theta1 - (2.0 * R1 + R2) / 3.0).norm(), 1e-14);
  EXPECT_LE((t.theta2 - (2.0 * R2 + R1) / 3.0).norm(), 1e-14);
}

TEST(Projections, TangentIsMetricOrthogonalAndIdempotent) {
  std::mt19937_64 rng(5);
  for (int r = 1; r <= 5; ++r) {
    const FixedRankPoint X = random_general_point(rng, 20, r);
    const AmbientTriple A = random_ambient(rng, X);
    const TangentTriple xi = project_tangent(X, A);
    EXPECT_LE(tangent_defect(X, xi), 1e-12 * A.frobenius_norm());
    EXPECT_LE((project_tangent(X, xi) - xi).frobenius_norm(), 1e-10 * xi.frobenius_norm());
    const TangentTriple zeta = random_tangent(rng, X);
    const AmbientTriple diff = A - AmbientTriple(xi);
    EXPECT_LE(std::abs(ambient_metric(X.Sigma, diff, zeta)), 1e-10 * A.frobenius_norm() * zeta.frobenius_norm());
  }
}

TEST(Projections, HorizontalKillsVerticalAndIsOrthogonalToIt) {
  std::mt19937_64 rng(6);
  for (int r = 1; r <= 5; ++r) {
    const FixedRankPoint X = random_general_point(rng, 20, r);
    const Matrix T1 = random_skew(rng, r), T2 = random_skew(rng, r);
    const TangentTriple v = vertical(X, T1, T2);
    EXPECT_LE(tangent_defect(X, v), 1e-12);
    EXPECT_LE(project_horizontal(X, v).frobenius_norm(), 1e-9 * std::max(1.0, v.frobenius_norm()));

    const HorizontalTriple h = random_horizontal(rng, X);
    EXPECT_LE((project_horizontal(X, h) - h).frobenius_norm(), 1e-10 * h.frobenius_norm());
    EXPECT_LE(std::abs(metric(X, h, v)), 1e-10 * h.frobenius_norm() * std::max(1.0, v.frobenius_norm()));
    // The removed part is vertical: it embeds to zero.
    const TangentTriple xi = random_tangent(rng, X);
    const Matrix gap = embed_tangent(X, xi) - embed_tangent(X, project_horizontal(X, xi));
    EXPECT_LE(gap.norm(), 1e-10 * embed_tangent(X, xi).norm());
  }
}

TEST(Invariance, RotationsPreserveMetricCostAndGradient) {
  std::mt19937_64 rng(7);
  const CompletionProblem p = problem20(7);
  for (int r = 1; r <= 5; ++r) {
    const FixedRankPoint X = random_general_point(rng, 20, r);
    const Matrix Qu = random_orthogonal(rng, r), Qv = random_orthogonal(rng, r);
    const FixedRankPoint Y = rotate(X, Qu, Qv);
    EXPECT_LE(rel(cost(p, X), cost(p, Y)), 1e-12);
    EXPECT_LE((embed(X) - embed(Y)).norm(), 1e-12 * embed(X).norm());

    const HorizontalTriple a = random_horizontal(rng, X), b = random_horizontal(rng, X);
    EXPECT_LE(rel(metric(X, a, b), metric(Y, rotate(a, Qu, Qv), rotate(b, Qu, Qv))), 1e-10);

    const HorizontalTriple gX = riemannian_gradient(X, p), gY = riemannian_gradient(Y, p);
    EXPECT_LE(rel(norm(X, gX), norm(Y, gY)), 1e-10);
    EXPECT_LE((rotate(gX, Qu, Qv) - gY).frobenius_norm(), 1e-10 * std::max(1.0, gX.frobenius_norm()));
  }
}

TEST(Gradient, MatchesEuclideanDirectionalDerivative) {
  std::mt19937_64 rng(8);
  const CompletionProblem p = problem20(8);
  for (int r = 1; r <= 5; ++r) {
    const FixedRankPoint X = random_general_point(rng, 20, r);
    const HorizontalTriple g = riemannian_gradient(X, p);
    EXPECT_LE((project_horizontal(X, g) - g).frobenius_norm(), 1e-10 * g.frobenius_norm());
    for (int k = 0; k < 3; ++k) {
      const TangentTriple xi = random_tangent(rng, X);
      const double euclid = frob_inner(euclidean_gradient(p, X), embed_tangent(X, xi));
      EXPECT_LE(rel(metric(X, g, xi), euclid), 1e-10);
    }
  }
}

TEST(Gradient, RetractionErrorIsSecondOrder) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const CompletionProblem p = problem20(100 + trial);
    const FixedRankPoint X = random_general_point(rng, 20, 1 + trial % 5);
    const TangentTriple xi = random_tangent(rng, X);
    EXPECT_GE(retraction_error_slope(p, X, xi), 1.9) << "trial " << trial;
  }
}

TEST(Christoffel, TorsionFreeAndMetricCompatible) {
  std::mt19937_64 rng(10);
  for (int r = 1; r <= 4; ++r) {
    const FixedRankPoint X = random_general_point(rng, 7, r);
    const TangentTriple a = random_tangent(rng, X), b = random_tangent(rng, X), c = random_tangent(rng, X);
    EXPECT_LE((christoffel(X, a, b) - christoffel(X, b, a)).frobenius_norm(),
              1e-12 * std::max(1.0, christoffel(X, a, b).frobenius_norm()));
    // d/dt g_{Sigma + t c_Sigma}(a, b) = g(Gamma(a, c), b) + g(a, Gamma(b, c)).
    const double h = 1e-5;
    const double lhs = (ambient_metric(X.Sigma + h * c.Sigma, a, b) - ambient_metric(X.Sigma - h * c.Sigma, a, b)) /
                       (2.0 * h);
    const double rhs = ambient_metric(X.Sigma, christoffel(X, a, c), b) + ambient_metric(X.Sigma, a, christoffel(X, b, c));
    EXPECT_LE(std::abs(lhs - rhs), 1e-7 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Hessian, SymmetricAndMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const CompletionProblem p = problem20(200 + trial);
    const FixedRankPoint X = random_general_point(rng, 20, 1 + trial % 5);
    const HorizontalTriple a = random_horizontal(rng, X), b = random_horizontal(rng, X);
    const double ab = metric(X, hess_vec(X, p, a), b), ba = metric(X, a, hess_vec(X, p, b));
    EXPECT_LE(std::abs(ab - ba), 1e-8 * std::max(std::abs(ab), std::abs(ba))) << "trial " << trial;
    EXPECT_LE(best_fd_hessian_error(p, X, a), 1e-4) << "trial " << trial;
  }
}

TEST(Hessian, PositiveSemidefiniteAtACompletion) {
  // Fully connected K = 3 at rank 3: the completion I is a strict minimizer.
  const CompletionProblem p = single_stream_problem(fully_connected(3));
  std::mt19937_64 rng(12);
  const Matrix Q = random_orthogonal(rng, 3);
  const FixedRankPoint X{Q, Matrix::Identity(3, 3), Q};
  EXPECT_LE(riemannian_gradient(X, p).frobenius_norm(), 1e-14);
  for (int k = 0; k < 5; ++k) {
    const HorizontalTriple a = random_horizontal(rng, X);
    EXPECT_GE(metric(X, a, hess_vec(X, p, a)), -1e-12);
  }
}

TEST(Retraction, ReturnsValidPoints) {
  std::mt19937_64 rng(13);
  for (int r = 1; r <= 5; ++r) {
    const FixedRankPoint X = random_general_point(rng, 20, r);
    const TangentTriple xi = random_tangent(rng, X);
    const FixedRankPoint Y = retract(X, xi, 0.3);
    EXPECT_LE(stiefel_defect(Y), 1e-12);
    // qf convention: U_new^T (U + t xi_U) is upper triangular with positive diagonal.
    const Matrix R = Y.U.transpose() * (X.U + 0.3 * xi.U);
    for (int i = 0; i < r; ++i) {
      EXPECT_GT(R(i, i), 0.0);
      for (int j = 0; j < i; ++j) EXPECT_NEAR(R(i, j), 0.0, 1e-12);
    }
    EXPECT_LE((Y.Sigma - (X.Sigma + 0.3 * xi.Sigma)).norm(), 1e-14 * Y.Sigma.norm());
    const FixedRankPoint Z = retract(X, TangentTriple::zero_like(X));
    EXPECT_LE((Z.U - X.U).norm() + (Z.V - X.V).norm(), 1e-12);
  }
}

TEST(Retraction, RepairsDegenerateSigma) {
  FixedRankPoint X = random_point(6, 2, 1);
  X.Sigma = Matrix::Identity(2, 2);
  TangentTriple xi = TangentTriple::zero_like(X);
  xi.Sigma(1, 1) = -1.0;  // Sigma + xi_Sigma is singular
  const FixedRankPoint Y = retract(X, xi);
  EXPECT_NO_THROW(factor_sigma(Y.Sigma));
  EXPECT_LE(stiefel_defect(Y), 1e-12);
}

TEST(Transport, LandsInHorizontalSpace) {
  std::mt19937_64 rng(14);
  const FixedRankPoint X = random_general_point(rng, 12, 3);
  const HorizontalTriple xi = random_horizontal(rng, X);
  const FixedRankPoint Y = retract(X, xi, 0.5);
  const HorizontalTriple t = transport(Y, xi);
  EXPECT_LE(tangent_defect(Y, t), 1e-12 * xi.frobenius_norm());
  const TangentTriple v = vertical(Y, random_skew(rng, 3), random_skew(rng, 3));
  EXPECT_LE(std::abs(metric(Y, t, v)), 1e-10 * t.frobenius_norm() * v.frobenius_norm());
}

TEST(RandomPoint, WellConditionedAndDeterministic) {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const FixedRankPoint X = random_point(20, 1 + static_cast<int>(s % 5), s);
    const SigmaFactors f = factor_sigma(X.Sigma);
    ASSERT_LE(f.s.maxCoeff() / f.s.minCoeff(), 1e3);
    ASSERT_LE(stiefel_defect(X), 1e-12);
  }
  const FixedRankPoint a = random_point(10, 3, 42), b = random_point(10, 3, 42);
  EXPECT_EQ(a.U, b.U);
  EXPECT_EQ(a.Sigma, b.Sigma);
  EXPECT_EQ(a.V, b.V);
  EXPECT_THROW(random_point(4, 5, 0), Error);
}

TEST(Embed, SmallExamples) {
  const FixedRankPoint X{Matrix::Identity(3, 1), Matrix::Constant(1, 1, 2.0), Matrix::Ones(3, 1) / std::sqrt(3.0)};
  Matrix want = Matrix::Zero(3, 3);
  want.row(0).setConstant(2.0 / std::sqrt(3.0));
  EXPECT_LE((embed(X) - want).norm(), 1e-15);

  std::mt19937_64 rng(15);
  const FixedRankPoint Y = random_general_point(rng, 9, 3);
  const TangentTriple xi = random_tangent(rng, Y);
  const double h = 1e-6;
  const FixedRankPoint Yp{Y.U + h * xi.U, Y.Sigma + h * xi.Sigma, Y.V + h * xi.V};
  const FixedRankPoint Ym{Y.U - h * xi.U, Y.Sigma - h * xi.Sigma, Y.V - h * xi.V};
  const Matrix fd = (embed(Yp) - embed(Ym)) / (2.0 * h);
  EXPECT_LE((fd - embed_tangent(Y, xi)).norm(), 1e-8 * fd.norm());
}

TEST(PointFromMatrix, RecoversRankRMatrices) {
  std::mt19937_64 rng(16);
  const Matrix Y = gaussian(rng, 10, 3) * gaussian(rng, 3, 10);
  const FixedRankPoint X = point_from_matrix(Y, 3);
  EXPECT_LE((embed(X) - Y).norm(), 1e-12 * Y.norm());
  EXPECT_LE(stiefel_defect(X), 1e-12);
  // Rank deficiency is lifted to the floor, never to zero.
  const FixedRankPoint Z = point_from_matrix(Y, 5);
  EXPECT_NO_THROW(factor_sigma(Z.Sigma));
  EXPECT_THROW(factor_sigma(Matrix::Zero(2, 2)), DegeneracyError);
}
