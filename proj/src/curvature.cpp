#include <random>
#include <vector>

#include "timrp/solvers.hpp"

namespace timrp {

CurvatureEstimate smallest_curvature(const CostDerivatives& D, int max_steps, std::uint64_t seed) {
  const FixedRankPoint& X = D.point();
  const int M = X.dimension(), r = X.rank();
  const int dim = (2 * M - r) * r;
  const int steps = std::max(1, std::min(max_steps, dim));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  AmbientTriple start = AmbientTriple::zero_like(X);
  for (Matrix* m : {&start.U, &start.Sigma, &start.V})
    for (Eigen::Index k = 0; k < m->size(); ++k) m->data()[k] = gauss(rng);
  HorizontalTriple q = project_horizontal(X, project_tangent(X, start));
  q *= 1.0 / norm(X, q);

  // Lanczos with full reorthogonalization in the metric.
  std::vector<HorizontalTriple> basis;
  std::vector<double> alpha, beta;
  for (int k = 0; k < steps; ++k) {
    basis.push_back(q);
    HorizontalTriple w = D.hess_vec(q);
    alpha.push_back(metric(X, q, w));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) w -= metric(X, b, w) * b;
    const double nb = norm(X, w);
    if (k + 1 == steps || nb <= 1e-12 * std::max(1.0, std::abs(alpha.back()))) break;
    beta.push_back(nb);
    q = (1.0 / nb) * w;
  }

  const auto n = static_cast<Eigen::Index>(alpha.size());
  Matrix T = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    T(i, i) = alpha[static_cast<std::size_t>(i)];
    if (i + 1 < n) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(T);
  const Vector y = eig.eigenvectors().col(0);
  CurvatureEstimate out;
  out.lambda_min = eig.eigenvalues()(0);
  out.steps = static_cast<int>(n);
  out.direction = HorizontalTriple::zero_like(X);
  for (Eigen::Index i = 0; i < n; ++i) out.direction += y(i) * basis[static_cast<std::size_t>(i)];
  out.direction *= 1.0 / norm(X, out.direction);
  return out;
}

}  // namespace timrp
