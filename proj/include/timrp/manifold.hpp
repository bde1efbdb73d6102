#pragma once

// Quotient geometry of rank-r M x M matrices X = U Sigma V^T, with
// (U, Sigma, V) in St(r,M) x GL(r) x St(r,M) modulo the action
// (U, Sigma, V) -> (U Qu, Qu^T Sigma Qv, V Qv) of O(r) x O(r).
//
// The metric weights the U and V blocks by Sigma Sigma^T and Sigma^T Sigma:
//   g(xi, zeta) = <xi_U, zeta_U Sigma Sigma^T> + <xi_S, zeta_S> + <xi_V, zeta_V Sigma^T Sigma>.

#include <cstdint>
#include <type_traits>
#include <utility>

#include "timrp/common.hpp"

namespace timrp {

class CompletionProblem;

struct FixedRankPoint {
  Matrix U;      // M x r, orthonormal columns
  Matrix Sigma;  // r x r, invertible
  Matrix V;      // M x r, orthonormal columns

  int dimension() const { return static_cast<int>(U.rows()); }
  int rank() const { return static_cast<int>(U.cols()); }
};

namespace detail {
struct AmbientTag {};
struct TangentTag : AmbientTag {};
struct HorizontalTag : TangentTag {};
}  // namespace detail

/// Matrix triple (xi_U, xi_Sigma, xi_V). The tag records which subspace the
/// triple is known to lie in; widening conversions (horizontal -> tangent ->
/// ambient) are implicit, narrowing requires a projection.
template <class Tag>
struct Triple {
  Matrix U;
  Matrix Sigma;
  Matrix V;

  Triple() = default;
  Triple(Matrix u, Matrix s, Matrix v) : U(std::move(u)), Sigma(std::move(s)), V(std::move(v)) {}
  template <class Other>
    requires std::is_base_of_v<Tag, Other>
  Triple(const Triple<Other>& o) : U(o.U), Sigma(o.Sigma), V(o.V) {}

  static Triple zero(int dimension, int rank) {
    return {Matrix::Zero(dimension, rank), Matrix::Zero(rank, rank), Matrix::Zero(dimension, rank)};
  }
  static Triple zero_like(const FixedRankPoint& X) { return zero(X.dimension(), X.rank()); }

  Triple& operator+=(const Triple& o) {
    U += o.U;
    Sigma += o.Sigma;
    V += o.V;
    return *this;
  }
  Triple& operator-=(const Triple& o) {
    U -= o.U;
    Sigma -= o.Sigma;
    V -= o.V;
    return *this;
  }
  Triple& operator*=(double a) {
    U *= a;
    Sigma *= a;
    V *= a;
    return *this;
  }
  friend Triple operator+(Triple a, const Triple& b) { return a += b; }
  friend Triple operator-(Triple a, const Triple& b) { return a -= b; }
  friend Triple operator*(double s, Triple a) { return a *= s; }
  friend Triple operator-(Triple a) { return a *= -1.0; }

  /// Unweighted Frobenius norm over all three blocks.
  double frobenius_norm() const {
    return std::sqrt(U.squaredNorm() + Sigma.squaredNorm() + V.squaredNorm());
  }
};

using AmbientTriple = Triple<detail::AmbientTag>;
using TangentTriple = Triple<detail::TangentTag>;
using HorizontalTriple = Triple<detail::HorizontalTag>;

/// SVD of the small factor, Sigma = left * diag(s) * right^T. Every r x r
/// solve in this module is diagonalized through it.
struct SigmaFactors {
  Matrix left;
  Vector s;
  Matrix right;
};

/// Throws DegeneracyError when s_min / s_max < 1e-12.
SigmaFactors factor_sigma(const Matrix& Sigma);

double metric(const FixedRankPoint& X, const TangentTriple& xi, const TangentTriple& zeta);
double norm(const FixedRankPoint& X, const TangentTriple& xi);

/// Unique symmetric B with P B + B P = sym(rhs), P symmetric positive definite.
Matrix solve_lyapunov_sym(const Matrix& P, const Matrix& rhs);

/// Metric-orthogonal projection of an ambient triple onto T_X.
TangentTriple project_tangent(const FixedRankPoint& X, const AmbientTriple& A);

struct SkewPair {
  Matrix theta1;
  Matrix theta2;
};

/// Skew (Theta1, Theta2) solving
///   S S^T T1 + T1 S S^T - S T2 S^T = rhs1,
///   S^T S T2 + T2 S^T S - S^T T1 S = rhs2,
/// for skew-symmetric right-hand sides (S = Sigma).
SkewPair solve_coupled_skew(const FixedRankPoint& X, const Matrix& rhs1, const Matrix& rhs2);

/// Removes the vertical component (U T1, Sigma T2 - T1 Sigma, V T2).
HorizontalTriple project_horizontal(const FixedRankPoint& X, const TangentTriple& xi);

/// (qf(U + t xi_U), Sigma + t xi_Sigma, qf(V + t xi_V)); qf is the thin-QR
/// orthonormal factor with positive diag(R). Repairs a degenerate Sigma.
FixedRankPoint retract(const FixedRankPoint& X, const TangentTriple& xi, double t = 1.0);

/// Pi_H(P_T(xi_old)) at X_new.
HorizontalTriple transport(const FixedRankPoint& X_new, const TangentTriple& xi_old);

/// Riemannian gradient of f(X) = 1/2 ||P_Omega(X) - I||_F^2.
HorizontalTriple riemannian_gradient(const FixedRankPoint& X, const CompletionProblem& problem);

/// Riemannian Hessian of the completion cost applied to a horizontal eta.
HorizontalTriple hess_vec(const FixedRankPoint& X, const CompletionProblem& problem, const HorizontalTriple& eta);

/// Levi-Civita correction of the weighted ambient metric: the connection is
/// Pi_H(P_T(D xi[eta] + christoffel(X, xi, eta))).
AmbientTriple christoffel(const FixedRankPoint& X, const TangentTriple& xi, const TangentTriple& eta);

/// Gradient and Hessian-vector products at a fixed point, reusing the work
/// shared between them (residual, Sigma factorization, Lyapunov solutions).
class CostDerivatives {
 public:
  CostDerivatives(const FixedRankPoint& X, const CompletionProblem& problem);

  const FixedRankPoint& point() const { return X_; }
  double cost() const { return cost_; }
  /// Euclidean gradient P_Omega(X) - I.
  const Matrix& residual_matrix() const { return A_; }
  const HorizontalTriple& gradient() const { return grad_; }
  double gradient_norm() const { return grad_norm_; }
  HorizontalTriple hess_vec(const HorizontalTriple& eta) const;
  /// Euclidean directional derivative of the gradient field along eta.
  AmbientTriple gradient_derivative(const TangentTriple& eta) const;

 private:
  FixedRankPoint X_;
  const CompletionProblem* problem_;
  SigmaFactors factors_;
  Matrix sigma_inv_;  // Sigma^{-1}
  Matrix P_inv_;      // (Sigma Sigma^T)^{-1}
  Matrix Q_inv_;      // (Sigma^T Sigma)^{-1}
  Matrix A_;
  AmbientTriple scaled_;  // metric-scaled Euclidean gradient
  Matrix B_U_;
  Matrix B_V_;
  HorizontalTriple grad_;
  double cost_ = 0.0;
  double grad_norm_ = 0.0;
};

/// Seeded Gaussian orthonormal factors; Sigma = diag(|N(0,1)| + 0.5) sorted descending.
FixedRankPoint random_point(int dimension, int rank, std::uint64_t seed);

/// U Sigma V^T.
Matrix embed(const FixedRankPoint& X);
/// Differential of the embedding: xi_U Sigma V^T + U xi_Sigma V^T + U Sigma xi_V^T.
Matrix embed_tangent(const FixedRankPoint& X, const TangentTriple& xi);

/// Rank-r truncated SVD of a dense matrix as a point. Singular values below
/// 1e-8 * s_max are lifted to that floor so Sigma stays in GL(r).
FixedRankPoint point_from_matrix(const Matrix& Y, int rank);

/// Re-factorizes X through point_from_matrix when cond(Sigma) > 1e12.
FixedRankPoint repair_degenerate(FixedRankPoint X);

/// Thin QR orthonormal factor with diag(R) > 0.
Matrix orthonormal_factor(const Matrix& A);

}  // namespace timrp
