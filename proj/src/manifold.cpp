#include "timrp/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "timrp/lrmc.hpp"
#include "timrp/topology.hpp"

namespace timrp {
namespace {

constexpr double kSigmaCondLimit = 1e12;
constexpr double kSingularFloor = 1e-8;

double inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

// Solves W D W^T B + B W D W^T = C for symmetric C, with D = diag(d) > 0.
Matrix lyapunov_in_basis(const Matrix& W, const Vector& d, const Matrix& C) {
  Matrix Ct = W.transpose() * C * W;
  const Eigen::Index r = d.size();
  for (Eigen::Index k = 0; k < r; ++k)
    for (Eigen::Index l = 0; l < r; ++l) Ct(k, l) /= d(k) + d(l);
  return sym(W * Ct * W.transpose());
}

// P = Sigma Sigma^T = left diag(s^2) left^T; Q = Sigma^T Sigma = right diag(s^2) right^T.
Matrix gram_left(const SigmaFactors& f) { return f.left * f.s.cwiseAbs2().asDiagonal() * f.left.transpose(); }
Matrix gram_right(const SigmaFactors& f) { return f.right * f.s.cwiseAbs2().asDiagonal() * f.right.transpose(); }
Matrix gram_left_inv(const SigmaFactors& f) {
  return f.left * f.s.cwiseAbs2().cwiseInverse().asDiagonal() * f.left.transpose();
}
Matrix gram_right_inv(const SigmaFactors& f) {
  return f.right * f.s.cwiseAbs2().cwiseInverse().asDiagonal() * f.right.transpose();
}

void check_shapes(const FixedRankPoint& X, const Matrix& u, const Matrix& s, const Matrix& v, const char* where) {
  if (u.rows() != X.U.rows() || u.cols() != X.U.cols() || s.rows() != X.Sigma.rows() ||
      s.cols() != X.Sigma.cols() || v.rows() != X.V.rows() || v.cols() != X.V.cols())
    throw Error(std::string(where) + ": triple shape does not match the point");
}

struct TangentProjection {
  TangentTriple xi;
  Matrix B_U;
  Matrix B_V;
};

TangentProjection project_tangent_impl(const FixedRankPoint& X, const SigmaFactors& f, const AmbientTriple& A) {
  const Vector d = f.s.cwiseAbs2();
  const Matrix P = gram_left(f);
  const Matrix Q = gram_right(f);
  const Matrix S_U = X.U.transpose() * A.U;
  const Matrix S_V = X.V.transpose() * A.V;
  TangentProjection out;
  out.B_U = lyapunov_in_basis(f.left, d, P * (S_U + S_U.transpose()) * P);
  out.B_V = lyapunov_in_basis(f.right, d, Q * (S_V + S_V.transpose()) * Q);
  out.xi = TangentTriple(A.U - X.U * (out.B_U * gram_left_inv(f)), A.Sigma,
                         A.V - X.V * (out.B_V * gram_right_inv(f)));
  return out;
}

SkewPair coupled_skew_impl(const SigmaFactors& f, const Matrix& rhs1, const Matrix& rhs2) {
  const Matrix R1 = f.left.transpose() * rhs1 * f.left;
  const Matrix R2 = f.right.transpose() * rhs2 * f.right;
  const Eigen::Index r = f.s.size();
  Matrix a(r, r), b(r, r);
  for (Eigen::Index k = 0; k < r; ++k) {
    for (Eigen::Index l = 0; l < r; ++l) {
      const double c = f.s(k) * f.s(k) + f.s(l) * f.s(l);
      const double e = f.s(k) * f.s(l);
      const double det = c * c - e * e;
      a(k, l) = (c * R1(k, l) + e * R2(k, l)) / det;
      b(k, l) = (c * R2(k, l) + e * R1(k, l)) / det;
    }
  }
  return {skew(f.left * a * f.left.transpose()), skew(f.right * b * f.right.transpose())};
}

HorizontalTriple project_horizontal_impl(const FixedRankPoint& X, const SigmaFactors& f, const TangentTriple& xi) {
  const Matrix P = gram_left(f);
  const Matrix Q = gram_right(f);
  const Matrix rhs1 = skew(X.U.transpose() * xi.U * P) + skew(X.Sigma * xi.Sigma.transpose());
  const Matrix rhs2 = skew(X.V.transpose() * xi.V * Q) + skew(X.Sigma.transpose() * xi.Sigma);
  const SkewPair th = coupled_skew_impl(f, rhs1, rhs2);
  return HorizontalTriple(xi.U - X.U * th.theta1, xi.Sigma + th.theta1 * X.Sigma - X.Sigma * th.theta2,
                          xi.V - X.V * th.theta2);
}

AmbientTriple christoffel_impl(const FixedRankPoint& X, const Matrix& P_inv, const Matrix& Q_inv,
                               const TangentTriple& xi, const TangentTriple& eta) {
  const Matrix& S = X.Sigma;
  const Matrix dP_eta = eta.Sigma * S.transpose() + S * eta.Sigma.transpose();
  const Matrix dP_xi = xi.Sigma * S.transpose() + S * xi.Sigma.transpose();
  const Matrix dQ_eta = eta.Sigma.transpose() * S + S.transpose() * eta.Sigma;
  const Matrix dQ_xi = xi.Sigma.transpose() * S + S.transpose() * xi.Sigma;
  return AmbientTriple(0.5 * (xi.U * dP_eta + eta.U * dP_xi) * P_inv,
                       -sym(xi.U.transpose() * eta.U) * S - S * sym(xi.V.transpose() * eta.V),
                       0.5 * (xi.V * dQ_eta + eta.V * dQ_xi) * Q_inv);
}

}  // namespace

SigmaFactors factor_sigma(const Matrix& Sigma) {
  if (Sigma.rows() != Sigma.cols() || Sigma.rows() == 0) throw Error("factor_sigma: Sigma must be square and nonempty");
  Eigen::JacobiSVD<Matrix> svd(Sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SigmaFactors f{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  const double smax = f.s(0);
  const double smin = f.s(f.s.size() - 1);
  if (!(smax > 0.0) || !std::isfinite(smax) || smin < smax / kSigmaCondLimit)
    throw DegeneracyError("Sigma left GL(r): singular values [" + std::to_string(smin) + ", " + std::to_string(smax) +
                          "]");
  return f;
}

double metric(const FixedRankPoint& X, const TangentTriple& xi, const TangentTriple& zeta) {
  check_shapes(X, xi.U, xi.Sigma, xi.V, "metric");
  check_shapes(X, zeta.U, zeta.Sigma, zeta.V, "metric");
  const Matrix& S = X.Sigma;
  return inner(xi.U, zeta.U * (S * S.transpose())) + inner(xi.Sigma, zeta.Sigma) +
         inner(xi.V, zeta.V * (S.transpose() * S));
}

double norm(const FixedRankPoint& X, const TangentTriple& xi) { return std::sqrt(std::max(0.0, metric(X, xi, xi))); }

Matrix solve_lyapunov_sym(const Matrix& P, const Matrix& rhs) {
  if (P.rows() != P.cols() || rhs.rows() != P.rows() || rhs.cols() != P.cols())
    throw Error("solve_lyapunov_sym: shape mismatch");
  if ((P - P.transpose()).norm() > 1e-12 * std::max(1.0, P.norm()))
    throw Error("solve_lyapunov_sym: P is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(P);
  const Vector& d = eig.eigenvalues();
  if (!(d(0) > 1e-14 * std::max(1.0, d(d.size() - 1)))) throw DegeneracyError("solve_lyapunov_sym: P is not SPD");
  return lyapunov_in_basis(eig.eigenvectors(), d, sym(rhs));
}

TangentTriple project_tangent(const FixedRankPoint& X, const AmbientTriple& A) {
  check_shapes(X, A.U, A.Sigma, A.V, "project_tangent");
  return project_tangent_impl(X, factor_sigma(X.Sigma), A).xi;
}

SkewPair solve_coupled_skew(const FixedRankPoint& X, const Matrix& rhs1, const Matrix& rhs2) {
  const auto r = X.Sigma.rows();
  if (rhs1.rows() != r || rhs1.cols() != r || rhs2.rows() != r || rhs2.cols() != r)
    throw Error("solve_coupled_skew: right-hand sides must be r x r");
  return coupled_skew_impl(factor_sigma(X.Sigma), rhs1, rhs2);
}

HorizontalTriple project_horizontal(const FixedRankPoint& X, const TangentTriple& xi) {
  check_shapes(X, xi.U, xi.Sigma, xi.V, "project_horizontal");
  return project_horizontal_impl(X, factor_sigma(X.Sigma), xi);
}

Matrix orthonormal_factor(const Matrix& A) {
  const Eigen::Index n = A.cols();
  Eigen::HouseholderQR<Matrix> qr(A);
  Matrix Q = qr.householderQ() * Matrix::Identity(A.rows(), n);
  const Matrix& R = qr.matrixQR();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (R(k, k) < 0.0) Q.col(k) *= -1.0;
  }
  return Q;
}

FixedRankPoint repair_degenerate(FixedRankPoint X) {
  Eigen::JacobiSVD<Matrix> svd(X.Sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double smax = s(0);
  if (std::isfinite(smax) && smax > 0.0 && s(s.size() - 1) >= smax / kSigmaCondLimit) return X;
  if (!std::isfinite(smax)) throw DegeneracyError("repair_degenerate: non-finite Sigma");
  const double floor = kSingularFloor * (smax > 0.0 ? smax : 1.0);
  X.U = X.U * svd.matrixU();
  X.V = X.V * svd.matrixV();
  X.Sigma = s.cwiseMax(floor).asDiagonal();
  return X;
}

FixedRankPoint retract(const FixedRankPoint& X, const TangentTriple& xi, double t) {
  check_shapes(X, xi.U, xi.Sigma, xi.V, "retract");
  if (t == 0.0) return X;
  FixedRankPoint Y{orthonormal_factor(X.U + t * xi.U), X.Sigma + t * xi.Sigma, orthonormal_factor(X.V + t * xi.V)};
  return repair_degenerate(std::move(Y));
}

HorizontalTriple transport(const FixedRankPoint& X_new, const TangentTriple& xi_old) {
  check_shapes(X_new, xi_old.U, xi_old.Sigma, xi_old.V, "transport");
  const SigmaFactors f = factor_sigma(X_new.Sigma);
  return project_horizontal_impl(X_new, f, project_tangent_impl(X_new, f, AmbientTriple(xi_old)).xi);
}

AmbientTriple christoffel(const FixedRankPoint& X, const TangentTriple& xi, const TangentTriple& eta) {
  const SigmaFactors f = factor_sigma(X.Sigma);
  return christoffel_impl(X, gram_left_inv(f), gram_right_inv(f), xi, eta);
}

CostDerivatives::CostDerivatives(const FixedRankPoint& X, const CompletionProblem& problem)
    : X_(X), problem_(&problem), factors_(factor_sigma(X.Sigma)) {
  if (problem.dimension() != X.dimension()) throw Error("CostDerivatives: problem and point dimensions differ");
  const SigmaFactors& f = factors_;
  sigma_inv_ = f.right * f.s.cwiseInverse().asDiagonal() * f.left.transpose();
  P_inv_ = gram_left_inv(f);
  Q_inv_ = gram_right_inv(f);
  A_ = euclidean_gradient(problem, embed(X_));
  cost_ = 0.5 * A_.squaredNorm();

  const Matrix AV = A_ * X_.V;
  const Matrix AtU = A_.transpose() * X_.U;
  scaled_ = AmbientTriple(AV * sigma_inv_, X_.U.transpose() * AV, AtU * sigma_inv_.transpose());
  TangentProjection proj = project_tangent_impl(X_, f, scaled_);
  B_U_ = std::move(proj.B_U);
  B_V_ = std::move(proj.B_V);
  grad_ = HorizontalTriple(std::move(proj.xi.U), std::move(proj.xi.Sigma), std::move(proj.xi.V));
  grad_norm_ = norm(X_, grad_);
}

AmbientTriple CostDerivatives::gradient_derivative(const TangentTriple& eta) const {
  const FixedRankPoint& X = X_;
  const Matrix& S = X.Sigma;
  const Matrix dA = problem_->project(eta.U * S * X.V.transpose() + X.U * eta.Sigma * X.V.transpose() +
                                     X.U * S * eta.V.transpose());
  const Matrix d_sigma_inv = -sigma_inv_ * eta.Sigma * sigma_inv_;

  // Derivative of the metric-scaled Euclidean gradient.
  const AmbientTriple d_scaled(
      dA * X.V * sigma_inv_ + A_ * eta.V * sigma_inv_ + A_ * X.V * d_sigma_inv,
      eta.U.transpose() * A_ * X.V + X.U.transpose() * dA * X.V + X.U.transpose() * A_ * eta.V,
      dA.transpose() * X.U * sigma_inv_.transpose() + A_.transpose() * eta.U * sigma_inv_.transpose() +
          A_.transpose() * X.U * d_sigma_inv.transpose());

  const Vector d = factors_.s.cwiseAbs2();
  const Matrix P = gram_left(factors_);
  const Matrix Q = gram_right(factors_);
  const Matrix dP = eta.Sigma * S.transpose() + S * eta.Sigma.transpose();
  const Matrix dQ = eta.Sigma.transpose() * S + S.transpose() * eta.Sigma;

  // Differentiated Lyapunov equations of the tangent projection:
  //   P B + B P = P S P  =>  P dB + dB P = d(P S P) - dP B - B dP.
  auto block = [&](const Matrix& Y, const Matrix& dY, const Matrix& G, const Matrix& dG, const Matrix& basis,
                   const Matrix& W, const Matrix& dW, const Matrix& W_inv, const Matrix& B) {
    const Matrix s0 = Y.transpose() * G;
    const Matrix s1 = dY.transpose() * G + Y.transpose() * dG;
    const Matrix sy = s0 + s0.transpose();
    const Matrix dsy = s1 + s1.transpose();
    const Matrix rhs = dW * sy * W + W * dsy * W + W * sy * dW - dW * B - B * dW;
    const Matrix dB = lyapunov_in_basis(basis, d, rhs);
    const Matrix dW_inv = -W_inv * dW * W_inv;
    return Matrix(dG - dY * B * W_inv - Y * dB * W_inv - Y * B * dW_inv);
  };

  return AmbientTriple(block(X.U, eta.U, scaled_.U, d_scaled.U, factors_.left, P, dP, P_inv_, B_U_), d_scaled.Sigma,
                       block(X.V, eta.V, scaled_.V, d_scaled.V, factors_.right, Q, dQ, Q_inv_, B_V_));
}

HorizontalTriple CostDerivatives::hess_vec(const HorizontalTriple& eta) const {
  check_shapes(X_, eta.U, eta.Sigma, eta.V, "hess_vec");
  AmbientTriple conn = gradient_derivative(eta);
  conn += christoffel_impl(X_, P_inv_, Q_inv_, grad_, eta);
  return project_horizontal_impl(X_, factors_, project_tangent_impl(X_, factors_, conn).xi);
}

HorizontalTriple riemannian_gradient(const FixedRankPoint& X, const CompletionProblem& problem) {
  return CostDerivatives(X, problem).gradient();
}

HorizontalTriple hess_vec(const FixedRankPoint& X, const CompletionProblem& problem, const HorizontalTriple& eta) {
  return CostDerivatives(X, problem).hess_vec(eta);
}

FixedRankPoint random_point(int dimension, int rank, std::uint64_t seed) {
  if (rank < 1 || rank > dimension)
    throw Error("random_point: rank " + std::to_string(rank) + " outside [1, " + std::to_string(dimension) + "]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix G(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) G(i, j) = gauss(rng);
    return G;
  };
  FixedRankPoint X;
  X.U = orthonormal_factor(draw(dimension, rank));
  X.V = orthonormal_factor(draw(dimension, rank));
  Vector s(rank);
  for (int k = 0; k < rank; ++k) s(k) = std::abs(gauss(rng)) + 0.5;
  std::sort(s.begin(), s.end(), std::greater<>());
  X.Sigma = s.asDiagonal();
  return X;
}

Matrix embed(const FixedRankPoint& X) { return X.U * X.Sigma * X.V.transpose(); }

Matrix embed_tangent(const FixedRankPoint& X, const TangentTriple& xi) {
  check_shapes(X, xi.U, xi.Sigma, xi.V, "embed_tangent");
  return xi.U * X.Sigma * X.V.transpose() + X.U * xi.Sigma * X.V.transpose() + X.U * X.Sigma * xi.V.transpose();
}

FixedRankPoint point_from_matrix(const Matrix& Y, int rank) {
  if (Y.rows() != Y.cols()) throw Error("point_from_matrix: matrix must be square");
  if (rank < 1 || rank > Y.rows()) throw Error("point_from_matrix: rank out of range");
  Eigen::BDCSVD<Matrix> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (!s.allFinite()) throw DegeneracyError("point_from_matrix: non-finite singular values");
  const double floor = kSingularFloor * (s(0) > 0.0 ? s(0) : 1.0);
  FixedRankPoint X;
  X.U = svd.matrixU().leftCols(rank);
  X.V = svd.matrixV().leftCols(rank);
  X.Sigma = s.head(rank).cwiseMax(floor).asDiagonal();
  return X;
}

}  // namespace timrp
