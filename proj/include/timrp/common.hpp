#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace timrp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised for malformed inputs and violated preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the factor Sigma leaves GL(r) (or an r x r solve becomes singular).
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

inline Matrix sym(const Matrix& C) { return 0.5 * (C + C.transpose()); }
inline Matrix skew(const Matrix& C) { return 0.5 * (C - C.transpose()); }

}  // namespace timrp
