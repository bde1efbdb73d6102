#include "timrp/tim.hpp"

#include <numeric>

#include "timrp/lrmc.hpp"

namespace timrp {
namespace {

nlohmann::ordered_json rows_of(const Matrix& A) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

int TimSolution::offset(int user) const {
  if (user < 0 || user >= static_cast<int>(streams.size())) throw Error("TimSolution: user index out of range");
  return std::accumulate(streams.begin(), streams.begin() + user, 0);
}

Matrix TimSolution::decoder(int user) const {
  return U_full.middleCols(offset(user), streams[static_cast<std::size_t>(user)]);
}

Matrix TimSolution::precoder(int user) const {
  return V_full.middleCols(offset(user), streams[static_cast<std::size_t>(user)]);
}

std::vector<double> dof_tuple(const StreamAllocation& streams, int channel_uses) {
  if (channel_uses < 1) throw Error("dof_tuple: channel uses must be positive");
  std::vector<double> dof;
  for (int m : streams.all()) dof.push_back(static_cast<double>(m) / channel_uses);
  return dof;
}

TimSolution extract_transceivers(const FixedRankPoint& X, const CompletionProblem& problem,
                                 const StreamAllocation& streams, double max_residual) {
  if (streams.total() != problem.dimension() || X.dimension() != problem.dimension())
    throw Error("extract_transceivers: stream total, problem and point dimensions must agree");
  const double eps = residual(problem, X);
  if (!(eps <= max_residual))
    throw Error("extract_transceivers: residual " + std::to_string(eps) + " above " + std::to_string(max_residual) +
                "; refusing to build transceivers from an incomplete solution");

  // U Sigma = Q R (Gram-Schmidt order), X = Q (R V^T).
  const Matrix US = X.U * X.Sigma;
  TimSolution sol;
  sol.N = X.rank();
  const Matrix Q = orthonormal_factor(US);
  const Matrix R = Q.transpose() * US;
  sol.U_full = Q.transpose();
  sol.V_full = R * X.V.transpose();
  sol.streams = streams.all();
  sol.dof = dof_tuple(streams, sol.N);
  return sol;
}

AlignmentReport verify_alignment(const TimSolution& sol, const NetworkTopology& topo, const StreamAllocation& streams,
                                 double tol) {
  if (topo.users() != streams.users() || sol.streams != streams.all())
    throw Error("verify_alignment: topology, streams and solution disagree on the user layout");
  AlignmentReport report;
  for (const Link& link : topo.links()) {
    AlignmentCheck c;
    c.rx = link.rx;
    c.tx = link.tx;
    c.direct = link.rx == link.tx;
    Matrix G = sol.decoder(link.rx).transpose() * sol.precoder(link.tx);
    if (c.direct) G -= Matrix::Identity(G.rows(), G.cols());
    c.violation = G.size() == 0 ? 0.0 : G.cwiseAbs().maxCoeff();
    c.pass = c.violation <= tol;
    if (!c.pass) {
      report.pass = false;
      ++report.failures;
    }
    report.worst_violation = std::max(report.worst_violation, c.violation);
    report.checks.push_back(c);
  }
  return report;
}

nlohmann::ordered_json to_json(const TimSolution& sol) {
  nlohmann::ordered_json j;
  j["N"] = sol.N;
  j["streams"] = sol.streams;
  j["dof"] = sol.dof;
  j["U"] = rows_of(sol.U_full);
  j["V"] = rows_of(sol.V_full);
  return j;
}

nlohmann::ordered_json to_json(const AlignmentReport& report) {
  nlohmann::ordered_json j;
  j["pass"] = report.pass;
  j["worst_violation"] = report.worst_violation;
  j["failures"] = report.failures;
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"rx", c.rx}, {"tx", c.tx}, {"direct", c.direct}, {"violation", c.violation}, {"pass", c.pass}});
  j["checks"] = std::move(checks);
  return j;
}

}  // namespace timrp
