#pragma once

// Transceivers from a completed matrix: X = U_full^T V_full with inner
// dimension N (channel uses). Receiver i decodes with the columns of U_full in
// its stream block, transmitter j precodes with the matching columns of V_full.

#include <nlohmann/json.hpp>
#include <vector>

#include "timrp/manifold.hpp"
#include "timrp/topology.hpp"

namespace timrp {

struct TimSolution {
  int N = 0;
  Matrix U_full;  // N x M decoders
  Matrix V_full;  // N x M precoders
  std::vector<int> streams;
  std::vector<double> dof;

  /// N x M_i block of a stack for one user.
  Matrix decoder(int user) const;
  Matrix precoder(int user) const;

 private:
  int offset(int user) const;
};

/// Per-user M_i / N.
std::vector<double> dof_tuple(const StreamAllocation& streams, int channel_uses);

/// Throws Error when the normalized residual of X exceeds max_residual.
TimSolution extract_transceivers(const FixedRankPoint& X, const CompletionProblem& problem,
                                 const StreamAllocation& streams, double max_residual);

struct AlignmentCheck {
  int rx = 0;
  int tx = 0;
  bool direct = false;
  /// max-abs of U_rx^T V_tx (interference) or U_i^T V_i - I (direct).
  double violation = 0.0;
  bool pass = false;
};

struct AlignmentReport {
  std::vector<AlignmentCheck> checks;
  bool pass = true;
  double worst_violation = 0.0;
  int failures = 0;
};

/// Zero-forcing on every connected cross link and unit desired gain on every
/// direct link; links absent from the topology are not checked.
AlignmentReport verify_alignment(const TimSolution& sol, const NetworkTopology& topo, const StreamAllocation& streams,
                                 double tol);

nlohmann::ordered_json to_json(const TimSolution& sol);
nlohmann::ordered_json to_json(const AlignmentReport& report);

}  // namespace timrp
