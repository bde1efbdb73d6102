#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "timrp/common.hpp"

namespace timrp {

/// Ordered pair (receiver, transmitter): receiver `rx` hears transmitter `tx`.
struct Link {
  int rx = 0;
  int tx = 0;

  friend auto operator<=>(const Link&, const Link&) = default;
};

/// Partially connected K-user interference network. Links are kept sorted;
/// every direct link (i, i) must be present.
class NetworkTopology {
 public:
  /// Validates and sorts `links`. Throws Error on out-of-range indices,
  /// duplicates, or a missing direct link.
  NetworkTopology(int users, std::vector<Link> links);

  int users() const { return users_; }
  const std::vector<Link>& links() const { return links_; }
  std::size_t interference_links() const { return links_.size() - static_cast<std::size_t>(users_); }
  bool connected(int rx, int tx) const;

  friend bool operator==(const NetworkTopology&, const NetworkTopology&) = default;

 private:
  int users_;
  std::vector<Link> links_;
};

/// Per-user stream counts M_1..M_K.
class StreamAllocation {
 public:
  explicit StreamAllocation(std::vector<int> streams);
  /// M_i = 1 for every user.
  static StreamAllocation uniform(int users, int per_user = 1);

  int users() const { return static_cast<int>(streams_.size()); }
  int streams(int user) const { return streams_.at(static_cast<std::size_t>(user)); }
  const std::vector<int>& all() const { return streams_; }
  int total() const { return total_; }
  /// First global row/column index of user `user`'s block.
  int offset(int user) const { return offsets_.at(static_cast<std::size_t>(user)); }

  friend bool operator==(const StreamAllocation& a, const StreamAllocation& b) { return a.streams_ == b.streams_; }

 private:
  std::vector<int> streams_;
  std::vector<int> offsets_;
  int total_ = 0;
};

/// Masked identity completion: find X with X_ij = delta_ij for (i,j) in omega.
class CompletionProblem {
 public:
  CompletionProblem(int dimension, std::vector<std::pair<int, int>> omega);

  int dimension() const { return dimension_; }
  /// Sorted (row, col) pairs.
  const std::vector<std::pair<int, int>>& omega() const { return omega_; }
  /// Dense 0/1 indicator of omega.
  const Matrix& mask() const { return mask_; }
  bool observed(int row, int col) const { return mask_(row, col) != 0.0; }

  /// P_Omega(X).
  Matrix project(const Matrix& X) const { return X.cwiseProduct(mask_); }

 private:
  int dimension_;
  std::vector<std::pair<int, int>> omega_;
  Matrix mask_;
};

CompletionProblem build_problem(const NetworkTopology& topo, const StreamAllocation& streams);

/// K direct links plus `interference_links` distinct off-diagonal pairs drawn
/// uniformly without replacement. Deterministic in `seed`.
NetworkTopology random_topology(int users, int interference_links, std::uint64_t seed);

struct TopologyFile {
  NetworkTopology topology;
  std::optional<StreamAllocation> streams;
};

/// Parses `{"K": int, "links": [[i,j],...], "streams": [...]?}`.
TopologyFile parse_topology(std::string_view text);
std::string serialize_topology(const NetworkTopology& topo,
                               const std::optional<StreamAllocation>& streams = std::nullopt);

}  // namespace timrp
