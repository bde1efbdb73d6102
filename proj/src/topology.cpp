#include "timrp/topology.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

namespace timrp {

NetworkTopology::NetworkTopology(int users, std::vector<Link> links) : users_(users), links_(std::move(links)) {
  if (users_ < 1) throw Error("topology: user count must be positive, got " + std::to_string(users_));
  for (const Link& l : links_) {
    if (l.rx < 0 || l.rx >= users_ || l.tx < 0 || l.tx >= users_)
      throw Error("topology: link (" + std::to_string(l.rx) + "," + std::to_string(l.tx) + ") out of range [0," +
                  std::to_string(users_) + ")");
  }
  std::sort(links_.begin(), links_.end());
  auto dup = std::adjacent_find(links_.begin(), links_.end());
  if (dup != links_.end())
    throw Error("topology: duplicate link (" + std::to_string(dup->rx) + "," + std::to_string(dup->tx) + ")");
  for (int i = 0; i < users_; ++i) {
    if (!std::binary_search(links_.begin(), links_.end(), Link{i, i}))
      throw Error("topology: missing direct link (" + std::to_string(i) + "," + std::to_string(i) + ")");
  }
}

bool NetworkTopology::connected(int rx, int tx) const {
  return std::binary_search(links_.begin(), links_.end(), Link{rx, tx});
}

StreamAllocation::StreamAllocation(std::vector<int> streams) : streams_(std::move(streams)) {
  if (streams_.empty()) throw Error("streams: allocation must cover at least one user");
  offsets_.reserve(streams_.size());
  for (int m : streams_) {
    if (m < 1) throw Error("streams: every user needs at least one stream, got " + std::to_string(m));
    offsets_.push_back(total_);
    total_ += m;
  }
}

StreamAllocation StreamAllocation::uniform(int users, int per_user) {
  return StreamAllocation(std::vector<int>(static_cast<std::size_t>(users), per_user));
}

CompletionProblem::CompletionProblem(int dimension, std::vector<std::pair<int, int>> omega)
    : dimension_(dimension), omega_(std::move(omega)), mask_(Matrix::Zero(dimension, dimension)) {
  if (dimension_ < 1) throw Error("problem: dimension must be positive");
  std::sort(omega_.begin(), omega_.end());
  omega_.erase(std::unique(omega_.begin(), omega_.end()), omega_.end());
  for (const auto& [i, j] : omega_) {
    if (i < 0 || i >= dimension_ || j < 0 || j >= dimension_) throw Error("problem: omega index out of range");
    mask_(i, j) = 1.0;
  }
  for (int k = 0; k < dimension_; ++k) {
    if (mask_(k, k) == 0.0) throw Error("problem: diagonal entry (" + std::to_string(k) + "," + std::to_string(k) +
                                        ") missing from omega");
  }
}

CompletionProblem build_problem(const NetworkTopology& topo, const StreamAllocation& streams) {
  if (topo.users() != streams.users())
    throw Error("build_problem: topology has " + std::to_string(topo.users()) + " users but stream allocation has " +
                std::to_string(streams.users()));
  std::vector<std::pair<int, int>> omega;
  for (const Link& l : topo.links()) {
    for (int a = 0; a < streams.streams(l.rx); ++a)
      for (int b = 0; b < streams.streams(l.tx); ++b) omega.emplace_back(streams.offset(l.rx) + a, streams.offset(l.tx) + b);
  }
  return CompletionProblem(streams.total(), std::move(omega));
}

NetworkTopology random_topology(int users, int interference_links, std::uint64_t seed) {
  if (users < 1) throw Error("random_topology: user count must be positive");
  const long long max_links = static_cast<long long>(users) * (users - 1);
  if (interference_links < 0 || interference_links > max_links)
    throw Error("random_topology: interference link count " + std::to_string(interference_links) +
                " outside [0, " + std::to_string(max_links) + "]");

  std::vector<Link> candidates;
  candidates.reserve(static_cast<std::size_t>(max_links));
  for (int i = 0; i < users; ++i)
    for (int j = 0; j < users; ++j)
      if (i != j) candidates.push_back({i, j});

  // Partial Fisher-Yates: the first L slots are a uniform L-subset.
  std::mt19937_64 rng(seed);
  for (int k = 0; k < interference_links; ++k) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), candidates.size() - 1);
    std::swap(candidates[static_cast<std::size_t>(k)], candidates[pick(rng)]);
  }
  std::vector<Link> links(candidates.begin(), candidates.begin() + interference_links);
  for (int i = 0; i < users; ++i) links.push_back({i, i});
  return NetworkTopology(users, std::move(links));
}

TopologyFile parse_topology(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("topology file: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error("topology file: top level must be an object");
  if (!doc.contains("K") || !doc["K"].is_number_integer()) throw Error("topology file: missing integer field \"K\"");
  if (!doc.contains("links") || !doc["links"].is_array()) throw Error("topology file: missing array field \"links\"");

  const int users = doc["K"].get<int>();
  std::vector<Link> links;
  for (const auto& item : doc["links"]) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_number_integer() || !item[1].is_number_integer())
      throw Error("topology file: each link must be a pair of integers, got " + item.dump());
    links.push_back({item[0].get<int>(), item[1].get<int>()});
  }
  TopologyFile out{NetworkTopology(users, std::move(links)), std::nullopt};

  if (doc.contains("streams")) {
    const auto& s = doc["streams"];
    if (!s.is_array()) throw Error("topology file: \"streams\" must be an array");
    std::vector<int> m;
    for (const auto& v : s) {
      if (!v.is_number_integer()) throw Error("topology file: stream counts must be integers");
      m.push_back(v.get<int>());
    }
    StreamAllocation alloc(std::move(m));
    if (alloc.users() != users)
      throw Error("topology file: \"streams\" has " + std::to_string(alloc.users()) + " entries, expected " +
                  std::to_string(users));
    out.streams = std::move(alloc);
  }
  return out;
}

std::string serialize_topology(const NetworkTopology& topo, const std::optional<StreamAllocation>& streams) {
  nlohmann::ordered_json doc;
  doc["K"] = topo.users();
  auto links = nlohmann::ordered_json::array();
  for (const Link& l : topo.links()) links.push_back({l.rx, l.tx});
  doc["links"] = std::move(links);
  if (streams) doc["streams"] = streams->all();
  return doc.dump();
}

}  // namespace timrp
