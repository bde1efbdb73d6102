#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "test_support.hpp"
#include "timrp/topology.hpp"

using namespace timrp;
using namespace timrp::testing;

namespace {

std::set<std::pair<int, int>> omega_set(const CompletionProblem& p) {
  return {p.omega().begin(), p.omega().end()};
}

// Receiver 0 hears transmitter 2 but not 1; a few more cross links.
NetworkTopology five_user_example() {
  return NetworkTopology(5, {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}, {0, 2}, {1, 0}, {1, 3}, {2, 4}, {3, 1}, {4, 0},
                             {4, 2}});
}

}  // namespace

TEST(BuildProblem, TwoUserTwoStreamBlocks) {
  const NetworkTopology topo(2, {{0, 0}, {0, 1}, {1, 1}});
  const CompletionProblem p = build_problem(topo, StreamAllocation({2, 2}));
  // Listed 1-based, as in the two-user worked example.
  const std::vector<std::pair<int, int>> one_based = {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {1, 3}, {1, 4},
                                                      {2, 3}, {2, 4}, {3, 3}, {3, 4}, {4, 3}, {4, 4}};
  std::set<std::pair<int, int>> expected;
  for (auto [i, j] : one_based) expected.insert({i - 1, j - 1});
  EXPECT_EQ(omega_set(p), expected);
  EXPECT_EQ(p.dimension(), 4);
}

TEST(BuildProblem, FullyConnectedIsCompleteMask) {
  const CompletionProblem p = single_stream_problem(fully_connected(3));
  EXPECT_EQ(p.omega().size(), 9u);
  EXPECT_EQ(p.mask(), Matrix::Ones(3, 3));
  EXPECT_DOUBLE_EQ(cost(p, Matrix::Identity(3, 3)), 0.0);
}

TEST(BuildProblem, DirectOnlyIsDiagonal) {
  const CompletionProblem p = single_stream_problem(direct_only(4));
  EXPECT_EQ(omega_set(p), (std::set<std::pair<int, int>>{{0, 0}, {1, 1}, {2, 2}, {3, 3}}));
}

TEST(BuildProblem, OmegaSizeIsSumOfBlockProducts) {
  const NetworkTopology topo = five_user_example();
  const StreamAllocation s({1, 3, 2, 1, 2});
  const CompletionProblem p = build_problem(topo, s);
  std::size_t expected = 0;
  for (const Link& l : topo.links()) expected += static_cast<std::size_t>(s.streams(l.rx) * s.streams(l.tx));
  EXPECT_EQ(p.omega().size(), expected);
  EXPECT_EQ(p.dimension(), 9);
  for (int k = 0; k < 9; ++k) EXPECT_TRUE(p.observed(k, k));
}

TEST(BuildProblem, RelabelingUsersPermutesBlocks) {
  const NetworkTopology topo = five_user_example();
  const std::vector<int> perm = {3, 0, 4, 1, 2};  // new label of old user i
  std::vector<Link> relabeled;
  for (const Link& l : topo.links()) relabeled.push_back({perm[l.rx], perm[l.tx]});
  const CompletionProblem a = single_stream_problem(topo);
  const CompletionProblem b = single_stream_problem(NetworkTopology(5, relabeled));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_EQ(a.observed(i, j), b.observed(perm[i], perm[j]));
}

TEST(BuildProblem, RejectsUserCountMismatch) {
  EXPECT_THROW(build_problem(three_user_cycle(), StreamAllocation::uniform(4)), Error);
}

TEST(Topology, ValidationErrors) {
  EXPECT_THROW(NetworkTopology(2, {{0, 0}}), Error);                  // missing (1,1)
  EXPECT_THROW(NetworkTopology(2, {{0, 0}, {1, 1}, {0, 2}}), Error);  // out of range
  EXPECT_THROW(NetworkTopology(2, {{0, 0}, {1, 1}, {0, 1}, {0, 1}}), Error);
  EXPECT_THROW(StreamAllocation({1, 0}), Error);
}

TEST(RandomTopology, NoInterference) {
  const NetworkTopology t = random_topology(4, 0, 7);
  EXPECT_EQ(t, direct_only(4));
}

TEST(RandomTopology, LinkCountAndDeterminism) {
  const NetworkTopology a = random_topology(100, 400, 11);
  const NetworkTopology b = random_topology(100, 400, 11);
  EXPECT_EQ(a.links().size(), 500u);
  EXPECT_EQ(a.interference_links(), 400u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, random_topology(100, 400, 12));
  for (int L : {0, 1, 37, 90}) EXPECT_EQ(random_topology(10, L, 3).links().size(), static_cast<std::size_t>(10 + L));
}

TEST(RandomTopology, FullRangeAndErrors) {
  EXPECT_EQ(random_topology(5, 20, 1), fully_connected(5));
  EXPECT_THROW(random_topology(5, 21, 1), Error);
  EXPECT_THROW(random_topology(5, -1, 1), Error);
}

TEST(RandomTopology, PairsAreRoughlyUniform) {
  // Each of the K(K-1) = 12 pairs should be drawn with probability L / 12.
  std::map<std::pair<int, int>, int> hits;
  const int runs = 3000;
  for (int s = 0; s < runs; ++s) {
    const NetworkTopology t = random_topology(4, 3, static_cast<std::uint64_t>(s));
    for (const Link& l : t.links())
      if (l.rx != l.tx) ++hits[{l.rx, l.tx}];
  }
  ASSERT_EQ(hits.size(), 12u);
  for (const auto& [pair, n] : hits) EXPECT_NEAR(n, runs * 3.0 / 12.0, 100.0);
}

TEST(TopologyFile, ParseOneInterferenceLink) {
  const TopologyFile f = parse_topology(R"({"K":2,"links":[[0,0],[1,1],[0,1]]})");
  EXPECT_EQ(f.topology.users(), 2);
  EXPECT_EQ(f.topology.interference_links(), 1u);
  EXPECT_TRUE(f.topology.connected(0, 1));
  EXPECT_FALSE(f.topology.connected(1, 0));
  EXPECT_FALSE(f.streams.has_value());
}

TEST(TopologyFile, RoundTrip) {
  const NetworkTopology t = five_user_example();
  EXPECT_EQ(parse_topology(serialize_topology(t, std::nullopt)).topology, t);
  const StreamAllocation s({2, 1, 1, 3, 1});
  const TopologyFile f = parse_topology(serialize_topology(t, s));
  EXPECT_EQ(f.topology, t);
  ASSERT_TRUE(f.streams.has_value());
  EXPECT_EQ(*f.streams, s);
  const std::string text = serialize_topology(t, s);
  EXPECT_EQ(serialize_topology(parse_topology(text).topology, parse_topology(text).streams), text);
}

TEST(TopologyFile, Rejections) {
  try {
    parse_topology(R"({"K":2,"links":[[0,0]]})");
    FAIL() << "missing direct link accepted";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("(1,1)"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_topology(R"({"K":2,"links":[[0,0],[1,1],[1,1]]})"), Error);
  EXPECT_THROW(parse_topology(R"({"K":2,"links":[[0,0],[1,1],[0,5]]})"), Error);
  EXPECT_THROW(parse_topology(R"({"K":2,"links":[[0,0],[1,1]],)"), Error);
  EXPECT_THROW(parse_topology(R"({"links":[[0,0]]})"), Error);
  EXPECT_THROW(parse_topology(R"({"K":2,"links":[[0,0],[1,1]],"streams":[1]})"), Error);
  EXPECT_THROW(parse_topology(R"({"K":2,"links":[[0,0],[1,1]],"streams":[1,0]})"), Error);
  EXPECT_THROW(parse_topology(R"({"K":2,"links":[[0,0],[1]]})"), Error);
}
