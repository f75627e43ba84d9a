#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "dmrac/graph.hpp"

using dmrac::GraphTopology;
using dmrac::ValidationError;
using Edge = GraphTopology::Edge;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("chain topology wires each follower to its predecessor") {
  auto g = GraphTopology::chain(6);
  REQUIRE(g.n_followers() == 6);
  REQUIRE(g.edges().size() == 6);
  REQUIRE(g.in_neighbors(1) == std::vector<int>{0});
  REQUIRE(g.in_neighbors(4) == std::vector<int>{3});
  REQUIRE(g.has_leader_edge(1));
  REQUIRE_FALSE(g.has_leader_edge(2));
  REQUIRE(g.follower_in_degree(1) == 0);
  REQUIRE(g.follower_in_degree(2) == 1);
  REQUIRE(g.in_degree(6) == 1);
  REQUIRE(g.evaluation_order() == std::vector<int>{1, 2, 3, 4, 5, 6});
}

TEST_CASE("diamond graph validates and orders dependencies") {
  std::vector<Edge> e{{0, 1}, {1, 2}, {1, 3}, {2, 4}, {3, 4}};
  REQUIRE(GraphTopology::check(4, e).empty());
  auto g = GraphTopology::make(4, e);
  REQUIRE(g.in_neighbors(4) == std::vector<int>{2, 3});
  REQUIRE(g.in_degree(4) == 2);
  REQUIRE(g.follower_in_degree(4) == 2);
  REQUIRE(g.evaluation_order() == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("check reports structural violations individually") {
  SECTION("node outside range") {
    auto bad = GraphTopology::check(2, {{0, 7}});
    REQUIRE(bad.size() == 1);
    REQUIRE_THAT(bad[0], ContainsSubstring("outside 0..2"));
  }
  SECTION("self-loop") {
    auto bad = GraphTopology::check(2, {{0, 1}, {0, 2}, {1, 1}});
    REQUIRE(bad.size() == 1);
    REQUIRE_THAT(bad[0], ContainsSubstring("self-loop on node 1"));
  }
  SECTION("edge into the leader") {
    auto bad = GraphTopology::check(2, {{0, 1}, {0, 2}, {1, 0}});
    REQUIRE(bad.size() == 1);
    REQUIRE_THAT(bad[0], ContainsSubstring("points into the leader"));
  }
  SECTION("duplicate edge") {
    auto bad = GraphTopology::check(1, {{0, 1}, {0, 1}});
    REQUIRE(bad.size() == 1);
    REQUIRE_THAT(bad[0], ContainsSubstring("duplicate edge [0,1]"));
  }
  SECTION("several problems are all collected") {
    auto bad = GraphTopology::check(2, {{1, 1}, {2, 0}});
    REQUIRE(bad.size() == 2);
  }
  SECTION("negative follower count") {
    auto bad = GraphTopology::check(-1, {});
    REQUIRE(bad.size() == 1);
  }
}

TEST_CASE("check lists a directed cycle explicitly") {
  auto bad = GraphTopology::check(2, {{0, 1}, {1, 2}, {2, 1}});
  REQUIRE(bad.size() == 1);
  REQUIRE_THAT(bad[0], ContainsSubstring("cycle detected:"));
  // both followers participate in the printed walk
  REQUIRE_THAT(bad[0], ContainsSubstring("1"));
  REQUIRE_THAT(bad[0], ContainsSubstring("2"));
  REQUIRE_THAT(bad[0], ContainsSubstring("->"));

  auto bad3 = GraphTopology::check(3, {{0, 1}, {1, 2}, {2, 3}, {3, 1}});
  REQUIRE(bad3.size() == 1);
  REQUIRE_THAT(bad3[0], ContainsSubstring("cycle detected:"));
}

TEST_CASE("check flags followers unreachable from the leader") {
  auto bad = GraphTopology::check(3, {{0, 1}});
  REQUIRE(bad.size() == 2);
  REQUIRE_THAT(bad[0], ContainsSubstring("follower 2 is not reachable"));
  REQUIRE_THAT(bad[1], ContainsSubstring("follower 3 is not reachable"));
}

TEST_CASE("make throws a ValidationError carrying every violation") {
  try {
    GraphTopology::make(2, {{1, 1}, {2, 0}});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(e.violations.size() == 2);
    REQUIRE_THAT(e.what(), ContainsSubstring("self-loop"));
    REQUIRE_THAT(e.what(), ContainsSubstring("leader"));
  }
}

TEST_CASE("empty graph with zero followers is valid") {
  REQUIRE(GraphTopology::check(0, {}).empty());
  auto g = GraphTopology::make(0, {});
  REQUIRE(g.n_followers() == 0);
  REQUIRE(g.evaluation_order().empty());
}

TEST_CASE("random spanning-tree graphs: sorted neighbors, consistent order") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const int nf = 8;
    std::vector<Edge> e{{0, 1}};
    for (int i = 2; i <= nf; ++i) {
      std::uniform_int_distribution<int> pick(0, i - 1);
      e.push_back({pick(rng), i});
    }
    // a few extra forward edges, skipping duplicates
    for (int k = 0; k < 6; ++k) {
      std::uniform_int_distribution<int> hi(2, nf);
      int dst = hi(rng);
      std::uniform_int_distribution<int> lo(0, dst - 1);
      Edge cand{lo(rng), dst};
      if (std::find(e.begin(), e.end(), cand) == e.end()) e.push_back(cand);
    }
    REQUIRE(GraphTopology::check(nf, e).empty());
    auto g = GraphTopology::make(nf, e);

    for (int i = 1; i <= nf; ++i) {
      const auto& nbrs = g.in_neighbors(i);
      REQUIRE(std::is_sorted(nbrs.begin(), nbrs.end()));
    }
    // every follower appears exactly once, after all follower in-neighbors
    const auto& order = g.evaluation_order();
    REQUIRE(order.size() == static_cast<size_t>(nf));
    std::vector<int> pos(nf + 1, -1);
    for (size_t k = 0; k < order.size(); ++k) pos[order[k]] = static_cast<int>(k);
    for (int i = 1; i <= nf; ++i) {
      REQUIRE(pos[i] >= 0);
      for (int j : g.in_neighbors(i))
        if (j != 0) REQUIRE(pos[j] < pos[i]);
    }
  }
}
