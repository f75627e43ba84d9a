#pragma once

// Directed communication topology over one leader (node 0, the reference
// model) and followers 1..N. An edge [j, i] means follower i listens to
// node j. Valid topologies are acyclic and reach every follower from the
// leader; neighbor lists and the control evaluation order are ascending-id
// deterministic.

#include <algorithm>
#include <array>
#include <set>
#include <string>
#include <vector>

#include "dmrac/core.hpp"

namespace dmrac {

class GraphTopology {
 public:
  using Edge = std::array<int, 2>;  // {source, destination}

  GraphTopology() = default;

  // Returns every invariant violation (empty means valid).
  static std::vector<std::string> check(int n_followers,
                                        const std::vector<Edge>& edges) {
    std::vector<std::string> bad;
    if (n_followers < 0) {
      bad.push_back("follower count must be non-negative");
      return bad;
    }
    std::set<std::pair<int, int>> seen;
    for (const auto& [src, dst] : edges) {
      if (src < 0 || src > n_followers || dst < 0 || dst > n_followers) {
        bad.push_back("edge [" + std::to_string(src) + "," + std::to_string(dst) +
                      "] references a node outside 0.." + std::to_string(n_followers));
        continue;
      }
      if (src == dst)
        bad.push_back("self-loop on node " + std::to_string(src));
      if (dst == 0)
        bad.push_back("edge [" + std::to_string(src) + ",0] points into the leader");
      if (!seen.insert({src, dst}).second)
        bad.push_back("duplicate edge [" + std::to_string(src) + "," +
                      std::to_string(dst) + "]");
    }
    if (!bad.empty()) return bad;

    // Cycle check over followers (the leader has no in-edges).
    std::vector<std::vector<int>> out(n_followers + 1);
    for (const auto& [src, dst] : edges) out[src].push_back(dst);
    std::vector<int> color(n_followers + 1, 0);  // 0 white, 1 gray, 2 black
    std::vector<int> parent(n_followers + 1, -1);
    std::vector<int> cycle;
    auto dfs = [&](auto&& self, int v) -> int {  // returns gray node hit, or -1
      color[v] = 1;
      for (int w : out[v]) {
        if (color[w] == 1) {
          parent[w] = v;  // close the loop for reconstruction
          return w;
        }
        if (color[w] == 0) {
          parent[w] = v;
          int hit = self(self, w);
          if (hit >= 0) return hit;
        }
      }
      color[v] = 2;
      return -1;
    };
    for (int v = 0; v <= n_followers && cycle.empty(); ++v) {
      if (color[v] != 0) continue;
      int hit = dfs(dfs, v);
      if (hit >= 0) {
        int w = parent[hit];
        cycle.push_back(hit);
        while (w != hit) {
          cycle.push_back(w);
          w = parent[w];
        }
        std::reverse(cycle.begin(), cycle.end());
      }
    }
    if (!cycle.empty()) {
      std::string msg = "cycle detected: ";
      for (int v : cycle) msg += std::to_string(v) + " -> ";
      msg += std::to_string(cycle.front());
      bad.push_back(msg);
      return bad;
    }

    // Every follower reachable from the leader (spanning tree rooted at 0).
    std::vector<char> reach(n_followers + 1, 0);
    std::vector<int> stack{0};
    reach[0] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : out[v])
        if (!reach[w]) {
          reach[w] = 1;
          stack.push_back(w);
        }
    }
    for (int v = 1; v <= n_followers; ++v)
      if (!reach[v])
        bad.push_back("follower " + std::to_string(v) +
                      " is not reachable from the leader");
    return bad;
  }

  static GraphTopology make(int n_followers, const std::vector<Edge>& edges) {
    auto bad = check(n_followers, edges);
    if (!bad.empty()) throw ValidationError(bad);
    GraphTopology g;
    g.n_followers_ = n_followers;
    g.edges_ = edges;
    std::sort(g.edges_.begin(), g.edges_.end());
    g.in_ = std::vector<std::vector<int>>(n_followers + 1);
    for (const auto& [src, dst] : g.edges_) g.in_[dst].push_back(src);
    for (auto& nbrs : g.in_) std::sort(nbrs.begin(), nbrs.end());

    // Kahn's algorithm restricted to followers, smallest id first.
    std::vector<int> deg(n_followers + 1, 0);
    for (const auto& [src, dst] : g.edges_)
      if (src != 0) ++deg[dst];
    std::set<int> ready;
    for (int v = 1; v <= n_followers; ++v)
      if (deg[v] == 0) ready.insert(v);
    std::vector<std::vector<int>> out(n_followers + 1);
    for (const auto& [src, dst] : g.edges_) out[src].push_back(dst);
    while (!ready.empty()) {
      int v = *ready.begin();
      ready.erase(ready.begin());
      g.order_.push_back(v);
      for (int w : out[v])
        if (--deg[w] == 0) ready.insert(w);
    }
    return g;
  }

  int n_followers() const { return n_followers_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // In-neighbors of follower i, ascending; may start with 0 (the leader).
  const std::vector<int>& in_neighbors(int i) const { return in_.at(i); }
  int in_degree(int i) const { return static_cast<int>(in_.at(i).size()); }
  bool has_leader_edge(int i) const {
    return !in_.at(i).empty() && in_.at(i).front() == 0;
  }
  int follower_in_degree(int i) const {
    return in_degree(i) - (has_leader_edge(i) ? 1 : 0);
  }

  // Followers ordered so every one appears after all its follower in-neighbors.
  const std::vector<int>& evaluation_order() const { return order_; }

  static GraphTopology chain(int n_followers) {
    std::vector<Edge> e;
    for (int i = 1; i <= n_followers; ++i) e.push_back({i - 1, i});
    return make(n_followers, e);
  }

 private:
  int n_followers_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> in_;
  std::vector<int> order_;
};

}  // namespace dmrac
