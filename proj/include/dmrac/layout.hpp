#pragma once

// Flat layout of the coupled ODE state. One vector holds, in order:
//   [ x_0 (n) ]
//   then per follower i ascending:
//     x_i (n)
//     per in-neighbor j ascending: k_edge_ij (n), ff_ij (1)
//     k_consensus_i (n)
//     W_i ((n+1)·m, column-major)
//     theta_i (m+1)
// ff_ij holds the input feedforward gain in communicated mode and the input
// estimate in estimated mode; on leader edges it is always the reference
// feedforward gain.

#include <sstream>
#include <string>
#include <vector>

#include "dmrac/core.hpp"
#include "dmrac/graph.hpp"

namespace dmrac {

class StateLayout {
 public:
  StateLayout() = default;

  StateLayout(const GraphTopology& g, int n, int m) : n_(n), m_(m) {
    x_.resize(g.n_followers() + 1);
    edge_gain_.resize(g.n_followers() + 1);
    edge_ff_.resize(g.n_followers() + 1);
    consensus_.resize(g.n_followers() + 1);
    w_.resize(g.n_followers() + 1);
    theta_.resize(g.n_followers() + 1);
    int off = 0;
    x_[0] = off;
    off += n;
    for (int i = 1; i <= g.n_followers(); ++i) {
      x_[i] = off;
      off += n;
      for (int jidx = 0; jidx < g.in_degree(i); ++jidx) {
        edge_gain_[i].push_back(off);
        off += n;
        edge_ff_[i].push_back(off);
        off += 1;
      }
      consensus_[i] = off;
      off += n;
      w_[i] = off;
      off += (n + 1) * m;
      theta_[i] = off;
      off += m + 1;
    }
    size_ = off;
  }

  int size() const { return size_; }
  int n() const { return n_; }
  int m() const { return m_; }

  int x0() const { return x_[0]; }
  int x(int i) const { return x_[i]; }
  int edge_gain(int i, int jidx) const { return edge_gain_[i][jidx]; }
  int edge_ff(int i, int jidx) const { return edge_ff_[i][jidx]; }
  int consensus_gain(int i) const { return consensus_[i]; }
  int w(int i) const { return w_[i]; }       // (n+1)×m block, column-major
  int theta(int i) const { return theta_[i]; }  // m+1 entries

  // Human-readable index map.
  std::string describe(const GraphTopology& g) const {
    std::ostringstream os;
    auto row = [&](const std::string& name, int off, int len) {
      os << "  [" << off << ", " << off + len << ")  " << name << "\n";
    };
    row("x_0", x0(), n_);
    for (int i = 1; i <= g.n_followers(); ++i) {
      const auto tag = std::to_string(i);
      row("x_" + tag, x(i), n_);
      const auto& nbrs = g.in_neighbors(i);
      for (int jidx = 0; jidx < static_cast<int>(nbrs.size()); ++jidx) {
        const auto etag = tag + "," + std::to_string(nbrs[jidx]);
        row("k_edge_" + etag, edge_gain(i, jidx), n_);
        row("ff_" + etag, edge_ff(i, jidx), 1);
      }
      row("k_consensus_" + tag, consensus_gain(i), n_);
      row("W_" + tag, w(i), (n_ + 1) * m_);
      row("theta_" + tag, theta(i), m_ + 1);
    }
    return os.str();
  }

 private:
  int n_ = 0, m_ = 0, size_ = 0;
  std::vector<int> x_, consensus_, w_, theta_;
  std::vector<std::vector<int>> edge_gain_, edge_ff_;
};

}  // namespace dmrac
