#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dmrac {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += '\n';
    out += l;
  }
  return out;
}

// A scenario, topology, or config file violating a structural invariant.
// `violations` lists every problem found, one human-readable line each.
struct ValidationError : std::runtime_error {
  std::vector<std::string> violations;
  explicit ValidationError(std::vector<std::string> v)
      : std::runtime_error(join_lines(v)), violations(std::move(v)) {}
  explicit ValidationError(std::string v)
      : ValidationError(std::vector<std::string>{std::move(v)}) {}
};

// A matching condition that no gain can satisfy for the given plant pair.
struct MatchingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Integration produced a non-finite value or exceeded the norm guard.
struct DivergenceError : std::runtime_error {
  double t;
  explicit DivergenceError(double t_at)
      : std::runtime_error("simulation diverged at t = " + std::to_string(t_at)),
        t(t_at) {}
};

}  // namespace dmrac
