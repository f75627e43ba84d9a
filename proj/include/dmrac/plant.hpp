#pragma once

// Plant and reference-model dynamics. Followers evolve as
//   dx_i = A_i x_i + b_i (u_i + f_i(x_i)),
// the reference as
//   dx_0 = A_0 x_0 + b_0 r(t).
// (A_i, b_i, f_i) are unknown to the controllers; only the simulator and the
// matching oracle read them.

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "dmrac/core.hpp"

namespace dmrac {

enum class UncertaintyKind { none, sinusoidal };

// Bounded Lipschitz input disturbance f(x) = c1 sin(x1) + c2 cos(x2).
struct UncertaintySpec {
  UncertaintyKind kind = UncertaintyKind::none;
  double c1 = 0.0;
  double c2 = 0.0;

  double operator()(const Vec& x) const {
    if (kind == UncertaintyKind::none) return 0.0;
    return c1 * std::sin(x[0]) + c2 * std::cos(x.size() > 1 ? x[1] : 0.0);
  }
  double bound() const {
    return kind == UncertaintyKind::none ? 0.0 : std::abs(c1) + std::abs(c2);
  }
};

inline UncertaintySpec sinusoidal_uncertainty(double c1, double c2) {
  return {UncertaintyKind::sinusoidal, c1, c2};
}

struct AgentPlant {
  Mat A;
  Vec b;
  UncertaintySpec f;
  Vec x0;

  int n() const { return static_cast<int>(A.rows()); }
};

// Second-order vehicle form: A = [[0,1],[a1,a2]], b = [0,b1].
inline AgentPlant vehicle_plant(double a1, double a2, double b1, Vec x0,
                                UncertaintySpec f = {}) {
  AgentPlant p;
  p.A = Mat{{0.0, 1.0}, {a1, a2}};
  p.b = Vec{{0.0, b1}};
  p.f = f;
  p.x0 = std::move(x0);
  return p;
}

// Piecewise-constant signal: value of the latest step at or before t.
struct ReferenceSignal {
  std::vector<std::pair<double, double>> steps{{0.0, 1.0}};  // (time, value)

  double operator()(double t) const {
    double v = steps.front().second;
    for (const auto& [tk, vk] : steps) {
      if (tk > t) break;
      v = vk;
    }
    return v;
  }
  static ReferenceSignal constant(double v) { return {{{0.0, v}}}; }
};

struct ReferenceModel {
  Mat A0;
  Vec b0;
  ReferenceSignal r;
  Vec x0;

  int n() const { return static_cast<int>(A0.rows()); }
};

inline ReferenceModel vehicle_reference(double a1, double a2, double b1, Vec x0,
                                        ReferenceSignal r = {}) {
  ReferenceModel m;
  m.A0 = Mat{{0.0, 1.0}, {a1, a2}};
  m.b0 = Vec{{0.0, b1}};
  m.r = std::move(r);
  m.x0 = std::move(x0);
  return m;
}

inline bool is_hurwitz(const Mat& A, double tol = 0.0) {
  Eigen::EigenSolver<Mat> es(A, /*computeEigenvectors=*/false);
  for (int k = 0; k < A.rows(); ++k)
    if (es.eigenvalues()[k].real() >= -tol) return false;
  return true;
}

inline Vec agent_derivative(const AgentPlant& p, const Vec& x, double u) {
  return p.A * x + p.b * (u + p.f(x));
}

inline Vec reference_derivative(const ReferenceModel& m, const Vec& x, double t) {
  return m.A0 * x + m.b0 * m.r(t);
}

}  // namespace dmrac
