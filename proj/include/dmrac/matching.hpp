#pragma once

// Matching conditions, the Lyapunov solve, and the ideal gains the adaptive
// laws are expected to approach. All of this is simulator-side knowledge used
// for diagnostics and tests; controllers never read it.
//
//   feedback matching:  A_0 = A_i + b_i k_mᵀ,   b_0 = b_i k_r
//   coupling matching:  A_i = A_j + b_j k_mᵀ,   b_i = b_j k_r
//
// For a directed edge i←j, the constant gains that reduce the pair-error
// dynamics to  d/dt(x_i − x_j) = A_0 (x_i − x_j) + b_i [adaptation residual]
// are
//   k_edge      = solve(b_i, A_j − A_i)
//   k_consensus = solve(b_i, A_0 − A_j)   [own-state control variant]
//               = solve(b_i, A_0 − A_i)   [neighbor-state control variant]
//   k_ff        = solve(b_i, b_j)
// where solve(b, M) is the least-squares k with b kᵀ = M, exact whenever M's
// rows vanish outside b's support (true for the vehicle form).

#include <optional>

#include "dmrac/core.hpp"
#include "dmrac/plant.hpp"

namespace dmrac {

inline constexpr double kMatchingTol = 1e-8;

// Least-squares k with b kᵀ = M; throws if the residual exceeds the threshold.
inline Vec solve_channel(const Vec& b, const Mat& M, double tol = kMatchingTol) {
  double bb = b.squaredNorm();
  if (bb == 0.0) throw MatchingError("input vector b is zero");
  Vec k = M.transpose() * b / bb;
  double resid = (b * k.transpose() - M).cwiseAbs().maxCoeff();
  if (resid > tol)
    throw MatchingError("matching condition infeasible, residual " +
                        std::to_string(resid));
  return k;
}

inline double solve_channel_scalar(const Vec& b, const Vec& target,
                                   double tol = kMatchingTol) {
  double bb = b.squaredNorm();
  if (bb == 0.0) throw MatchingError("input vector b is zero");
  double k = b.dot(target) / bb;
  double resid = (b * k - target).cwiseAbs().maxCoeff();
  if (resid > tol)
    throw MatchingError("input-channel matching infeasible, residual " +
                        std::to_string(resid));
  return k;
}

struct FeedbackGains {
  Vec k_m;
  double k_r;
};

struct CouplingGains {
  Vec k_m;
  double k_r;
};

// Gains with which agent i tracks the reference model through its own input.
inline FeedbackGains feedback_matching(const AgentPlant& p,
                                       const ReferenceModel& ref) {
  return {solve_channel(p.b, ref.A0 - p.A), solve_channel_scalar(p.b, ref.b0)};
}

// Gains with which agent j's channel replicates agent i:
// A_i = A_j + b_j k_mᵀ and b_i = b_j k_r.
inline CouplingGains coupling_matching(const AgentPlant& pi,
                                       const AgentPlant& pj) {
  return {solve_channel(pj.b, pi.A - pj.A), solve_channel_scalar(pj.b, pi.b)};
}

// P with P A0 + A0ᵀ P = −Q, solved by vectorization; input Q is symmetrized,
// output is exactly symmetric.
inline Mat solve_lyapunov(const Mat& A0, const Mat& Q) {
  const int n = static_cast<int>(A0.rows());
  Mat Qs = 0.5 * (Q + Q.transpose());
  auto kron = [n](const Mat& X, const Mat& Y) {
    Mat K(n * n, n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        K.block(i * n, j * n, n, n) = X(i, j) * Y;
    return K;
  };
  // column-major vec: vec(P A0) = (A0ᵀ ⊗ I) vec(P), vec(A0ᵀ P) = (I ⊗ A0ᵀ) vec(P)
  Mat I = Mat::Identity(n, n);
  Mat K = kron(A0.transpose(), I) + kron(I, A0.transpose());
  Vec q = Eigen::Map<const Vec>(Qs.data(), n * n);
  Vec p = K.fullPivLu().solve(-q);
  Mat P = Eigen::Map<const Mat>(p.data(), n, n);
  return 0.5 * (P + P.transpose());
}

// Radius of the ball the synchronization error settles into when the
// nonlinearity is approximated within eps0: 2 ‖P b‖ eps0 / λ_min(Q).
inline double ultimate_bound(const Mat& P, const Vec& b, const Mat& Q,
                             double eps0) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Q + Q.transpose()));
  return 2.0 * (P * b).norm() * eps0 / es.eigenvalues().minCoeff();
}

enum class GainRegressor { own, neighbor };  // state multiplying per-edge gains

// Constant gains zeroing the adaptation residual on edge i←j (see header
// comment). Leader edges (j = 0) reduce to feedback matching with no
// consensus part.
struct EdgeIdealGains {
  Vec k_edge;
  Vec k_consensus;
  double k_ff;
};

inline EdgeIdealGains edge_ideal_gains(const AgentPlant& follower,
                                       const AgentPlant& neighbor,
                                       const ReferenceModel& ref,
                                       GainRegressor regressor) {
  EdgeIdealGains g;
  g.k_edge = solve_channel(follower.b, neighbor.A - follower.A);
  g.k_consensus = solve_channel(
      follower.b, regressor == GainRegressor::own ? ref.A0 - neighbor.A
                                                  : ref.A0 - follower.A);
  g.k_ff = solve_channel_scalar(follower.b, neighbor.b);
  return g;
}

inline EdgeIdealGains leader_edge_ideal_gains(const AgentPlant& follower,
                                              const ReferenceModel& ref) {
  EdgeIdealGains g;
  g.k_edge = solve_channel(follower.b, ref.A0 - follower.A);
  g.k_consensus = Vec::Zero(follower.n());
  g.k_ff = solve_channel_scalar(follower.b, ref.b0);
  return g;
}

}  // namespace dmrac
