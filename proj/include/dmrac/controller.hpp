#pragma once

// Controller configuration and the pieces of the control/adaptation laws that
// are useful standalone. Followers run, per in-neighbor j,
//
//   u_i = α ( Σ_j k_edge_ijᵀ x_c + k_consensus_iᵀ E_i + Σ_j ff_term_j − θ_iᵀ φ_i )
//
// with α = 1/(number of in-neighbors), E_i = Σ_j (x_i − x_j),
// x_c the own or neighbor state depending on the configured regressor, and
// ff_term_j = k_ff_ij·r on a leader edge, k_ff_ij·u_j in communicated mode, or
// the estimate û_ji in estimated mode. A follower whose only in-neighbor is
// the leader omits the consensus term (plain reference tracking).
//
// Adaptation, with s = b_0ᵀ P E_i and s' = E_iᵀ P b_i:
//   k̇_edge_ij    = −sgn(k*_ri) γ s x_i
//   k̇_consensus_i = −sgn(k*_ri) γ s E_i
//   ḟf_ij        = −sgn(k*_ri) γ s r          (leader edge)
//                = −sgn(k*_ri) γ s u           (communicated; u = u_j or u_i
//                                               per the configured regressor)
//                = −sgn(k*_ri) γ s             (estimated)
//   θ̇_i          = −γ s' φ_i
//   Ẇ_i          = −γ s' x̄_i (v ∘ σ_i)ᵀ
// where φ_i = [1; σ(W_iᵀ x̄_i)], x̄_i = [1; x_i], σ(z) = 1/(1+e^{−a z}).

#include <cmath>
#include <map>
#include <vector>

#include "dmrac/core.hpp"
#include "dmrac/graph.hpp"
#include "dmrac/matching.hpp"

namespace dmrac {

enum class ControlMode { communicated, estimated, open_loop };

// Which input drives the feedforward-gain adaptation on follower edges.
// `own` is the law as printed (rate driven by the agent's own u_i);
// `neighbor` is the variant the stability proof's cancellation requires
// (rate driven by the communicated u_j). The printed form escapes in finite
// time even for a two-vehicle chain, so bundled presets select `neighbor`.
enum class FeedforwardRegressor { own, neighbor };

// Regressor for the inner NN weight matrix W.
// `sigmoid` is the law as printed: Ẇ = ±γ s x̄ (v ⊙ σ)ᵀ. Because σ does not
// vanish when a hidden unit saturates, W can integrate a persistent error
// bias indefinitely. `sigmoid_prime` replaces σ with its derivative
// aσ(1−σ) (the standard backpropagation regressor), which decays at
// saturation and self-limits the drift. With the positive rate sign both
// stay bounded in the bundled scenarios, so presets keep the printed form.
enum class WLaw { sigmoid, sigmoid_prime };

// Sign applied to the NN weight rates. The control subtracts θᵀφ, so the
// energy-decrease argument needs the weights driven by +γ·s·φ (and likewise
// for W): with that pairing the θ-loop cross terms cancel in V̇. `negative`
// reproduces the commonly transcribed form θ̇ = −γ·s·φ, which closes the
// loop with positive feedback — the scalar case has a strictly positive
// eigenvalue, so every NN-adapting run escapes within seconds no matter the
// integrator. Bundled presets use `positive`.
enum class NNRateSign { negative, positive };

struct ControllerSettings {
  double gamma = 10.0;
  int m = 6;          // hidden sigmoid units
  double a = 1.0;     // sigmoid slope
  unsigned seed = 0;
  ControlMode mode = ControlMode::communicated;
  double sign_kr = 1.0;   // sgn(k*_ri), prior knowledge
  Vec sign_kr_per_agent;  // optional per-follower override (entry i−1 for agent i)
  GainRegressor kmij_state = GainRegressor::neighbor;
  FeedforwardRegressor krij_input = FeedforwardRegressor::own;
  WLaw w_law = WLaw::sigmoid;
  NNRateSign nn_rate_sign = NNRateSign::negative;
  bool adapt_gains = true;
  bool adapt_nn = true;
  bool preload_ideal_gains = false;  // start gains at their matched values
  double nn_init_range = 0.3;  // theta, W entries drawn from U[−range, range]
  Vec nn_v;                    // v vector (m entries); empty means all-ones
  Mat Q;                       // Lyapunov right-hand side; empty means diag(100,1)

  Vec v_or_default() const {
    return nn_v.size() ? nn_v : Vec::Ones(m);
  }
  double sign_for(int follower) const {
    if (sign_kr_per_agent.size() >= follower) return sign_kr_per_agent[follower - 1];
    return sign_kr;
  }
  Mat q_or_default(int n) const {
    if (Q.size()) return Q;
    Mat q = Mat::Identity(n, n);
    q(0, 0) = 100.0;
    return q;
  }
};

inline double sigmoid(double z, double a) { return 1.0 / (1.0 + std::exp(-a * z)); }

// φ = [1; σ(Wᵀ x̄)] with x̄ = [1; x].
inline Vec nn_basis(const Mat& W, const Vec& x, double a) {
  Vec xbar(x.size() + 1);
  xbar[0] = 1.0;
  xbar.tail(x.size()) = x;
  Vec phi(W.cols() + 1);
  phi[0] = 1.0;
  phi.tail(W.cols()) = (1.0 + (-a * (W.transpose() * xbar).array()).exp()).inverse();
  return phi;
}

// ---------------------------------------------------------------------------
// Standalone law pieces. These value types and pure functions express one
// agent's laws directly on named quantities; the engine evaluates the same
// laws on its packed state vector and additionally applies the configured
// regressor / sign variants. The functions below use the base forms: own-state
// edge-gain rate, own-input feedforward rate, and the minus-sign weight rates.

struct NeuralApprox {
  Vec theta;  // (m+1) outer weights
  Mat W;      // (n+1)×m inner weights
  Vec v;      // m fixed bias gates
  double a = 1.0;

  int m() const { return static_cast<int>(W.cols()); }
  double term(const Vec& x) const { return theta.dot(nn_basis(W, x, a)); }
};

// φ = [1; σ(Wᵀ x̄)] for a configured approximator.
inline Vec sigmoid_basis(const NeuralApprox& nn, const Vec& x) {
  return nn_basis(nn.W, x, nn.a);
}

struct LeaderControllerState {
  Vec k_m;            // adaptive state-feedback gain
  double k_r = 0.0;   // adaptive reference feedforward gain
  NeuralApprox nn;
  double gamma = 10.0;
  double sign_kr = 1.0;
};

// u = k_mᵀ x + k_r r − θᵀφ(x).
inline double leader_control(const LeaderControllerState& st, const Vec& x,
                             double r) {
  return st.k_m.dot(x) + st.k_r * r - st.nn.term(x);
}

struct LeaderRates {
  Vec k_m;
  double k_r;
};

// k̇_m = −sgn(k*_r) γ (b0ᵀP(x−x0)) x ;  k̇_r = −sgn(k*_r) γ (b0ᵀP(x−x0)) r.
inline LeaderRates leader_adaptive_rates(const LeaderControllerState& st,
                                         const Vec& x, const Vec& x0, double r,
                                         const Mat& P, const Vec& b0) {
  const double g = -st.sign_kr * st.gamma * b0.dot(P * (x - x0));
  return {g * x, g * r};
}

struct NNRates {
  Vec theta;
  Mat W;
};

// θ̇ = −γ s φ ;  Ẇ = −γ s x̄ (v ⊙ σ)ᵀ with s = e_aggᵀ P b (base form; the
// engine flips the sign when NNRateSign::positive is configured).
inline NNRates nn_adaptive_rates(const NeuralApprox& nn, double gamma,
                                 const Vec& x, const Vec& e_agg, const Mat& P,
                                 const Vec& b) {
  Vec xbar(x.size() + 1);
  xbar[0] = 1.0;
  xbar.tail(x.size()) = x;
  Vec sig = (1.0 + (-nn.a * (nn.W.transpose() * xbar).array()).exp()).inverse();
  Vec phi(nn.m() + 1);
  phi[0] = 1.0;
  phi.tail(nn.m()) = sig;
  const double s = e_agg.dot(P * b);
  NNRates out;
  out.theta = (-gamma * s) * phi;
  out.W = (-gamma * s) * xbar * nn.v.cwiseProduct(sig).transpose();
  return out;
}

// Σ_j (x_i − x_j) over in-neighbors (the aggregate consensus error).
inline Vec neighbor_error(const GraphTopology& g, int i,
                          const std::vector<Vec>& states) {
  Vec E = Vec::Zero(states.at(i).size());
  for (int j : g.in_neighbors(i)) E += states[i] - states.at(j);
  return E;
}

struct FollowerControllerState {
  std::map<int, Vec> k_mij;     // per follower in-neighbor
  Vec k_mi;                     // consensus-error gain
  std::map<int, double> k_rij;  // communicated mode
  std::map<int, double> u_hat;  // estimated mode (û_ji)
  NeuralApprox nn;
  double gamma = 10.0;
  double sign_kr = 1.0;
  ControlMode mode = ControlMode::communicated;
};

// u_i = α ( Σ_j k_mijᵀ x_j + k_miᵀ E + Σ_j k_rij u_j − nn_term ), α = 1/|N_i|.
// Leader-edge terms are the LeaderControllerState form and are not part of
// this sum; maps are keyed by follower in-neighbors only.
inline double follower_control_communicated(const FollowerControllerState& st,
                                            const GraphTopology& g, int i,
                                            const std::vector<Vec>& states,
                                            const std::vector<double>& controls,
                                            double nn_term) {
  const auto& nbrs = g.in_neighbors(i);
  Vec E = Vec::Zero(states.at(i).size());
  double acc = 0.0;
  for (int j : nbrs) {
    E += states[i] - states.at(j);
    if (j == 0) continue;
    if (static_cast<int>(controls.size()) <= j)
      throw ValidationError("missing control for neighbor " + std::to_string(j));
    acc += st.k_mij.at(j).dot(states[j]) + st.k_rij.at(j) * controls[j];
  }
  acc += st.k_mi.dot(E);
  return (acc - nn_term) / static_cast<double>(nbrs.size());
}

struct FollowerRates {
  std::map<int, Vec> k_mij;
  Vec k_mi;
  std::map<int, double> k_rij;
};

// With s = b0ᵀ P E:  k̇_mij = −sgn γ s x_i (one copy per neighbor),
// k̇_mi = −sgn γ s E, k̇_rij = −sgn γ s u_i (base form; the engine swaps in
// x_j / u_j when the neighbor-regressor variants are configured).
inline FollowerRates follower_adaptive_rates(const FollowerControllerState& st,
                                             const GraphTopology& g, int i,
                                             const std::vector<Vec>& states,
                                             double u_i, const Mat& P,
                                             const Vec& b0) {
  const Vec E = neighbor_error(g, i, states);
  const double gs = -st.sign_kr * st.gamma * b0.dot(P * E);
  FollowerRates out;
  out.k_mi = gs * E;
  for (int j : g.in_neighbors(i)) {
    if (j == 0) continue;
    out.k_mij[j] = gs * states[i];
    out.k_rij[j] = gs * u_i;
  }
  return out;
}

// u_i = α ( Σ_j k_mijᵀ x_j + k_miᵀ E + Σ_j û_ji − nn_term ): the estimate
// û_ji stands in for k_rij u_j, so no neighbor control is needed.
inline double follower_control_estimated(const FollowerControllerState& st,
                                         const GraphTopology& g, int i,
                                         const std::vector<Vec>& states,
                                         double nn_term) {
  const auto& nbrs = g.in_neighbors(i);
  Vec E = Vec::Zero(states.at(i).size());
  double acc = 0.0;
  for (int j : nbrs) {
    E += states[i] - states.at(j);
    if (j == 0) continue;
    acc += st.k_mij.at(j).dot(states[j]) + st.u_hat.at(j);
  }
  acc += st.k_mi.dot(E);
  return (acc - nn_term) / static_cast<double>(nbrs.size());
}

// û̇_ji = −sgn(k*_r) γ (b0ᵀ P E): one identical scalar rate per neighbor.
inline double input_estimator_rate(const FollowerControllerState& st,
                                   const GraphTopology& g, int i,
                                   const std::vector<Vec>& states, const Mat& P,
                                   const Vec& b0) {
  return -st.sign_kr * st.gamma * b0.dot(P * neighbor_error(g, i, states));
}

}  // namespace dmrac
