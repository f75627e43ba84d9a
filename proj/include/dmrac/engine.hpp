#pragma once

// Coupled integration of reference model, follower plants, adaptive gains,
// neural-network weights, and input estimators, with trace recording and
// Lyapunov / synchronization diagnostics.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "dmrac/controller.hpp"
#include "dmrac/layout.hpp"
#include "dmrac/matching.hpp"
#include "dmrac/scenario.hpp"

namespace dmrac {

struct SimulationTrace {
  StateLayout layout;
  int n_followers = 0;
  std::vector<double> t;
  std::vector<Vec> state;     // packed snapshot per sample (see layout)
  std::vector<Vec> controls;  // u_1..u_N per sample
  std::vector<double> r;      // reference input per sample
  std::vector<Vec> err_ref;   // per follower ‖x_i − x_0‖
  std::vector<Vec> err_nbr;   // per follower ‖Σ_j (x_i − x_j)‖
  std::vector<double> V;      // empirical Lyapunov diagnostic per sample
  std::optional<double> diverged_at;

  int samples() const { return static_cast<int>(t.size()); }
  // State of agent i (0 = reference) at a recorded sample.
  Vec x_at(int sample, int agent) const {
    int off = agent == 0 ? layout.x0() : layout.x(agent);
    return state[sample].segment(off, layout.n());
  }
  double u_at(int sample, int follower) const {
    return controls[sample][follower - 1];
  }
};

namespace detail {

struct PlanAgent {
  Mat A;
  Vec b;
  UncertaintySpec f;
  Vec Pb;  // P b_i
  double alpha = 1.0;
  double sgn = 1.0;
  bool pure_leader = false;  // sole in-neighbor is the leader
  std::vector<int> nbrs;
  int xoff = 0, consoff = 0, woff = 0, thoff = 0;
  std::vector<int> goff, foff;
};

struct EnginePlan {
  int n = 0, m = 0, nf = 0;
  StateLayout L;
  Mat A0;
  Vec b0, b0P;  // b0P = Pᵀ b0, so s = b0P · E
  ReferenceSignal r;
  double gamma = 0, a = 1;
  ControlMode mode = ControlMode::communicated;
  GainRegressor kmij_state = GainRegressor::neighbor;
  FeedforwardRegressor krij_input = FeedforwardRegressor::own;
  WLaw w_law = WLaw::sigmoid;
  NNRateSign nn_rate_sign = NNRateSign::negative;
  bool adapt_gains = true, adapt_nn = true;
  Vec v;
  std::vector<int> order;
  std::vector<PlanAgent> ag;  // 1-based

  static EnginePlan build(const ScenarioConfig& scn) {
    EnginePlan p;
    p.n = scn.n();
    p.m = scn.controller.m;
    p.nf = scn.topology.n_followers();
    p.L = StateLayout(scn.topology, p.n, p.m);
    p.A0 = scn.reference.A0;
    p.b0 = scn.reference.b0;
    p.r = scn.reference.r;
    p.gamma = scn.controller.gamma;
    p.a = scn.controller.a;
    p.mode = scn.controller.mode;
    p.kmij_state = scn.controller.kmij_state;
    p.krij_input = scn.controller.krij_input;
    p.w_law = scn.controller.w_law;
    p.nn_rate_sign = scn.controller.nn_rate_sign;
    p.adapt_gains = scn.controller.adapt_gains;
    p.adapt_nn = scn.controller.adapt_nn;
    p.v = scn.controller.v_or_default();
    p.order = scn.topology.evaluation_order();
    Mat P = solve_lyapunov(scn.reference.A0,
                           scn.controller.q_or_default(p.n));
    p.b0P = P.transpose() * p.b0;
    p.ag.resize(p.nf + 1);
    for (int i = 1; i <= p.nf; ++i) {
      auto& a = p.ag[i];
      const auto& plant = scn.agent(i);
      a.A = plant.A;
      a.b = plant.b;
      a.f = plant.f;
      a.Pb = P * plant.b;
      a.sgn = scn.controller.sign_for(i);
      a.nbrs = scn.topology.in_neighbors(i);
      a.alpha = 1.0 / static_cast<double>(a.nbrs.size());
      a.pure_leader = a.nbrs.size() == 1 && a.nbrs[0] == 0;
      a.xoff = p.L.x(i);
      a.consoff = p.L.consensus_gain(i);
      a.woff = p.L.w(i);
      a.thoff = p.L.theta(i);
      for (int jidx = 0; jidx < static_cast<int>(a.nbrs.size()); ++jidx) {
        a.goff.push_back(p.L.edge_gain(i, jidx));
        a.foff.push_back(p.L.edge_ff(i, jidx));
      }
    }
    return p;
  }
};

struct Workspace {
  Vec k1, k2, k3, k4, ytmp, u, ustage;

  explicit Workspace(const EnginePlan& p) {
    int sz = p.L.size();
    k1 = k2 = k3 = k4 = ytmp = Vec::Zero(sz);
    u = ustage = Vec::Zero(p.nf + 1);
  }
};

// One derivative evaluation; controls are produced in dependency order and
// written to `u` (1-based).
inline void rhs(const EnginePlan& p, double t, const Vec& y, Vec& dy, Vec& u) {
  const int n = p.n, m = p.m;
  const double rval = p.r(t);
  dy.setZero();
  dy.segment(0, n).noalias() = p.A0 * y.segment(0, n);
  dy.segment(0, n).noalias() += p.b0 * rval;

  thread_local Vec xbar, z, sig, phi, vsig, E;
  if (xbar.size() != n + 1) xbar = Vec::Zero(n + 1);
  if (z.size() != m) {
    z = Vec::Zero(m);
    sig = Vec::Zero(m);
    vsig = Vec::Zero(m);
    phi = Vec::Zero(m + 1);
  }
  if (E.size() != n) E = Vec::Zero(n);

  for (int i : p.order) {
    const auto& ag = p.ag[i];
    auto xi = y.segment(ag.xoff, n);

    if (p.mode == ControlMode::open_loop) {
      u[i] = 0.0;
      dy.segment(ag.xoff, n).noalias() = ag.A * xi;
      dy.segment(ag.xoff, n).noalias() += ag.b * (u[i] + ag.f(xi));
      continue;
    }

    E.setZero();
    for (int j : ag.nbrs)
      E += xi - y.segment(j == 0 ? p.L.x0() : p.L.x(j), n);
    const double s = p.b0P.dot(E);

    xbar[0] = 1.0;
    xbar.tail(n) = xi;
    Eigen::Map<const Mat> W(y.data() + ag.woff, n + 1, m);
    z.noalias() = W.transpose() * xbar;
    sig = (1.0 + (-p.a * z.array()).exp()).inverse();
    phi[0] = 1.0;
    phi.tail(m) = sig;
    Eigen::Map<const Vec> th(y.data() + ag.thoff, m + 1);
    const double nn = th.dot(phi);

    double acc = 0.0;
    for (size_t jidx = 0; jidx < ag.nbrs.size(); ++jidx) {
      const int j = ag.nbrs[jidx];
      Eigen::Map<const Vec> ke(y.data() + ag.goff[jidx], n);
      const double ff = y[ag.foff[jidx]];
      if (j == 0) {
        acc += ke.dot(xi) + ff * rval;
      } else {
        if (p.kmij_state == GainRegressor::own)
          acc += ke.dot(xi);
        else
          acc += ke.dot(y.segment(p.L.x(j), n));
        acc += p.mode == ControlMode::estimated ? ff : ff * u[j];
      }
    }
    if (!ag.pure_leader)
      acc += Eigen::Map<const Vec>(y.data() + ag.consoff, n).dot(E);
    u[i] = ag.alpha * (acc - nn);

    dy.segment(ag.xoff, n).noalias() = ag.A * xi;
    dy.segment(ag.xoff, n).noalias() += ag.b * (u[i] + ag.f(xi));

    if (p.adapt_gains) {
      const double gs = -ag.sgn * p.gamma * s;
      for (size_t jidx = 0; jidx < ag.nbrs.size(); ++jidx) {
        const int j = ag.nbrs[jidx];
        dy.segment(ag.goff[jidx], n) = gs * xi;
        if (j == 0)
          dy[ag.foff[jidx]] = gs * rval;
        else if (p.mode == ControlMode::estimated)
          dy[ag.foff[jidx]] = gs;
        else
          dy[ag.foff[jidx]] =
              gs * (p.krij_input == FeedforwardRegressor::neighbor ? u[j] : u[i]);
      }
      if (!ag.pure_leader) dy.segment(ag.consoff, n) = gs * E;
    }
    if (p.adapt_nn) {
      const double nnsgn = p.nn_rate_sign == NNRateSign::positive ? 1.0 : -1.0;
      const double sp = nnsgn * E.dot(ag.Pb);
      dy.segment(ag.thoff, m + 1) = (p.gamma * sp) * phi;
      if (p.w_law == WLaw::sigmoid_prime)
        vsig = (p.v.array() * (p.a * sig.array() * (1.0 - sig.array()))).matrix();
      else
        vsig = p.v.cwiseProduct(sig);
      Eigen::Map<Mat> dW(dy.data() + ag.woff, n + 1, m);
      dW.noalias() = (p.gamma * sp) * xbar * vsig.transpose();
    }
  }
}

// True when any entry is non-finite or exceeds the guard in magnitude.
inline bool exceeds_guard(const Vec& y, double guard) {
  for (int k = 0; k < y.size(); ++k)
    if (!(std::abs(y[k]) <= guard)) return true;
  return false;
}

}  // namespace detail

// Deterministic initial packed state: plant initial conditions, zero gains
// and estimates, and seeded uniform NN weights. Weight entries are drawn in
// layout order (followers ascending, W before theta, W column-major) from
// U[−range, range] using a 32-bit mersenne generator mapped as rng()/2³².
inline Vec initial_state(const ScenarioConfig& scn) {
  StateLayout L(scn.topology, scn.n(), scn.controller.m);
  Vec y = Vec::Zero(L.size());
  y.segment(L.x0(), scn.n()) = scn.reference.x0;
  std::mt19937 rng(scn.controller.seed);
  auto uniform = [&rng](double range) {
    double u01 = rng() * (1.0 / 4294967296.0);
    return range * (2.0 * u01 - 1.0);
  };
  for (int i = 1; i <= scn.topology.n_followers(); ++i) {
    y.segment(L.x(i), scn.n()) = scn.agent(i).x0;
    const int wlen = (scn.n() + 1) * scn.controller.m;
    for (int k = 0; k < wlen; ++k)
      y[L.w(i) + k] = uniform(scn.controller.nn_init_range);
    for (int k = 0; k <= scn.controller.m; ++k)
      y[L.theta(i) + k] = uniform(scn.controller.nn_init_range);
  }
  if (scn.controller.preload_ideal_gains) {
    for (int i = 1; i <= scn.topology.n_followers(); ++i) {
      const auto& nbrs = scn.topology.in_neighbors(i);
      bool pure_leader = nbrs.size() == 1 && nbrs[0] == 0;
      for (size_t jidx = 0; jidx < nbrs.size(); ++jidx) {
        EdgeIdealGains g =
            nbrs[jidx] == 0
                ? leader_edge_ideal_gains(scn.agent(i), scn.reference)
                : edge_ideal_gains(scn.agent(i), scn.agent(nbrs[jidx]),
                                   scn.reference, scn.controller.kmij_state);
        y.segment(L.edge_gain(i, jidx), scn.n()) = g.k_edge;
        y[L.edge_ff(i, jidx)] = g.k_ff;  // estimated mode refines from here
        if (!pure_leader)
          y.segment(L.consensus_gain(i), scn.n()) +=
              g.k_consensus / static_cast<double>(nbrs.size());
      }
    }
  }
  return y;
}

// One integrator step from (t, y); returns the state at t + dt.
inline Vec step(const ScenarioConfig& scn, const Vec& y, double t, double dt) {
  auto plan = detail::EnginePlan::build(scn);
  detail::Workspace ws(plan);
  Vec out = y;
  detail::rhs(plan, t, out, ws.k1, ws.u);
  if (scn.integration.method == IntegrationSettings::Method::euler)
    return out + dt * ws.k1;
  ws.ytmp = out + (0.5 * dt) * ws.k1;
  detail::rhs(plan, t + 0.5 * dt, ws.ytmp, ws.k2, ws.ustage);
  ws.ytmp = out + (0.5 * dt) * ws.k2;
  detail::rhs(plan, t + 0.5 * dt, ws.ytmp, ws.k3, ws.ustage);
  ws.ytmp = out + dt * ws.k3;
  detail::rhs(plan, t + dt, ws.ytmp, ws.k4, ws.ustage);
  return out + (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
}

// Integrates the scenario, recording every record_stride-th step plus the
// final one. On a guard trip the trace ends at the last finite sample and
// diverged_at is set. The Lyapunov diagnostic column V is filled afterwards
// (see lyapunov_diagnostic).
inline SimulationTrace run(const ScenarioConfig& scn);

// Per-follower synchronization summary.
struct SyncMetrics {
  Vec final_err;    // ‖x_i − x_0‖ at the last sample
  Vec peak_err;     // max over samples
  Vec time_to_tol;  // first time after which the error stays below tol
  double tol = 0.1;
};

inline SyncMetrics sync_metrics(const SimulationTrace& tr, double tol = 0.1) {
  SyncMetrics m;
  m.tol = tol;
  const int nf = tr.n_followers, ns = tr.samples();
  m.final_err = Vec::Zero(nf);
  m.peak_err = Vec::Zero(nf);
  m.time_to_tol =
      Vec::Constant(nf, std::numeric_limits<double>::infinity());
  for (int i = 0; i < nf; ++i) {
    m.final_err[i] = tr.err_ref[ns - 1][i];
    double entered = std::numeric_limits<double>::infinity();
    for (int k = 0; k < ns; ++k) {
      const double e = tr.err_ref[k][i];
      m.peak_err[i] = std::max(m.peak_err[i], e);
      if (e < tol) {
        if (!std::isfinite(entered)) entered = tr.t[k];
      } else {
        entered = std::numeric_limits<double>::infinity();
      }
    }
    m.time_to_tol[i] = entered;
  }
  return m;
}

// û_ji − u_j along the trace for follower i and its jidx-th in-neighbor
// (estimated mode; the neighbor must not be the leader).
inline std::vector<double> estimator_error(const SimulationTrace& tr,
                                           const ScenarioConfig& scn, int i,
                                           int jidx) {
  const int j = scn.topology.in_neighbors(i).at(jidx);
  std::vector<double> out(tr.samples());
  for (int k = 0; k < tr.samples(); ++k)
    out[k] = tr.state[k][tr.layout.edge_ff(i, jidx)] - tr.u_at(k, j);
  return out;
}

// Empirical Lyapunov diagnostic. Gain mismatches are measured against the
// matched ideal gains; theta against its final adapted value (the analytic
// ideal weights are unknowable); in estimated mode the feedforward term uses
// û_ji − k_ff·u_j. Fills tr.V.
inline void lyapunov_diagnostic(SimulationTrace& tr, const ScenarioConfig& scn) {
  const int n = scn.n(), nf = tr.n_followers, ns = tr.samples();
  if (ns == 0) return;
  Mat P = solve_lyapunov(scn.reference.A0, scn.controller.q_or_default(n));
  const double gamma = scn.controller.gamma;
  struct EdgeOracle {
    EdgeIdealGains g;
    int j;
  };
  std::vector<std::vector<EdgeOracle>> oracle(nf + 1);
  std::vector<Vec> cons_ideal(nf + 1);
  std::vector<double> kr_abs(nf + 1, 1.0);
  for (int i = 1; i <= nf; ++i) {
    kr_abs[i] = std::abs(feedback_matching(scn.agent(i), scn.reference).k_r);
    const auto& nbrs = scn.topology.in_neighbors(i);
    cons_ideal[i] = Vec::Zero(n);
    for (int j : nbrs) {
      EdgeOracle eo;
      eo.j = j;
      eo.g = j == 0 ? leader_edge_ideal_gains(scn.agent(i), scn.reference)
                    : edge_ideal_gains(scn.agent(i), scn.agent(j),
                                       scn.reference, scn.controller.kmij_state);
      cons_ideal[i] += eo.g.k_consensus / static_cast<double>(nbrs.size());
      oracle[i].push_back(std::move(eo));
    }
  }
  tr.V.assign(ns, 0.0);
  const Vec& yfin = tr.state[ns - 1];
  for (int k = 0; k < ns; ++k) {
    const Vec& y = tr.state[k];
    double V = 0.0;
    for (int i = 1; i <= nf; ++i) {
      Vec E = Vec::Zero(n);
      const auto& nbrs = scn.topology.in_neighbors(i);
      for (int j : nbrs)
        E += y.segment(tr.layout.x(i), n) -
             y.segment(j == 0 ? tr.layout.x0() : tr.layout.x(j), n);
      V += E.dot(P * E);
      const double denom = gamma * kr_abs[i];
      bool pure_leader = nbrs.size() == 1 && nbrs[0] == 0;
      if (!pure_leader)
        V += (y.segment(tr.layout.consensus_gain(i), n) - cons_ideal[i])
                 .squaredNorm() /
             denom;
      for (size_t jidx = 0; jidx < nbrs.size(); ++jidx) {
        const auto& eo = oracle[i][jidx];
        V += (y.segment(tr.layout.edge_gain(i, jidx), n) - eo.g.k_edge)
                 .squaredNorm() /
             denom;
        const double ff = y[tr.layout.edge_ff(i, jidx)];
        double ff_err;
        if (eo.j != 0 && scn.controller.mode == ControlMode::estimated)
          ff_err = ff - eo.g.k_ff * tr.u_at(k, eo.j);
        else
          ff_err = ff - eo.g.k_ff;
        V += ff_err * ff_err / denom;
      }
      const int mth = scn.controller.m + 1;
      Vec th_err = y.segment(tr.layout.theta(i), mth) -
                   yfin.segment(tr.layout.theta(i), mth);
      V += th_err.squaredNorm() / gamma;
    }
    tr.V[k] = V;
  }
}

inline SimulationTrace run(const ScenarioConfig& scn) {
  auto bad = scn.validate();
  if (!bad.empty()) throw ValidationError(bad);
  auto plan = detail::EnginePlan::build(scn);
  detail::Workspace ws(plan);

  SimulationTrace tr;
  tr.layout = plan.L;
  tr.n_followers = plan.nf;

  const double dt = scn.integration.dt;
  const long long nsteps = std::llround(scn.integration.t_end / dt);
  const int stride = scn.integration.record_stride;
  const bool rk4 = scn.integration.method == IntegrationSettings::Method::rk4;
  const double guard = scn.diagnostics.guard_norm;

  Vec y = initial_state(scn);
  auto record = [&](double t, const Vec& state, const Vec& u) {
    tr.t.push_back(t);
    tr.state.push_back(state);
    tr.controls.push_back(u.tail(plan.nf));
    tr.r.push_back(plan.r(t));
    Vec er(plan.nf), en(plan.nf);
    for (int i = 1; i <= plan.nf; ++i) {
      auto xi = state.segment(plan.L.x(i), plan.n);
      er[i - 1] = (xi - state.segment(plan.L.x0(), plan.n)).norm();
      Vec E = Vec::Zero(plan.n);
      for (int j : plan.ag[i].nbrs)
        E += xi - state.segment(j == 0 ? plan.L.x0() : plan.L.x(j), plan.n);
      en[i - 1] = E.norm();
    }
    tr.err_ref.push_back(std::move(er));
    tr.err_nbr.push_back(std::move(en));
  };

  for (long long k = 0;; ++k) {
    const double t = k * dt;
    detail::rhs(plan, t, y, ws.k1, ws.u);
    if (k % stride == 0 || k == nsteps) record(t, y, ws.u);
    if (k == nsteps) break;
    if (rk4) {
      ws.ytmp = y + (0.5 * dt) * ws.k1;
      detail::rhs(plan, t + 0.5 * dt, ws.ytmp, ws.k2, ws.ustage);
      ws.ytmp = y + (0.5 * dt) * ws.k2;
      detail::rhs(plan, t + 0.5 * dt, ws.ytmp, ws.k3, ws.ustage);
      ws.ytmp = y + dt * ws.k3;
      detail::rhs(plan, t + dt, ws.ytmp, ws.k4, ws.ustage);
      y += (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
    } else {
      y += dt * ws.k1;
    }
    if (detail::exceeds_guard(y, guard)) {
      tr.diverged_at = (k + 1) * dt;
      break;
    }
  }
  if (scn.controller.mode != ControlMode::open_loop) {
    try {
      lyapunov_diagnostic(tr, scn);
    } catch (const MatchingError&) {
      tr.V.clear();  // plants violate the matching assumptions; V undefined
    }
  }
  return tr;
}

// As run(), but divergence raises instead of returning a partial trace.
inline SimulationTrace run_checked(const ScenarioConfig& scn) {
  SimulationTrace tr = run(scn);
  if (tr.diverged_at) throw DivergenceError(*tr.diverged_at);
  return tr;
}

}  // namespace dmrac
