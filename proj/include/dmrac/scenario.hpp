#pragma once

// A complete simulation scenario: topology, reference model, plants, and all
// controller / integration / diagnostic settings.

#include <string>
#include <vector>

#include "dmrac/controller.hpp"
#include "dmrac/graph.hpp"
#include "dmrac/plant.hpp"

namespace dmrac {

struct IntegrationSettings {
  enum class Method { rk4, euler };
  double dt = 1e-3;
  double t_end = 40.0;
  Method method = Method::rk4;
  int record_stride = 10;
};

struct DiagnosticsSettings {
  double eps0 = 0.05;       // assumed uncertainty-approximation error bound
  double guard_norm = 1e6;  // abort when any state entry exceeds this
};

struct ScenarioConfig {
  std::string name;
  GraphTopology topology;
  ReferenceModel reference;
  std::vector<AgentPlant> agents;  // agents[i-1] is follower i
  ControllerSettings controller;
  IntegrationSettings integration;
  DiagnosticsSettings diagnostics;

  const AgentPlant& agent(int i) const { return agents.at(i - 1); }
  int n() const { return reference.n(); }

  // Every violated invariant, empty when the scenario is runnable.
  std::vector<std::string> validate() const {
    std::vector<std::string> bad =
        GraphTopology::check(topology.n_followers(), topology.edges());
    if (static_cast<int>(agents.size()) != topology.n_followers())
      bad.push_back("agent count " + std::to_string(agents.size()) +
                    " does not match topology follower count " +
                    std::to_string(topology.n_followers()));
    if (!is_hurwitz(reference.A0))
      bad.push_back("reference A0 is not Hurwitz");
    if (reference.x0.size() != reference.n())
      bad.push_back("reference x0 has wrong dimension");
    for (size_t k = 0; k < agents.size(); ++k) {
      const auto& p = agents[k];
      const auto tag = "agent " + std::to_string(k + 1);
      if (p.n() != reference.n())
        bad.push_back(tag + " state dimension differs from the reference");
      if (p.b.size() != p.n() || p.b.isZero())
        bad.push_back(tag + " input vector b is zero or mis-sized");
      if (p.x0.size() != p.n()) bad.push_back(tag + " x0 has wrong dimension");
    }
    for (size_t k = 1; k < reference.r.steps.size(); ++k)
      if (reference.r.steps[k].first <= reference.r.steps[k - 1].first)
        bad.push_back("reference signal breakpoints are not strictly increasing");
    Mat Q = controller.q_or_default(reference.n());
    if (Q.rows() != reference.n() || Q.cols() != reference.n()) {
      bad.push_back("Q has wrong dimensions");
    } else {
      if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        bad.push_back("Q is not symmetric");
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Q + Q.transpose()));
      if (es.eigenvalues().minCoeff() <= 0.0)
        bad.push_back("Q not positive definite");
    }
    if (controller.gamma <= 0.0) bad.push_back("gamma must be positive");
    if (controller.m < 1) bad.push_back("m (hidden units) must be at least 1");
    if (controller.a <= 0.0) bad.push_back("sigmoid slope a must be positive");
    if (controller.nn_init_range < 0.0)
      bad.push_back("nn_init_range must be non-negative");
    if (controller.nn_v.size() && controller.nn_v.size() != controller.m)
      bad.push_back("nn v vector must have m entries");
    if (controller.sign_kr_per_agent.size() &&
        controller.sign_kr_per_agent.size() != static_cast<int>(agents.size()))
      bad.push_back("sign_kr per-agent override must have one entry per follower");
    if (!(integration.dt > 0.0)) bad.push_back("dt must be positive");
    if (!(integration.t_end > integration.dt))
      bad.push_back("t_end must exceed dt");
    if (integration.record_stride < 1)
      bad.push_back("record_stride must be at least 1");
    if (!(diagnostics.guard_norm > 0.0))
      bad.push_back("guard_norm must be positive");
    if (diagnostics.eps0 < 0.0) bad.push_back("eps0 must be non-negative");
    return bad;
  }
};

}  // namespace dmrac
