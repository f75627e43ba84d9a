#pragma once

// Bundled scenarios. The vehicle fleet is the benchmark set used throughout
// the tests: one stable reference model and six open-loop-unstable followers
// in a predecessor chain 0 -> 1 -> ... -> 6.

#include <string>
#include <vector>

#include "dmrac/scenario.hpp"

namespace dmrac {

struct VehicleRow {
  double a1, a2, b1, x01, x02;
};

// Reference model row followed by followers 1..6.
inline const std::vector<VehicleRow>& vehicle_table() {
  static const std::vector<VehicleRow> rows = {
      {-0.25, -0.5, 1.0, 1.0, -1.0},  // reference
      {-1.25, 1.0, 0.5, 1.0, 0.0},    {-0.5, 2.5, 0.75, -1.0, 0.5},
      {-0.75, 2.0, 1.5, 1.0, 0.0},    {-1.5, 2.5, 1.0, -1.0, 1.0},
      {-1.0, 2.0, 1.0, -0.5, 1.0},    {-0.75, 1.0, 0.5, 0.0, -1.0},
  };
  return rows;
}

inline ReferenceModel table_reference(double r = 1.0) {
  const auto& row = vehicle_table()[0];
  return vehicle_reference(row.a1, row.a2, row.b1, Vec{{row.x01, row.x02}},
                           ReferenceSignal::constant(r));
}

inline AgentPlant table_agent(int i, UncertaintySpec f = {}) {
  const auto& row = vehicle_table().at(i);
  return vehicle_plant(row.a1, row.a2, row.b1, Vec{{row.x01, row.x02}}, f);
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "fig2", "fig3", "single-agent-prop1", "homogeneous-sanity",
      "open-loop-check"};
  return names;
}

// Six heterogeneous vehicles in a chain, sinusoidal input uncertainty on,
// neighbor inputs communicated. Gains start at zero, NN weights seeded
// uniform. The preset picks the law variants that keep the closed loop
// bounded (see the enum comments in controller.hpp): own-state edge-gain
// regressor, neighbor-input feedforward adaptation, positive NN rate sign.
inline ScenarioConfig preset_fig2(unsigned seed = 0) {
  ScenarioConfig scn;
  scn.name = "fig2";
  scn.topology = GraphTopology::chain(6);
  scn.reference = table_reference(1.0);
  for (int i = 1; i <= 6; ++i)
    scn.agents.push_back(table_agent(i, sinusoidal_uncertainty(0.2, 0.1)));
  scn.controller.seed = seed;
  scn.controller.mode = ControlMode::communicated;
  scn.controller.kmij_state = GainRegressor::own;
  scn.controller.krij_input = FeedforwardRegressor::neighbor;
  scn.controller.nn_rate_sign = NNRateSign::positive;
  scn.integration.dt = 1e-3;
  scn.integration.t_end = 40.0;
  scn.integration.record_stride = 10;
  return scn;
}

// Same fleet with neighbor inputs estimated instead of communicated.
inline ScenarioConfig preset_fig3(unsigned seed = 0) {
  ScenarioConfig scn = preset_fig2(seed);
  scn.name = "fig3";
  scn.controller.mode = ControlMode::estimated;
  return scn;
}

// One follower tracking the reference directly.
inline ScenarioConfig preset_single_agent(unsigned seed = 0) {
  ScenarioConfig scn;
  scn.name = "single-agent-prop1";
  scn.topology = GraphTopology::chain(1);
  scn.reference = table_reference(1.0);
  scn.agents.push_back(table_agent(1, sinusoidal_uncertainty(0.2, 0.1)));
  scn.controller.seed = seed;
  scn.controller.nn_rate_sign = NNRateSign::positive;
  scn.integration.dt = 1e-3;
  scn.integration.t_end = 40.0;
  scn.integration.record_stride = 10;
  return scn;
}

// Two followers identical to the reference, no uncertainty, gains preloaded
// at their matched values: the errors stay at numerical zero.
inline ScenarioConfig preset_homogeneous_sanity() {
  ScenarioConfig scn;
  scn.name = "homogeneous-sanity";
  scn.topology = GraphTopology::chain(2);
  scn.reference = table_reference(1.0);
  const auto& row = vehicle_table()[0];
  for (int i = 1; i <= 2; ++i)
    scn.agents.push_back(
        vehicle_plant(row.a1, row.a2, row.b1, Vec{{row.x01, row.x02}}));
  scn.controller.kmij_state = GainRegressor::own;
  scn.controller.preload_ideal_gains = true;
  scn.controller.nn_init_range = 0.0;
  scn.integration.dt = 1e-3;
  scn.integration.t_end = 40.0;
  scn.integration.record_stride = 10;
  return scn;
}

// Every follower uncontrolled (u = 0, uncertainty off) plus the reference
// decaying from its initial state (r = 0). Follower norms blow up; the guard
// is lifted so the full window is observable.
inline ScenarioConfig preset_open_loop_check() {
  ScenarioConfig scn;
  scn.name = "open-loop-check";
  scn.topology = GraphTopology::chain(6);
  scn.reference = table_reference(0.0);
  for (int i = 1; i <= 6; ++i) scn.agents.push_back(table_agent(i));
  scn.controller.mode = ControlMode::open_loop;
  scn.integration.dt = 1e-3;
  scn.integration.t_end = 20.0;
  scn.integration.record_stride = 10;
  scn.diagnostics.guard_norm = 1e30;
  return scn;
}

inline ScenarioConfig make_preset(const std::string& id, unsigned seed = 0) {
  if (id == "fig2") return preset_fig2(seed);
  if (id == "fig3") return preset_fig3(seed);
  if (id == "single-agent-prop1") return preset_single_agent(seed);
  if (id == "homogeneous-sanity") return preset_homogeneous_sanity();
  if (id == "open-loop-check") return preset_open_loop_check();
  throw ValidationError("unknown preset '" + id + "'");
}

}  // namespace dmrac
