#pragma once

// JSON scenario files (schema_version 1). Loading collects every problem —
// structural, type, and domain violations — into one ValidationError instead
// of stopping at the first; saving writes a file load_config round-trips.
// The schema is documented in the README.

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmrac/scenario.hpp"

namespace dmrac {

inline constexpr int kConfigSchemaVersion = 1;

namespace detail {

using nlohmann::json;

inline std::string mode_name(ControlMode m) {
  switch (m) {
    case ControlMode::communicated: return "communicated";
    case ControlMode::estimated: return "estimated";
    case ControlMode::open_loop: return "open_loop";
  }
  return "communicated";
}

inline std::string method_name(IntegrationSettings::Method m) {
  return m == IntegrationSettings::Method::euler ? "euler" : "rk4";
}

inline json vec_json(const Vec& v) {
  json a = json::array();
  for (int k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

inline json mat_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

// Collects violations while walking one JSON object; every getter records a
// problem and returns the fallback instead of throwing, so a single pass
// reports everything wrong with a file.
struct ConfigReader {
  const json& obj;
  std::string where;
  std::vector<std::string>& bad;
  std::set<std::string> seen;

  ConfigReader(const json& o, std::string w, std::vector<std::string>& b)
      : obj(o), where(std::move(w)), bad(b) {}

  std::string at(const std::string& key) const {
    return where.empty() ? key : where + "." + key;
  }
  const json* find(const std::string& key) {
    seen.insert(key);
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }
  bool has(const std::string& key) { return find(key) != nullptr; }

  double num(const std::string& key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) {
      bad.push_back(at(key) + " must be a number");
      return fallback;
    }
    return v->get<double>();
  }
  int integer(const std::string& key, int fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) {
      bad.push_back(at(key) + " must be an integer");
      return fallback;
    }
    return v->get<int>();
  }
  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) {
      bad.push_back(at(key) + " must be a boolean");
      return fallback;
    }
    return v->get<bool>();
  }
  std::string str(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) {
      bad.push_back(at(key) + " must be a string");
      return fallback;
    }
    return v->get<std::string>();
  }
  // String restricted to listed values; returns the matched index or 0.
  int choice(const std::string& key, const std::vector<std::string>& options,
             int fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (v->is_string()) {
      const auto s = v->get<std::string>();
      for (size_t k = 0; k < options.size(); ++k)
        if (options[k] == s) return static_cast<int>(k);
    }
    std::string want;
    for (const auto& o : options) want += (want.empty() ? "" : ", ") + o;
    bad.push_back(at(key) + " must be one of: " + want);
    return fallback;
  }
  Vec vec(const std::string& key, const Vec& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_array()) {
      bad.push_back(at(key) + " must be an array of numbers");
      return fallback;
    }
    Vec out(v->size());
    for (size_t k = 0; k < v->size(); ++k) {
      if (!(*v)[k].is_number()) {
        bad.push_back(at(key) + " must be an array of numbers");
        return fallback;
      }
      out[k] = (*v)[k].get<double>();
    }
    return out;
  }
  Mat mat(const std::string& key, const Mat& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_array() || v->empty()) {
      bad.push_back(at(key) + " must be an array of equal-length number rows");
      return fallback;
    }
    const size_t cols = (*v)[0].is_array() ? (*v)[0].size() : 0;
    Mat out(v->size(), cols);
    for (size_t i = 0; i < v->size(); ++i) {
      const auto& row = (*v)[i];
      if (!row.is_array() || row.size() != cols || cols == 0) {
        bad.push_back(at(key) + " must be an array of equal-length number rows");
        return fallback;
      }
      for (size_t j = 0; j < cols; ++j) {
        if (!row[j].is_number()) {
          bad.push_back(at(key) + " must be an array of equal-length number rows");
          return fallback;
        }
        out(i, j) = row[j].get<double>();
      }
    }
    return out;
  }
  // Flag keys that no getter asked for (likely typos).
  void finish() {
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!seen.count(it.key()))
        bad.push_back("unknown key " + at(it.key()));
  }
};

// Pretty-printer that keeps arrays of plain numbers on one line, so vectors
// and matrix rows stay hand-editable.
inline void dump_compact(const json& j, std::string& out, int indent) {
  const std::string pad(indent, ' '), inner(indent + 2, ' ');
  if (j.is_object()) {
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += inner + json(it.key()).dump() + ": ";
      dump_compact(it.value(), out, indent + 2);
    }
    out += "\n" + pad + "}";
  } else if (j.is_array()) {
    bool flat = true;
    for (const auto& e : j)
      if (e.is_structured()) flat = false;
    if (flat) {
      out += "[";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ", ";
        first = false;
        out += e.dump();
      }
      out += "]";
    } else {
      out += "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        dump_compact(e, out, indent + 2);
      }
      out += "\n" + pad + "]";
    }
  } else {
    out += j.dump();
  }
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const ScenarioConfig& scn) {
  using detail::json;
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["name"] = scn.name;

  json topo;
  topo["followers"] = scn.topology.n_followers();
  json edges = json::array();
  for (const auto& [src, dst] : scn.topology.edges())
    edges.push_back(json::array({src, dst}));
  topo["edges"] = std::move(edges);
  j["topology"] = std::move(topo);

  json ref;
  ref["A"] = detail::mat_json(scn.reference.A0);
  ref["b"] = detail::vec_json(scn.reference.b0);
  ref["x0"] = detail::vec_json(scn.reference.x0);
  json steps = json::array();
  for (const auto& [t, v] : scn.reference.r.steps)
    steps.push_back(json::array({t, v}));
  ref["r_steps"] = std::move(steps);
  j["reference"] = std::move(ref);

  json agents = json::array();
  for (const auto& p : scn.agents) {
    json a;
    a["A"] = detail::mat_json(p.A);
    a["b"] = detail::vec_json(p.b);
    a["x0"] = detail::vec_json(p.x0);
    if (p.f.kind != UncertaintyKind::none) {
      a["uncertainty"] = {{"kind", "sinusoidal"}, {"c1", p.f.c1}, {"c2", p.f.c2}};
    }
    agents.push_back(std::move(a));
  }
  j["agents"] = std::move(agents);

  const auto& c = scn.controller;
  json ctl;
  ctl["gamma"] = c.gamma;
  ctl["hidden_units"] = c.m;
  ctl["sigmoid_slope"] = c.a;
  ctl["seed"] = c.seed;
  ctl["mode"] = detail::mode_name(c.mode);
  ctl["sign_kr"] = c.sign_kr;
  if (c.sign_kr_per_agent.size())
    ctl["sign_kr_per_agent"] = detail::vec_json(c.sign_kr_per_agent);
  ctl["edge_gain_regressor"] =
      c.kmij_state == GainRegressor::own ? "own" : "neighbor";
  ctl["feedforward_regressor"] =
      c.krij_input == FeedforwardRegressor::own ? "own" : "neighbor";
  ctl["w_law"] = c.w_law == WLaw::sigmoid ? "sigmoid" : "sigmoid_prime";
  ctl["nn_rate_sign"] =
      c.nn_rate_sign == NNRateSign::negative ? "negative" : "positive";
  ctl["adapt_gains"] = c.adapt_gains;
  ctl["adapt_nn"] = c.adapt_nn;
  ctl["preload_ideal_gains"] = c.preload_ideal_gains;
  ctl["nn_init_range"] = c.nn_init_range;
  if (c.nn_v.size()) ctl["v"] = detail::vec_json(c.nn_v);
  if (c.Q.size()) ctl["Q"] = detail::mat_json(c.Q);
  j["controller"] = std::move(ctl);

  j["integration"] = {{"dt", scn.integration.dt},
                      {"t_end", scn.integration.t_end},
                      {"method", detail::method_name(scn.integration.method)},
                      {"record_stride", scn.integration.record_stride}};
  j["diagnostics"] = {{"eps0", scn.diagnostics.eps0},
                      {"guard_norm", scn.diagnostics.guard_norm}};
  return j;
}

// Builds a scenario from parsed JSON, appending every violation found to
// `bad`. The result is only meaningful when `bad` stays empty.
inline ScenarioConfig scenario_from_json(const nlohmann::json& root,
                                         std::vector<std::string>& bad) {
  using detail::ConfigReader;
  ScenarioConfig scn;
  if (!root.is_object()) {
    bad.push_back("top level must be an object");
    return scn;
  }
  ConfigReader r(root, "", bad);

  const int version = r.integer("schema_version", -1);
  if (version == -1)
    bad.push_back("schema_version is required");
  else if (version != kConfigSchemaVersion)
    bad.push_back("unsupported schema_version " + std::to_string(version) +
                  " (this build reads version " +
                  std::to_string(kConfigSchemaVersion) + ")");
  scn.name = r.str("name", "scenario");

  if (const auto* t = r.find("topology"); t && t->is_object()) {
    ConfigReader tr(*t, "topology", bad);
    const int nf = tr.integer("followers", 0);
    std::vector<GraphTopology::Edge> edges;
    if (const auto* e = tr.find("edges"); e && e->is_array()) {
      for (const auto& item : *e) {
        if (item.is_array() && item.size() == 2 && item[0].is_number_integer() &&
            item[1].is_number_integer())
          edges.push_back({item[0].get<int>(), item[1].get<int>()});
        else
          bad.push_back("topology.edges entries must be [source, destination]");
      }
    } else if (e) {
      bad.push_back("topology.edges must be an array");
    }
    tr.finish();
    auto graph_bad = GraphTopology::check(nf, edges);
    if (graph_bad.empty())
      scn.topology = GraphTopology::make(nf, edges);
    else
      bad.insert(bad.end(), graph_bad.begin(), graph_bad.end());
  } else {
    bad.push_back("topology section is required");
  }

  if (const auto* v = r.find("reference"); v && v->is_object()) {
    ConfigReader rr(*v, "reference", bad);
    scn.reference.A0 = rr.mat("A", Mat::Zero(2, 2));
    scn.reference.b0 = rr.vec("b", Vec::Zero(2));
    scn.reference.x0 = rr.vec("x0", Vec::Zero(scn.reference.A0.rows()));
    if (const auto* s = rr.find("r_steps"); s && s->is_array() && !s->empty()) {
      scn.reference.r.steps.clear();
      for (const auto& item : *s) {
        if (item.is_array() && item.size() == 2 && item[0].is_number() &&
            item[1].is_number())
          scn.reference.r.steps.emplace_back(item[0].get<double>(),
                                             item[1].get<double>());
        else
          bad.push_back("reference.r_steps entries must be [time, value]");
      }
      if (scn.reference.r.steps.empty())
        scn.reference.r.steps = {{0.0, 0.0}};
    } else if (s) {
      bad.push_back("reference.r_steps must be a non-empty array");
    }
    rr.finish();
  } else {
    bad.push_back("reference section is required");
  }

  if (const auto* v = r.find("agents"); v && v->is_array()) {
    for (size_t k = 0; k < v->size(); ++k) {
      const auto tag = "agents[" + std::to_string(k) + "]";
      if (!(*v)[k].is_object()) {
        bad.push_back(tag + " must be an object");
        continue;
      }
      ConfigReader ar((*v)[k], tag, bad);
      AgentPlant p;
      p.A = ar.mat("A", Mat::Zero(2, 2));
      p.b = ar.vec("b", Vec::Zero(2));
      p.x0 = ar.vec("x0", Vec::Zero(p.A.rows()));
      if (const auto* u = ar.find("uncertainty"); u && u->is_object()) {
        ConfigReader ur(*u, tag + ".uncertainty", bad);
        const int kind = ur.choice("kind", {"none", "sinusoidal"}, 0);
        p.f.kind = kind == 1 ? UncertaintyKind::sinusoidal : UncertaintyKind::none;
        p.f.c1 = ur.num("c1", 0.0);
        p.f.c2 = ur.num("c2", 0.0);
        ur.finish();
      } else if (u) {
        bad.push_back(tag + ".uncertainty must be an object");
      }
      ar.finish();
      scn.agents.push_back(std::move(p));
    }
  } else {
    bad.push_back("agents section is required");
  }

  if (const auto* v = r.find("controller"); v && v->is_object()) {
    ConfigReader cr(*v, "controller", bad);
    auto& c = scn.controller;
    c.gamma = cr.num("gamma", c.gamma);
    c.m = cr.integer("hidden_units", c.m);
    c.a = cr.num("sigmoid_slope", c.a);
    c.seed = static_cast<unsigned>(cr.integer("seed", static_cast<int>(c.seed)));
    c.mode = static_cast<ControlMode>(
        cr.choice("mode", {"communicated", "estimated", "open_loop"}, 0));
    c.sign_kr = cr.num("sign_kr", c.sign_kr);
    c.sign_kr_per_agent = cr.vec("sign_kr_per_agent", c.sign_kr_per_agent);
    c.kmij_state = static_cast<GainRegressor>(
        cr.choice("edge_gain_regressor", {"own", "neighbor"}, 1));
    c.krij_input = static_cast<FeedforwardRegressor>(
        cr.choice("feedforward_regressor", {"own", "neighbor"}, 0));
    c.w_law =
        static_cast<WLaw>(cr.choice("w_law", {"sigmoid", "sigmoid_prime"}, 0));
    c.nn_rate_sign = static_cast<NNRateSign>(
        cr.choice("nn_rate_sign", {"negative", "positive"}, 0));
    c.adapt_gains = cr.boolean("adapt_gains", c.adapt_gains);
    c.adapt_nn = cr.boolean("adapt_nn", c.adapt_nn);
    c.preload_ideal_gains = cr.boolean("preload_ideal_gains", c.preload_ideal_gains);
    c.nn_init_range = cr.num("nn_init_range", c.nn_init_range);
    c.nn_v = cr.vec("v", c.nn_v);
    c.Q = cr.mat("Q", c.Q);
    cr.finish();
  } else if (v) {
    bad.push_back("controller must be an object");
  }

  if (const auto* v = r.find("integration"); v && v->is_object()) {
    ConfigReader ir(*v, "integration", bad);
    auto& g = scn.integration;
    g.dt = ir.num("dt", g.dt);
    g.t_end = ir.num("t_end", g.t_end);
    g.method = static_cast<IntegrationSettings::Method>(
        ir.choice("method", {"rk4", "euler"}, 0));
    g.record_stride = ir.integer("record_stride", g.record_stride);
    ir.finish();
  } else if (v) {
    bad.push_back("integration must be an object");
  }

  if (const auto* v = r.find("diagnostics"); v && v->is_object()) {
    ConfigReader dr(*v, "diagnostics", bad);
    scn.diagnostics.eps0 = dr.num("eps0", scn.diagnostics.eps0);
    scn.diagnostics.guard_norm = dr.num("guard_norm", scn.diagnostics.guard_norm);
    dr.finish();
  } else if (v) {
    bad.push_back("diagnostics must be an object");
  }

  r.finish();
  return scn;
}

// Reads, parses (reporting line/column on malformed input), builds, and fully
// validates a scenario file; throws ValidationError listing every violation.
inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    size_t line = 1, col = 1;
    const size_t stop = e.byte > 0 ? e.byte - 1 : 0;
    for (size_t k = 0; k < stop && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ValidationError(path + ": parse error at line " +
                          std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what());
  }

  std::vector<std::string> bad;
  ScenarioConfig scn = scenario_from_json(root, bad);
  if (bad.empty()) {
    auto domain_bad = scn.validate();
    bad.insert(bad.end(), domain_bad.begin(), domain_bad.end());
  }
  if (!bad.empty()) throw ValidationError(bad);
  return scn;
}

inline void save_config(const ScenarioConfig& scn, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write config file: " + path);
  std::string body;
  detail::dump_compact(scenario_to_json(scn), body, 0);
  out << body << '\n';
}

}  // namespace dmrac
