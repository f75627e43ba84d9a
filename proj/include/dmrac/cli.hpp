#pragma once

// Command-line front end. Subcommands:
//   run             simulate a preset or config file, write CSV + charts
//   validate        check a scenario file and list every violation
//   report-matching print ideal gains, the Lyapunov solution, ultimate bounds
//   sweep           run a preset across a seed range concurrently
// Exit codes: 0 success, 1 validation/usage failure, 2 divergence.
// DMRAC_OUT_DIR overrides the default output directory ("out").

#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dmrac/config_io.hpp"
#include "dmrac/presets.hpp"
#include "dmrac/trace_io.hpp"

namespace dmrac {
namespace detail {

inline std::string default_out_dir() {
  if (const char* env = std::getenv("DMRAC_OUT_DIR"))
    if (*env) return env;
  return "out";
}

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string fmt_vec(const Vec& v) {
  std::string s = "[";
  for (int k = 0; k < v.size(); ++k) {
    if (k) s += ", ";
    s += fmt_num(v[k]);
  }
  return s + "]^T";
}

inline std::string fmt_mat(const Mat& m) {
  std::string s = "[";
  for (int i = 0; i < m.rows(); ++i) {
    if (i) s += ", ";
    s += "[";
    for (int j = 0; j < m.cols(); ++j) {
      if (j) s += ", ";
      s += fmt_num(m(i, j));
    }
    s += "]";
  }
  return s + "]";
}

struct ScenarioArgs {
  std::string config;
  std::string preset;
  unsigned seed = 0;
};

inline void add_scenario_options(CLI::App* cmd, ScenarioArgs& a) {
  auto* cfg = cmd->add_option("--config", a.config, "scenario JSON file");
  auto* pre = cmd->add_option("--preset", a.preset, "bundled scenario")
                  ->check(CLI::IsMember(preset_names()));
  cmd->add_option("--seed", a.seed, "weight-init seed for --preset runs");
  cfg->excludes(pre);
  pre->excludes(cfg);
}

inline ScenarioConfig resolve_scenario(const ScenarioArgs& a) {
  if (!a.config.empty()) return load_config(a.config);
  if (a.preset.empty())
    throw ValidationError("provide --config <path> or --preset <id>");
  ScenarioConfig scn = make_preset(a.preset, a.seed);
  auto bad = scn.validate();
  if (!bad.empty()) throw ValidationError(bad);
  return scn;
}

inline int do_run(const ScenarioArgs& a, const std::string& out) {
  ScenarioConfig scn = resolve_scenario(a);
  SimulationTrace tr = run(scn);
  std::filesystem::create_directories(out);
  const std::string csv = out + "/trace.csv";
  export_csv(tr, csv);
  auto plots = emit_plots(tr, out);
  std::cout << "scenario: " << scn.name << " (" << tr.n_followers
            << " followers, " << tr.samples() << " samples)\n";
  std::cout << "wrote " << csv;
  for (const auto& p : plots) std::cout << ", " << p;
  std::cout << "\n";
  if (tr.diverged_at) {
    std::cerr << "simulation diverged at t = " << fmt_num(*tr.diverged_at)
              << " (outputs cover the finite prefix)\n";
    return 2;
  }
  auto m = sync_metrics(tr);
  std::cout << "final errors:";
  for (int i = 0; i < tr.n_followers; ++i) std::cout << ' ' << fmt_num(m.final_err[i]);
  std::cout << "\n";
  return 0;
}

inline int do_validate(const ScenarioArgs& a) {
  ScenarioConfig scn = resolve_scenario(a);  // throws with every violation
  std::cout << "valid: " << scn.name << " (" << scn.topology.n_followers()
            << " followers, " << scn.topology.edges().size() << " edges, t_end "
            << fmt_num(scn.integration.t_end) << " s)\n";
  return 0;
}

inline int do_report_matching(const ScenarioArgs& a) {
  ScenarioConfig scn = resolve_scenario(a);
  const Mat Q = scn.controller.q_or_default(scn.n());
  const Mat P = solve_lyapunov(scn.reference.A0, Q);
  std::cout << "scenario: " << scn.name << "\n";
  std::cout << "Q = " << fmt_mat(Q) << "\n";
  std::cout << "P = " << fmt_mat(P) << "\n";
  for (int i = 1; i <= scn.topology.n_followers(); ++i) {
    const auto& plant = scn.agent(i);
    FeedbackGains fb = feedback_matching(plant, scn.reference);
    std::cout << "follower " << i << ":\n";
    std::cout << "  k*_m" << i << " = " << fmt_vec(fb.k_m) << "\n";
    std::cout << "  k*_r" << i << " = " << fmt_num(fb.k_r) << "\n";
    std::cout << "  ultimate bound (eps0 = " << fmt_num(scn.diagnostics.eps0)
              << ") = "
              << fmt_num(ultimate_bound(P, plant.b, Q, scn.diagnostics.eps0))
              << "\n";
    for (int j : scn.topology.in_neighbors(i)) {
      EdgeIdealGains g =
          j == 0 ? leader_edge_ideal_gains(plant, scn.reference)
                 : edge_ideal_gains(plant, scn.agent(j), scn.reference,
                                    scn.controller.kmij_state);
      std::cout << "  edge " << i << "<-" << j
                << (j == 0 ? " (leader)" : "") << ": k_edge = "
                << fmt_vec(g.k_edge) << "  k_consensus = "
                << fmt_vec(g.k_consensus) << "  k_ff = " << fmt_num(g.k_ff)
                << "\n";
    }
  }
  return 0;
}

inline std::pair<unsigned, unsigned> parse_seed_range(const std::string& spec) {
  try {
    const auto dots = spec.find("..");
    if (dots == std::string::npos) {
      const unsigned s = static_cast<unsigned>(std::stoul(spec));
      return {s, s};
    }
    const unsigned lo = static_cast<unsigned>(std::stoul(spec.substr(0, dots)));
    const unsigned hi =
        static_cast<unsigned>(std::stoul(spec.substr(dots + 2)));
    if (hi < lo) throw std::invalid_argument("empty range");
    return {lo, hi};
  } catch (const std::exception&) {
    throw ValidationError("--seeds must be <n> or <a>..<b> with a <= b, got '" +
                          spec + "'");
  }
}

inline int do_sweep(const std::string& preset, const std::string& seeds,
                    const std::string& out) {
  const auto [lo, hi] = parse_seed_range(seeds);
  struct Row {
    unsigned seed;
    std::optional<double> diverged;
    double final_err = 0, peak_err = 0, t_sync = 0;
  };
  if (!out.empty()) std::filesystem::create_directories(out);
  std::vector<std::future<Row>> futs;
  for (unsigned s = lo; s <= hi; ++s) {
    futs.push_back(std::async(std::launch::async, [preset, s, out]() {
      ScenarioConfig scn = make_preset(preset, s);
      SimulationTrace tr = run(scn);
      if (!out.empty())
        export_csv(tr, out + "/seed-" + std::to_string(s) + ".csv");
      Row r;
      r.seed = s;
      r.diverged = tr.diverged_at;
      auto m = sync_metrics(tr);
      for (int i = 0; i < tr.n_followers; ++i) {
        r.final_err = std::max(r.final_err, m.final_err[i]);
        r.peak_err = std::max(r.peak_err, m.peak_err[i]);
        r.t_sync = std::max(r.t_sync, m.time_to_tol[i]);
      }
      return r;
    }));
  }
  char line[128];
  std::snprintf(line, sizeof line, "%-6s %-16s %-12s %-12s %-10s", "seed",
                "status", "final_err", "peak_err", "t_sync");
  std::cout << line << "\n";
  bool any_diverged = false;
  for (auto& f : futs) {
    Row r = f.get();
    if (r.diverged) {
      any_diverged = true;
      std::snprintf(line, sizeof line, "%-6u diverged@%-6g %-12s %-12s %-10s",
                    r.seed, *r.diverged, "-", "-", "-");
    } else {
      std::snprintf(line, sizeof line, "%-6u %-16s %-12.4g %-12.4g %-10.4g",
                    r.seed, "ok", r.final_err, r.peak_err, r.t_sync);
    }
    std::cout << line << "\n";
  }
  return any_diverged ? 2 : 0;
}

}  // namespace detail

inline int cli_main(int argc, char** argv) {
  CLI::App app{
      "Adaptive leader-follower platoon synchronization simulator"};
  app.require_subcommand(1);

  detail::ScenarioArgs run_args, val_args, rep_args;
  std::string run_out = detail::default_out_dir();
  std::string sweep_preset, sweep_seeds = "0..9", sweep_out;

  auto* runc = app.add_subcommand("run", "simulate and export CSV + charts");
  detail::add_scenario_options(runc, run_args);
  runc->add_option("--out", run_out,
                   "output directory (default: $DMRAC_OUT_DIR or ./out)");

  auto* valc = app.add_subcommand("validate", "check a scenario and exit");
  detail::add_scenario_options(valc, val_args);

  auto* repc = app.add_subcommand(
      "report-matching", "print ideal gains, P, and ultimate bounds");
  detail::add_scenario_options(repc, rep_args);

  auto* swc =
      app.add_subcommand("sweep", "run one preset across a seed range");
  swc->add_option("--preset", sweep_preset, "bundled scenario")
      ->required()
      ->check(CLI::IsMember(preset_names()));
  swc->add_option("--seeds", sweep_seeds, "seed range a..b (default 0..9)");
  swc->add_option("--out", sweep_out,
                  "directory for per-seed CSVs (omit to skip files)");

  try {
    app.parse(argc, argv);
    if (*runc) return detail::do_run(run_args, run_out);
    if (*valc) return detail::do_validate(val_args);
    if (*repc) return detail::do_report_matching(rep_args);
    if (*swc) return detail::do_sweep(sweep_preset, sweep_seeds, sweep_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the usage problem
    return code == 0 ? 0 : 1;
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const MatchingError& e) {
    std::cerr << "matching infeasible: " << e.what() << "\n";
    return 1;
  } catch (const DivergenceError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dmrac
