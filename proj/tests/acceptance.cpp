// Acceptance gate: one line per criterion, PASS or FAIL, with the measured
// evidence. The process exit code is the number of failed criteria, so the
// binary doubles as a scriptable check; criteria that the bundled
// communicated-mode scenario cannot meet stay red rather than being skipped
// (see README, "Known limitations").

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dmrac/dmrac.hpp"

using namespace dmrac;
namespace fs = std::filesystem;

namespace {

int failures = 0;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void report(int k, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s - %s\n", k, ok ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// worst ‖x_i − x_0‖ over all followers and samples with t ≥ t_from
double tail_error(const SimulationTrace& tr, double t_from) {
  double worst = 0.0;
  for (int k = 0; k < tr.samples(); ++k) {
    if (tr.t[k] < t_from) continue;
    worst = std::max(worst, tr.err_ref[k].maxCoeff());
  }
  return worst;
}

double mean_error(const SimulationTrace& tr, double t_from) {
  double acc = 0.0;
  long cnt = 0;
  for (int k = 0; k < tr.samples(); ++k) {
    if (tr.t[k] < t_from) continue;
    for (int i = 0; i < tr.n_followers; ++i) acc += tr.err_ref[k][i];
    ++cnt;
  }
  return cnt ? acc / static_cast<double>(cnt) : 1e99;
}

Vec peak_errors(const SimulationTrace& tr) {
  Vec peak = Vec::Zero(tr.n_followers);
  for (int k = 0; k < tr.samples(); ++k)
    peak = peak.cwiseMax(tr.err_ref[k]);
  return peak;
}

Vec final_state(ScenarioConfig scn, double dt, double t_end, bool* diverged) {
  scn.integration.dt = dt;
  scn.integration.t_end = t_end;
  scn.integration.record_stride = 1 << 30;
  auto tr = run(scn);
  *diverged = tr.diverged_at.has_value();
  return tr.state.back();
}

void criterion_1() {
  auto t0 = std::chrono::steady_clock::now();
  auto ref = table_reference();
  double fb_a = 0.0, fb_b = 0.0, cp_a = 0.0, cp_b = 0.0;
  for (int i = 1; i <= 6; ++i) {
    auto p = table_agent(i);
    auto g = feedback_matching(p, ref);
    fb_a = std::max(
        fb_a, (ref.A0 - (p.A + p.b * g.k_m.transpose())).cwiseAbs().maxCoeff());
    fb_b = std::max(fb_b, (ref.b0 - p.b * g.k_r).cwiseAbs().maxCoeff());
  }
  for (int i = 2; i <= 6; ++i) {
    auto pi = table_agent(i), pj = table_agent(i - 1);
    auto g = coupling_matching(pi, pj);
    cp_a = std::max(
        cp_a, (pi.A - (pj.A + pj.b * g.k_m.transpose())).cwiseAbs().maxCoeff());
    cp_b = std::max(cp_b, (pi.b - pj.b * g.k_r).cwiseAbs().maxCoeff());
  }
  const double el = seconds_since(t0);
  const bool ok =
      fb_a < 1e-10 && fb_b < 1e-12 && cp_a < 1e-10 && cp_b < 1e-12 && el < 1.0;
  report(1, ok,
         fmt("matching residuals: feedback A %.1e / b %.1e, coupling A %.1e / "
             "b %.1e over all 6 vehicles and 5 chain pairs (%.3f s)",
             fb_a, fb_b, cp_a, cp_b, el));
}

void criterion_2() {
  auto t0 = std::chrono::steady_clock::now();
  auto ref = table_reference();
  Mat Q = Mat::Identity(2, 2);
  Q(0, 0) = 100.0;
  Mat P = solve_lyapunov(ref.A0, Q);
  const double resid =
      (P * ref.A0 + ref.A0.transpose() * P + Q).cwiseAbs().maxCoeff();
  const double asym = (P - P.transpose()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Mat> es(P);
  const double lmin = es.eigenvalues().minCoeff();
  const double el = seconds_since(t0);
  const bool ok = resid < 1e-10 && asym < 1e-12 && lmin > 0.0 && el < 1.0;
  report(2, ok,
         fmt("Lyapunov residual %.1e, asymmetry %.1e, lambda_min(P) = %.3f "
             "(%.3f s)",
             resid, asym, lmin, el));
}

void criterion_3() {
  auto scn = make_preset("open-loop-check");
  auto tr = run(scn);
  Mat Q = scn.controller.q_or_default(2);
  Mat P = solve_lyapunov(scn.reference.A0, Q);

  double latest_escape = 0.0;
  bool all_escape = true;
  for (int i = 1; i <= tr.n_followers; ++i) {
    double when = std::numeric_limits<double>::infinity();
    for (int k = 0; k < tr.samples(); ++k)
      if (tr.x_at(k, i).cwiseAbs().maxCoeff() > 1e3) {
        when = tr.t[k];
        break;
      }
    if (!(when <= 20.0)) all_escape = false;
    latest_escape = std::max(latest_escape, when);
  }
  bool mono = true;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < tr.samples(); ++k) {
    Vec x = tr.x_at(k, 0);
    const double v = x.dot(P * x);
    if (v > prev + 1e-9) mono = false;
    prev = v;
  }
  report(3, all_escape && mono,
         fmt("every open-loop follower exceeds norm 1e3 by t = %.2f s; "
             "reference x'Px non-increasing: %s",
             latest_escape, mono ? "yes" : "no"));
}

void criterion_4() {
  auto t0 = std::chrono::steady_clock::now();
  int good = 0, diverged = 0;
  double first_div = std::numeric_limits<double>::infinity();
  for (unsigned seed = 0; seed < 10; ++seed) {
    auto tr = run(make_preset("fig2", seed));
    if (tr.diverged_at) {
      ++diverged;
      first_div = std::min(first_div, *tr.diverged_at);
      continue;
    }
    if (tail_error(tr, 30.0) < 0.1) ++good;
  }
  const double el = seconds_since(t0);
  const bool ok = good >= 9 && el < 60.0;
  report(4, ok,
         fmt("communicated mode: %d/10 seeds bounded with error < 0.1 after "
             "30 s (%d/10 trip the norm guard, earliest at t = %.3g s; the "
             "neighbor-input cascade is stiff beyond any fixed step) (%.1f s)",
             good, diverged, first_div, el));
}

void criterion_5() {
  int est_good = 0, cmp_good = 0, comm_complete = 0;
  double worst_tail = 0.0;
  for (unsigned seed = 0; seed < 10; ++seed) {
    auto est = run(make_preset("fig3", seed));
    const bool a = !est.diverged_at && tail_error(est, 35.0) < 0.15;
    if (a) {
      ++est_good;
      worst_tail = std::max(worst_tail, tail_error(est, 35.0));
    }
    auto comm = run(make_preset("fig2", seed));
    if (!comm.diverged_at && !est.diverged_at) {
      ++comm_complete;
      Vec pe = peak_errors(est), pc = peak_errors(comm);
      if ((pe.array() >= pc.array()).all()) ++cmp_good;
    }
  }
  const bool ok = est_good >= 9 && cmp_good >= 7;
  report(5, ok,
         fmt("estimated mode bounded with error < 0.15 after 35 s on %d/10 "
             "seeds (worst tail %.3g); peak-error comparison possible on "
             "%d/10 seeds (communicated runs diverge), satisfied on %d/10",
             est_good, worst_tail, comm_complete, cmp_good));
}

void criterion_6() {
  auto tr = run(make_preset("homogeneous-sanity"));
  double emax = 0.0;
  for (int k = 0; k < tr.samples(); ++k)
    emax = std::max(emax, tr.err_ref[k].maxCoeff());
  const bool ok = !tr.diverged_at && emax < 1e-8;
  report(6, ok,
         fmt("homogeneous preloaded pair: max error %.3g over 40 s", emax));
}

void criterion_7() {
  // Square-wave reference (+/-2 every 5 s) with f(x) = 2 sin x1 + cos x2:
  // each setpoint change forces the frozen arm to re-slew its gains, while
  // the adapted network cancels f across operating points.
  ReferenceSignal sq;
  sq.steps.clear();
  for (int k = 0; k * 5.0 < 40.0; ++k)
    sq.steps.push_back({k * 5.0, k % 2 ? -2.0 : 2.0});
  int wins = 0;
  for (unsigned seed = 0; seed < 10; ++seed) {
    ScenarioConfig on = make_preset("single-agent-prop1", seed);
    on.reference.r = sq;
    on.agents[0].f = sinusoidal_uncertainty(2.0, 1.0);
    ScenarioConfig off = on;
    off.controller.adapt_nn = false;
    auto tron = run(on);
    auto troff = run(off);
    const double ea = mean_error(tron, 36.0), eb = mean_error(troff, 36.0);
    if (!tron.diverged_at && (troff.diverged_at || ea <= eb)) ++wins;
  }
  report(7, wins >= 8,
         fmt("NN adaptation lowers the final-window mean error on %d/10 seeds "
             "(square-wave reference, f = 2 sin x1 + cos x2)",
             wins));
}

void criterion_8() {
  bool d1 = false, d2 = false, d3 = false;
  auto scn = make_preset("fig2", 0);
  Vec a = final_state(scn, 1e-3, 1.0, &d1);
  Vec b = final_state(scn, 5e-4, 1.0, &d2);
  Vec c = final_state(scn, 2.5e-4, 1.0, &d3);
  if (d1 || d2 || d3) {
    report(8, false,
           "RK4 self-convergence on the communicated preset is unmeasurable: "
           "the 1 s runs trip the norm guard at every tested step size");
    return;
  }
  const double ratio = (a - b).norm() / (b - c).norm();
  report(8, ratio > 12.0 && ratio < 20.0,
         fmt("self-convergence ratio %.2f (expect within [12, 20])", ratio));
}

void criterion_9() {
  auto scn = make_preset("fig2", 0);
  for (auto& p : scn.agents) p.f = UncertaintySpec{};
  scn.controller.adapt_nn = false;
  scn.controller.nn_init_range = 0.0;  // theta frozen at zero
  auto tr = run(scn);
  if (tr.diverged_at) {
    report(9, false,
           fmt("V(t) trend unmeasurable: even with uncertainty off and the "
               "network frozen at zero the communicated run trips the norm "
               "guard at t = %.3g s",
               *tr.diverged_at));
    return;
  }
  const double slack = 1e-6 * scn.integration.dt;
  int bad = 0;
  for (size_t k = 1; k < tr.V.size(); ++k)
    if (tr.V[k] > tr.V[k - 1] + slack) ++bad;
  report(9, !tr.V.empty() && bad == 0,
         fmt("V(t) non-increasing at %zu/%zu recorded steps",
             tr.V.size() - 1 - bad, tr.V.size() - 1));
}

void criterion_10() {
  fs::path base = fs::temp_directory_path() / "dmrac-acceptance";
  fs::remove_all(base);
  const std::string a = (base / "a").string(), b = (base / "b").string();

  auto invoke = [](const std::string& out_dir) {
    std::vector<std::string> args{"dmrac", "run", "--preset", "fig3", "--out",
                                  out_dir};
    std::vector<char*> argv;
    for (auto& s : args) argv.push_back(s.data());
    std::ostringstream sink;
    auto* old = std::cout.rdbuf(sink.rdbuf());
    int rc = cli_main(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old);
    return rc;
  };
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  const int rc1 = invoke(a), rc2 = invoke(b);
  const std::string ca = slurp(a + "/trace.csv"), cb = slurp(b + "/trace.csv");
  const bool ok = rc1 == 0 && rc2 == 0 && !ca.empty() && ca == cb;
  report(10, ok,
         fmt("two identical run invocations: exit codes %d/%d, CSVs %s (%zu "
             "bytes)",
             rc1, rc2, ca == cb ? "byte-identical" : "DIFFER", ca.size()));
  fs::remove_all(base);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  std::printf("acceptance: %d/10 criteria pass\n", 10 - failures);
  return failures;
}
