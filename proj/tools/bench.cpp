// Step-cost and step-size probe: runs a preset at several dt values over a
// short horizon and reports stability, peak control magnitude, and wall time.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "dmrac/engine.hpp"
#include "dmrac/presets.hpp"

using namespace dmrac;

int main(int argc, char** argv) {
  std::string id = argc > 1 ? argv[1] : "fig2";
  double t_end = argc > 2 ? std::atof(argv[2]) : 2.0;
  std::vector<double> dts;
  if (argc > 3) {
    for (int k = 3; k < argc; ++k) dts.push_back(std::atof(argv[k]));
  } else {
    dts = {1e-3, 5e-4, 2e-4, 1e-4, 5e-5, 2e-5, 1e-5};
  }

  for (double dt : dts) {
    ScenarioConfig scn = make_preset(id);
    scn.integration.dt = dt;
    scn.integration.t_end = t_end;
    scn.integration.record_stride =
        std::max(1, static_cast<int>(t_end / dt / 2000));
    auto t0 = std::chrono::steady_clock::now();
    SimulationTrace tr = run(scn);
    auto t1 = std::chrono::steady_clock::now();
    double wall = std::chrono::duration<double>(t1 - t0).count();
    double upeak = 0, epeak = 0, efinal = 0;
    for (int k = 0; k < tr.samples(); ++k) {
      upeak = std::max(upeak, tr.controls[k].cwiseAbs().maxCoeff());
      epeak = std::max(epeak, tr.err_ref[k].maxCoeff());
    }
    if (tr.samples()) efinal = tr.err_ref.back().maxCoeff();
    double rate = t_end / dt / wall;
    if (tr.diverged_at)
      std::printf("dt=%-8g DIVERGED at t=%-10g wall=%6.2fs (%.2e steps/s)\n",
                  dt, *tr.diverged_at, wall, rate);
    else
      std::printf(
          "dt=%-8g ok  u_peak=%-10.3g err_peak=%-8.3g err_end=%-10.3g "
          "wall=%6.2fs (%.2e steps/s)\n",
          dt, upeak, epeak, efinal, wall, rate);
  }
  return 0;
}
