#pragma once

// Trace serialization: CSV export, standalone SVG charts, and a gnuplot
// script that regenerates the charts from the CSV. Everything written here is
// byte-deterministic for a given trace.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "dmrac/engine.hpp"

namespace dmrac {

// One row per (sample, agent), time-major then agent-minor, agent 0 being the
// reference. Columns: t, agent, x1..xn, u, err_ref. Agent 0 carries the
// reference input r(t) in the u column and 0 in err_ref. Numbers use 9
// significant digits.
inline void export_csv(const SimulationTrace& tr, const std::string& path) {
  if (tr.t.empty()) throw ValidationError("cannot export an empty trace");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  const int n = tr.layout.n();
  out << "t,agent";
  for (int k = 1; k <= n; ++k) out << ",x" << k;
  out << ",u,err_ref\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    out << buf;
  };
  for (int s = 0; s < tr.samples(); ++s) {
    for (int agent = 0; agent <= tr.n_followers; ++agent) {
      put(tr.t[s]);
      out << ',' << agent;
      const Vec x = tr.x_at(s, agent);
      for (int k = 0; k < n; ++k) {
        out << ',';
        put(x[k]);
      }
      out << ',';
      put(agent == 0 ? tr.r[s] : tr.u_at(s, agent));
      out << ',';
      put(agent == 0 ? 0.0 : tr.err_ref[s][agent - 1]);
      out << '\n';
    }
  }
}

namespace detail {

inline const char* series_color(int k) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                  "#bcbd22", "#17becf"};
  return palette[k % 10];
}

inline std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = 10.0 * mag;
  for (double m : {1.0, 2.0, 5.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 0.5 * step; v += step)
    out.push_back(std::abs(v) < 1e-9 * step ? 0.0 : v);
  return out;
}

inline std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

using NamedSeries = std::pair<std::string, std::vector<double>>;

// Minimal line chart: fixed 900×540 canvas, auto-ranged axes with nice
// ticks, legend on the right, one polyline per series.
inline std::string line_chart_svg(const std::string& title,
                                  const std::string& ylabel,
                                  const std::vector<double>& t,
                                  const std::vector<NamedSeries>& series) {
  const double W = 900, H = 540, L = 70, R = 170, T = 44, B = 52;
  const double pw = W - L - R, ph = H - T - B;

  double xmin = t.empty() ? 0.0 : t.front();
  double xmax = t.empty() ? 1.0 : t.back();
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  double ymin = 0.0, ymax = 1.0;
  bool seen = false;
  for (const auto& [label, y] : series)
    for (double v : y) {
      if (!std::isfinite(v)) continue;
      if (!seen) {
        ymin = ymax = v;
        seen = true;
      } else {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
    }
  if (!seen) {
    ymin = 0.0;
    ymax = 1.0;
  }
  double pad = 0.05 * (ymax - ymin);
  if (pad <= 0.0) pad = std::max(1.0, std::abs(ymin)) * 0.1;
  ymin -= pad;
  ymax += pad;

  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return T + ph - (y - ymin) / (ymax - ymin) * ph; };
  char buf[160];
  std::string svg;
  auto add = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    svg += buf;
  };

  add("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
      "viewBox=\"0 0 %g %g\" font-family=\"sans-serif\" font-size=\"13\">\n",
      W, H, W, H);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  add("<text x=\"%g\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">",
      L + pw / 2);
  svg += title + "</text>\n";

  for (double v : nice_ticks(xmin, xmax)) {
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
        "stroke=\"#dddddd\"/>\n",
        px(v), T, px(v), T + ph);
    add("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">", px(v),
        T + ph + 18.0);
    svg += fmt_tick(v) + "</text>\n";
  }
  for (double v : nice_ticks(ymin, ymax)) {
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
        "stroke=\"#dddddd\"/>\n",
        L, py(v), L + pw, py(v));
    add("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">", L - 8.0,
        py(v) + 4.0);
    svg += fmt_tick(v) + "</text>\n";
  }
  add("<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" "
      "stroke=\"black\"/>\n",
      L, T, pw, ph);
  add("<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">t [s]</text>\n",
      L + pw / 2, H - 12.0);
  add("<text x=\"18\" y=\"%g\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 18 %g)\">",
      T + ph / 2, T + ph / 2);
  svg += ylabel + "</text>\n";

  for (size_t k = 0; k < series.size(); ++k) {
    const auto& [label, y] = series[k];
    std::string pts;
    for (size_t s = 0; s < y.size() && s < t.size(); ++s) {
      if (!std::isfinite(y[s])) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(t[s]), py(y[s]));
      pts += buf;
    }
    add("<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\" "
        "points=\"",
        series_color(static_cast<int>(k)));
    svg += pts + "\"/>\n";
    const double ly = T + 16.0 + 22.0 * static_cast<double>(k);
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
        "stroke-width=\"2\"/>\n",
        L + pw + 14.0, ly, L + pw + 40.0, ly,
        series_color(static_cast<int>(k)));
    add("<text x=\"%.2f\" y=\"%.2f\">", L + pw + 46.0, ly + 4.0);
    svg += label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << body;
}

// Gnuplot script regenerating the same charts from trace.csv.
inline std::string regen_script(int n, int nf) {
  std::string s;
  s += "# Regenerates the SVG charts from trace.csv (gnuplot 5+):\n";
  s += "#   gnuplot plots.gp\n";
  s += "set datafile separator comma\n";
  s += "set terminal svg size 900,540\n";
  s += "set key outside right top\n";
  s += "set xlabel 't [s]'\n";
  auto series_line = [](int agent, int col, const std::string& label,
                        bool last) {
    char line[160];
    std::snprintf(line, sizeof line,
                  "  'trace.csv' skip 1 using ($2==%d?$1:NaN):%d with lines "
                  "title '%s'%s\n",
                  agent, col, label.c_str(), last ? "" : ", \\");
    return std::string(line);
  };
  for (int k = 1; k <= n; ++k) {
    s += "\nset output 'state" + std::to_string(k) + ".svg'\n";
    s += "set ylabel 'x" + std::to_string(k) + "'\n";
    s += "set title 'State " + std::to_string(k) + " trajectories'\n";
    s += "plot \\\n";
    for (int agent = 0; agent <= nf; ++agent)
      s += series_line(agent, 2 + k,
                       agent == 0 ? "reference"
                                  : "agent " + std::to_string(agent),
                       agent == nf);
  }
  s += "\nset output 'errors.svg'\n";
  s += "set ylabel '|x_i - x_0|'\n";
  s += "set title 'Synchronization error norms'\n";
  if (nf == 0) {
    s += "plot 1/0 notitle\n";
  } else {
    s += "plot \\\n";
    for (int agent = 1; agent <= nf; ++agent)
      s += series_line(agent, 4 + n, "agent " + std::to_string(agent),
                       agent == nf);
  }
  return s;
}

}  // namespace detail

// Writes one SVG overlay chart per state component (all agents plus the
// reference), one error-norm chart, and plots.gp regenerating them from
// trace.csv in the same directory. Returns the paths written.
inline std::vector<std::string> emit_plots(const SimulationTrace& tr,
                                           const std::string& dir) {
  if (tr.t.empty()) throw ValidationError("cannot plot an empty trace");
  std::filesystem::create_directories(dir);
  const int n = tr.layout.n(), nf = tr.n_followers;
  std::vector<std::string> written;

  for (int k = 0; k < n; ++k) {
    std::vector<detail::NamedSeries> series;
    for (int agent = 0; agent <= nf; ++agent) {
      std::vector<double> y(tr.samples());
      for (int s = 0; s < tr.samples(); ++s) y[s] = tr.x_at(s, agent)[k];
      series.emplace_back(
          agent == 0 ? "reference" : "agent " + std::to_string(agent),
          std::move(y));
    }
    const std::string path = dir + "/state" + std::to_string(k + 1) + ".svg";
    detail::write_text(
        path, detail::line_chart_svg(
                  "State " + std::to_string(k + 1) + " trajectories",
                  "x" + std::to_string(k + 1), tr.t, series));
    written.push_back(path);
  }

  std::vector<detail::NamedSeries> errs;
  for (int agent = 1; agent <= nf; ++agent) {
    std::vector<double> y(tr.samples());
    for (int s = 0; s < tr.samples(); ++s) y[s] = tr.err_ref[s][agent - 1];
    errs.emplace_back("agent " + std::to_string(agent), std::move(y));
  }
  const std::string epath = dir + "/errors.svg";
  detail::write_text(epath,
                     detail::line_chart_svg("Synchronization error norms",
                                            "|x_i - x_0|", tr.t, errs));
  written.push_back(epath);

  const std::string spath = dir + "/plots.gp";
  detail::write_text(spath, detail::regen_script(n, nf));
  written.push_back(spath);
  return written;
}

}  // namespace dmrac
