#include "unlearn/svg_heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "unlearn/theory.hpp"

namespace unlearn {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// five-anchor viridis approximation
std::string color_for(double t) {
  static const double anchors[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int lo = std::min(3, static_cast<int>(t));
  const double f = t - lo;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(anchors[lo][0] * (1 - f) + anchors[lo + 1][0] * f)),
                static_cast<int>(std::lround(anchors[lo][1] * (1 - f) + anchors[lo + 1][1] * f)),
                static_cast<int>(std::lround(anchors[lo][2] * (1 - f) + anchors[lo + 1][2] * f)));
  return buf;
}

struct Axis {
  std::vector<double> values;   // sorted ascending
  std::vector<double> edges;    // values.size() + 1 cell boundaries
  bool log = true;
  double lo = 0.0, hi = 1.0;    // outer edges

  double unit(double v) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    return (x - a) / (b - a);
  }
};

Axis build_axis(std::vector<double> values, bool want_log) {
  Axis ax;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  ax.values = values;
  ax.log = want_log && values.front() > 0.0;
  const auto mid = [&](double a, double b) { return ax.log ? std::sqrt(a * b) : 0.5 * (a + b); };
  ax.edges.resize(values.size() + 1);
  if (values.size() == 1) {
    const double pad = ax.log ? 1.25 : (values[0] == 0.0 ? 0.5 : 0.25 * std::fabs(values[0]));
    ax.edges[0] = ax.log ? values[0] / pad : values[0] - pad;
    ax.edges[1] = ax.log ? values[0] * pad : values[0] + pad;
  } else {
    for (std::size_t i = 1; i < values.size(); ++i) ax.edges[i] = mid(values[i - 1], values[i]);
    if (ax.log) {
      ax.edges.front() = values.front() * values.front() / ax.edges[1];
      ax.edges.back() = values.back() * values.back() / ax.edges[values.size() - 1];
    } else {
      ax.edges.front() = 2.0 * values.front() - ax.edges[1];
      ax.edges.back() = 2.0 * values.back() - ax.edges[values.size() - 1];
    }
  }
  ax.lo = ax.edges.front();
  ax.hi = ax.edges.back();
  return ax;
}

std::vector<double> decade_ticks(double lo, double hi) {
  std::vector<double> out;
  const int k0 = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
  const int k1 = static_cast<int>(std::floor(std::log10(hi) + 1e-9));
  for (int k = k0; k <= k1; ++k) out.push_back(std::pow(10.0, k));
  return out;
}

std::vector<double> linear_ticks(double lo, double hi) {
  std::vector<double> out;
  const double span = hi - lo;
  if (span <= 0.0) return {lo};
  const double step = std::pow(10.0, std::floor(std::log10(span / 4.0)));
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) out.push_back(v);
  return out;
}

}  // namespace

std::string render_svg_heatmap(const ParsedResults& results, const HeatmapOptions& opts) {
  const std::vector<PhaseCell>& cells = results.cells;
  if (cells.empty()) throw std::runtime_error("heatmap: no cells");

  auto value_of = [&](const PhaseCell& c) -> double {
    if (opts.value_column == "ratio") return c.ratio;
    if (opts.value_column == "t_scratch_mean") return c.mean_t_scratch;
    if (opts.value_column == "t_unlearn_mean") return c.mean_t_unlearn;
    throw std::runtime_error("heatmap: unknown value column '" + opts.value_column + "'");
  };

  std::vector<double> es, ks;
  for (const PhaseCell& c : cells) {
    es.push_back(c.e);
    ks.push_back(c.kdp);
  }
  Axis ey = build_axis(es, opts.log_y);
  Axis kx = build_axis(ks, opts.log_x);
  if (cells.size() != ey.values.size() * kx.values.size())
    throw std::runtime_error("heatmap: rows do not form a complete e x kdp grid");

  std::map<std::pair<double, double>, const PhaseCell*> by_key;
  for (const PhaseCell& c : cells) {
    if (!by_key.emplace(std::make_pair(c.e, c.kdp), &c).second)
      throw std::runtime_error("heatmap: duplicate cell for e=" + fmt(c.e) + " kdp=" + fmt(c.kdp));
  }

  double vmax = 0.0;
  for (const PhaseCell& c : cells) {
    const double v = value_of(c);
    if (std::isfinite(v)) vmax = std::max(vmax, v);
  }
  if (vmax <= 0.0) vmax = 1.0;

  const double ml = 76, mr = 120, mt = 46, mb = 64;
  const double pw = opts.width - ml - mr, ph = opts.height - mt - mb;
  auto X = [&](double u) { return ml + u * pw; };
  auto Y = [&](double u) { return mt + (1.0 - u) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(opts.width) + "\" height=\"" + std::to_string(opts.height) + "\">\n";
  svg += "<defs>\n"
         "<pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"6\" height=\"6\">"
         "<path d=\"M0,6 L6,0\" stroke=\"#000000\" stroke-opacity=\"0.45\" stroke-width=\"1\"/>"
         "</pattern>\n<linearGradient id=\"scale\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">\n";
  for (int i = 0; i <= 8; ++i) {
    const double t = i / 8.0;
    svg += "<stop offset=\"" + fmt(100.0 * t) + "%\" stop-color=\"" + color_for(t) + "\"/>\n";
  }
  svg += "</linearGradient>\n</defs>\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(opts.width) + "\" height=\"" +
         std::to_string(opts.height) + "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(ml) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" +
         opts.value_column + " (" + results.meta.loss_mode + ", rf=" + fmt(results.meta.rf) +
         ")</text>\n";

  // cells
  for (std::size_t i = 0; i < ey.values.size(); ++i) {
    for (std::size_t j = 0; j < kx.values.size(); ++j) {
      const PhaseCell& c = *by_key.at(std::make_pair(ey.values[i], kx.values[j]));
      const double x0 = X(kx.unit(kx.edges[j])), x1 = X(kx.unit(kx.edges[j + 1]));
      const double y0 = Y(ey.unit(ey.edges[i + 1])), y1 = Y(ey.unit(ey.edges[i]));
      const double v = value_of(c);
      const double t = std::isfinite(v) ? v / vmax : 1.0;
      svg += "<rect class=\"cell\" x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" +
             fmt(x1 - x0) + "\" height=\"" + fmt(y1 - y0) + "\" fill=\"" + color_for(t) +
             "\"><title>e=" + fmt(c.e) + " kdp=" + fmt(c.kdp) + " value=" + fmt(v) +
             "</title></rect>\n";
      if (c.n_censored_scratch > 0 || c.n_censored_unlearn > 0) {
        svg += "<rect class=\"censored\" x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" +
               fmt(x1 - x0) + "\" height=\"" + fmt(y1 - y0) + "\" fill=\"url(#hatch)\"/>\n";
      }
    }
  }

  // theory overlay
  if (opts.overlay_theory) {
    const ProblemSpec spec =
        make_problem(results.meta.mu, results.meta.lipschitz, std::max<std::size_t>(1, results.meta.dim));
    const ForgetSplit split = make_forget_split(results.meta.rf);
    struct Line {
      const char* id;
      const char* color;
      double (*f)(const ProblemSpec&, const ForgetSplit&, double);
    };
    const Line lines[] = {
        {"theory-trivial", "#ffffff",
         [](const ProblemSpec& s, const ForgetSplit& fs, double k) {
           return theory::trivial_boundary(s, fs, k);
         }},
        {"theory-inefficient", "#ff5533",
         [](const ProblemSpec& s, const ForgetSplit& fs, double k) {
           return theory::inefficient_boundary(s, fs, k);
         }},
        {"theory-efficient", "#ffaa00",
         [](const ProblemSpec& s, const ForgetSplit& fs, double k) {
           return theory::efficient_threshold(s, fs, k);
         }},
    };
    for (const Line& line : lines) {
      std::string d;
      bool pen_down = false;
      const int samples = 257;
      for (int s = 0; s < samples; ++s) {
        const double u = static_cast<double>(s) / (samples - 1);
        const double k = kx.log ? std::pow(10.0, std::log10(kx.lo) +
                                                     u * (std::log10(kx.hi) - std::log10(kx.lo)))
                                : kx.lo + u * (kx.hi - kx.lo);
        const double e = line.f(spec, split, k);
        if (e < ey.lo || e > ey.hi || (ey.log && e <= 0.0)) {
          pen_down = false;
          continue;
        }
        d += (pen_down ? "L" : "M") + fmt(X(kx.unit(k))) + "," + fmt(Y(ey.unit(e))) + " ";
        pen_down = true;
      }
      if (!d.empty()) {
        svg += "<path id=\"" + std::string(line.id) + "\" class=\"theory\" d=\"" + d +
               "\" fill=\"none\" stroke=\"" + line.color +
               "\" stroke-width=\"2\" stroke-dasharray=\"6 3\"/>\n";
      }
    }
    if (spec.e0 >= ey.lo && spec.e0 <= ey.hi) {
      const double y = Y(ey.unit(spec.e0));
      svg += "<path id=\"theory-e0\" class=\"theory\" d=\"M" + fmt(X(0)) + "," + fmt(y) + " L" +
             fmt(X(1)) + "," + fmt(y) + "\" fill=\"none\" stroke=\"#dddddd\" stroke-width=\"1.5\""
             " stroke-dasharray=\"2 3\"/>\n";
    }
  }

  // frame + axes
  svg += "<rect x=\"" + fmt(ml) + "\" y=\"" + fmt(mt) + "\" width=\"" + fmt(pw) + "\" height=\"" +
         fmt(ph) + "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (double v : kx.log ? decade_ticks(kx.lo, kx.hi) : linear_ticks(kx.lo, kx.hi)) {
    const double x = X(kx.unit(v));
    svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(mt + ph) + "\" x2=\"" + fmt(x) + "\" y2=\"" +
           fmt(mt + ph + 5) + "\" stroke=\"#333\"/>\n";
    svg += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(mt + ph + 20) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" + fmt(v) +
           "</text>\n";
  }
  for (double v : ey.log ? decade_ticks(ey.lo, ey.hi) : linear_ticks(ey.lo, ey.hi)) {
    const double y = Y(ey.unit(v));
    svg += "<line x1=\"" + fmt(ml - 5) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(ml) + "\" y2=\"" +
           fmt(y) + "\" stroke=\"#333\"/>\n";
    svg += "<text x=\"" + fmt(ml - 8) + "\" y=\"" + fmt(y + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" + fmt(v) +
           "</text>\n";
  }
  svg += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"" + fmt(mt + ph + 44) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">privacy constraint"
         " kdp</text>\n";
  svg += "<text x=\"20\" y=\"" + fmt(mt + ph / 2) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate"
         "(-90 20 " + fmt(mt + ph / 2) + ")\">target excess risk e</text>\n";

  // color bar
  const double bx = ml + pw + 24, bw = 18;
  svg += "<rect x=\"" + fmt(bx) + "\" y=\"" + fmt(mt) + "\" width=\"" + fmt(bw) + "\" height=\"" +
         fmt(ph) + "\" fill=\"url(#scale)\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double t = i / 4.0;
    svg += "<text x=\"" + fmt(bx + bw + 6) + "\" y=\"" + fmt(mt + (1 - t) * ph + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + fmt(t * vmax) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void write_svg_heatmap(const std::string& path, const ParsedResults& results,
                       const HeatmapOptions& opts) {
  const std::string svg = render_svg_heatmap(results, opts);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << svg;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace unlearn
