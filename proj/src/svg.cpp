#include "supcar/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace supcar {
namespace {

constexpr double kW = 800.0, kH = 500.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b"};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

// Largest of 1/2/5 x 10^k not above the raw step.
double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {5.0, 2.0, 1.0})
    if (m * mag <= raw * (1.0 + 1e-12)) return m * mag;
  return mag;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  double screen(double v, double s0, double s1) const {
    return s0 + (v - lo) / (hi - lo) * (s1 - s0);
  }
};

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel,
                          const std::vector<PlotSeries>& series) {
  Axis ax, ay;
  bool any = false;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("svg_line_plot: x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        throw std::invalid_argument("svg_line_plot: nonfinite data");
      if (!any) {
        ax = {s.x[i], s.x[i]};
        ay = {s.y[i], s.y[i]};
        any = true;
      }
      ax.lo = std::min(ax.lo, s.x[i]);
      ax.hi = std::max(ax.hi, s.x[i]);
      ay.lo = std::min(ay.lo, s.y[i]);
      ay.hi = std::max(ay.hi, s.y[i]);
    }
  }
  if (!any) throw std::invalid_argument("svg_line_plot: no data");
  if (ax.hi == ax.lo) ax.hi = ax.lo + 1.0;
  const double pad = (ay.hi - ay.lo) * 0.05;
  ay.lo -= pad > 0.0 ? pad : 0.5;
  ay.hi += pad > 0.0 ? pad : 0.5;

  auto sx = [&](double v) { return ax.screen(v, kLeft, kW - kRight); };
  auto sy = [&](double v) { return ay.screen(v, kH - kBottom, kTop); };

  std::string out;
  char buf[256];
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" "
         "height=\"500\" viewBox=\"0 0 800 500\">\n";
  out += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"24\" font-family=\"sans-serif\" "
                "font-size=\"16\" text-anchor=\"middle\">%s</text>\n",
                (kLeft + kW - kRight) / 2, title.c_str());
  out += buf;

  // frame
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" "
                "fill=\"none\" stroke=\"black\"/>\n",
                kLeft, kTop, kW - kLeft - kRight, kH - kTop - kBottom);
  out += buf;

  // ticks
  const double xstep = nice_step(ax.hi - ax.lo);
  for (double v = std::ceil(ax.lo / xstep) * xstep; v <= ax.hi + 1e-9 * xstep;
       v += xstep) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
                  "stroke=\"black\"/>\n",
                  sx(v), kH - kBottom, sx(v), kH - kBottom + 5);
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" "
                  "font-size=\"12\" text-anchor=\"middle\">%s</text>\n",
                  sx(v), kH - kBottom + 20, fmt(v).c_str());
    out += buf;
  }
  const double ystep = nice_step(ay.hi - ay.lo);
  for (double v = std::ceil(ay.lo / ystep) * ystep; v <= ay.hi + 1e-9 * ystep;
       v += ystep) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
                  "stroke=\"black\"/>\n",
                  kLeft - 5, sy(v), kLeft, sy(v));
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" "
                  "font-size=\"12\" text-anchor=\"end\">%s</text>\n",
                  kLeft - 9, sy(v) + 4, fmt(v).c_str());
    out += buf;
  }

  // axis labels
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" "
                "font-size=\"14\" text-anchor=\"middle\">%s</text>\n",
                (kLeft + kW - kRight) / 2, kH - 10, xlabel.c_str());
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"18\" y=\"%g\" font-family=\"sans-serif\" "
                "font-size=\"14\" text-anchor=\"middle\" "
                "transform=\"rotate(-90 18 %g)\">%s</text>\n",
                (kTop + kH - kBottom) / 2, (kTop + kH - kBottom) / 2,
                ylabel.c_str());
  out += buf;

  // zero line when the y-range crosses it
  if (ay.lo < 0.0 && ay.hi > 0.0) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
                  "stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n",
                  kLeft, sy(0.0), kW - kRight, sy(0.0));
    out += buf;
  }

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof *kColors)];
    out += "<polyline fill=\"none\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(s.x[i]), sy(s.y[i]));
      out += buf;
    }
    out += "\"/>\n";
    if (!s.label.empty()) {
      std::snprintf(buf, sizeof buf,
                    "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" "
                    "font-size=\"12\" fill=\"%s\">%s</text>\n",
                    kW - kRight - 150.0, kTop + 18.0 + 16.0 * k, color,
                    s.label.c_str());
      out += buf;
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace supcar
