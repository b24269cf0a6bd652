#include "tdcosim/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace tdcosim::harness {

namespace {

constexpr double kWidth = 800, kHeight = 420;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

void pad(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double d = std::max(1e-9, std::abs(lo) * 1e-3);
    lo -= d;
    hi += d;
    return;
  }
  const double m = 0.05 * (hi - lo);
  lo -= m;
  hi += m;
}

std::string axes(const Frame& f, const std::string& title, const std::string& xl, const std::string& yl) {
  std::string s = fmt::format(
      R"(<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}" font-family="sans-serif" font-size="12">)"
      "\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kWidth, kHeight);
  s += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n", kWidth / 2,
                   escape(title));
  s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft, kTop,
                   kWidth - kLeft - kRight, kHeight - kTop - kBottom);
  for (int i = 0; i <= 5; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
    s += fmt::format("<line x1=\"{0:.1f}\" x2=\"{0:.1f}\" y1=\"{1}\" y2=\"{2}\" stroke=\"#ddd\"/>\n", f.px(xv), kTop,
                     kHeight - kBottom);
    s += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n", f.px(xv),
                     kHeight - kBottom + 16, xv);
    s += fmt::format("<line x1=\"{0}\" x2=\"{1}\" y1=\"{2:.1f}\" y2=\"{2:.1f}\" stroke=\"#ddd\"/>\n", kLeft,
                     kWidth - kRight, f.py(yv));
    s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.6g}</text>\n", kLeft - 6, f.py(yv) + 4, yv);
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kWidth / 2, kHeight - 18, escape(xl));
  s += fmt::format("<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
                   kHeight / 2, escape(yl));
  return s;
}

}  // namespace

std::string render_svg(const LinePlot& plot) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!(x1 > x0)) x1 = x0 + 1;
  pad(y0, y1);
  const Frame f{x0, x1, y0, y1};
  std::string out = axes(f, plot.title, plot.x_label, plot.y_label);
  double legend_y = kTop + 16;
  for (const auto& s : plot.series) {
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{} points=\"", s.color,
                       s.dashed ? " stroke-dasharray=\"6 4\"" : "");
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (std::isfinite(s.y[i])) out += fmt::format("{:.2f},{:.2f} ", f.px(s.x[i]), f.py(s.y[i]));
    }
    out += "\"/>\n";
    out += fmt::format("<line x1=\"{0}\" x2=\"{1}\" y1=\"{2}\" y2=\"{2}\" stroke=\"{3}\" stroke-width=\"2\"{4}/>\n",
                       kWidth - kRight - 170, kWidth - kRight - 145, legend_y - 4, s.color,
                       s.dashed ? " stroke-dasharray=\"6 4\"" : "");
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kWidth - kRight - 140, legend_y, escape(s.label));
    legend_y += 16;
  }
  return out + "</svg>\n";
}

std::string render_svg(const BarPlot& plot) {
  double y1 = 1.0;
  for (double c : plot.counts) y1 = std::max(y1, c);
  double x1 = plot.bin_width * std::max<std::size_t>(1, plot.counts.size());
  for (double m : plot.markers) x1 = std::max(x1, m * 1.05);
  const Frame f{0.0, x1, 0.0, y1 * 1.1};
  std::string out = axes(f, plot.title, plot.x_label, plot.y_label);
  for (std::size_t i = 0; i < plot.counts.size(); ++i) {
    if (plot.counts[i] <= 0) continue;
    const double xa = f.px(plot.bin_width * i), xb = f.px(plot.bin_width * (i + 1));
    out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"#4c72b0\"/>\n", xa,
                       f.py(plot.counts[i]), std::max(0.5, xb - xa), f.py(0) - f.py(plot.counts[i]));
  }
  for (double m : plot.markers) {
    out += fmt::format("<line x1=\"{0:.2f}\" x2=\"{0:.2f}\" y1=\"{1}\" y2=\"{2}\" stroke=\"#c44e52\" "
                       "stroke-dasharray=\"6 4\"/>\n",
                       f.px(m), kTop, kHeight - kBottom);
  }
  return out + "</svg>\n";
}

}  // namespace tdcosim::harness
