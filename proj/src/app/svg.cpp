#include "lpw/app/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>


namespace lpw::app {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 55;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return mag * (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0);
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) {
      const double pad = std::max(std::abs(lo) * 0.1, 0.5);
      lo -= pad;
      hi += pad;
    }
  }
};

}  // namespace

std::string render_svg(const Plot& plot) {
  auto ty = [&](double y) { return plot.log_y ? std::log10(y) : y; };

  Range xr, yr;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const auto& [x, y] = s.points[i];
      if (plot.log_y && !(y > 0.0)) continue;
      xr.add(x);
      const double e = i < s.errors.size() ? s.errors[i] : 0.0;
      yr.add(ty(y - e > 0.0 || !plot.log_y ? y - e : y));
      yr.add(ty(y + e));
    }
  }
  for (const auto& h : plot.hlines) {
    if (!plot.log_y || h.y > 0.0) yr.add(ty(h.y));
  }
  xr.finish();
  yr.finish();
  const double ypad = 0.05 * (yr.hi - yr.lo);
  yr.lo -= ypad;
  yr.hi += ypad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + (yr.hi - ty(y)) / (yr.hi - yr.lo) * ph; };
  auto py_t = [&](double t) { return kTop + (yr.hi - t) / (yr.hi - yr.lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(plot.title)
    << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = nice_step(xr.hi - xr.lo);
  for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi + 1e-9 * xs; t += xs) {
    o << "<line x1=\"" << num(px(t)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(px(t)) << "\" y2=\""
      << kTop + ph + 5 << "\" stroke=\"black\"/>";
    o << "<text x=\"" << num(px(t)) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
      << num(std::abs(t) < 1e-12 * xs ? 0.0 : t) << "</text>\n";
  }
  const double ys = plot.log_y ? std::max(1.0, std::round(nice_step(yr.hi - yr.lo))) : nice_step(yr.hi - yr.lo);
  for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi + 1e-9 * ys; t += ys) {
    const std::string label = plot.log_y ? "1e" + num(t) : num(std::abs(t) < 1e-12 * ys ? 0.0 : t);
    o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(py_t(t)) << "\" x2=\"" << kLeft << "\" y2=\""
      << num(py_t(t)) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(py_t(t) + 4) << "\" text-anchor=\"end\">" << label
      << "</text>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
    << escape(plot.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(plot.y_label) << "</text>\n";

  double legend_y = kTop + 10;
  auto legend = [&](const std::string& label, const std::string& color, bool dashed) {
    const double lx = kLeft + pw + 12;
    o << "<line x1=\"" << lx << "\" y1=\"" << legend_y << "\" x2=\"" << lx + 22 << "\" y2=\"" << legend_y
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << (dashed ? " stroke-dasharray=\"5,3\"" : "")
      << "/>";
    o << "<text x=\"" << lx + 28 << "\" y=\"" << legend_y + 4 << "\">" << escape(label) << "</text>\n";
    legend_y += 18;
  };

  for (const auto& h : plot.hlines) {
    if (plot.log_y && !(h.y > 0.0)) continue;
    o << "<line x1=\"" << kLeft << "\" y1=\"" << num(py(h.y)) << "\" x2=\"" << kLeft + pw << "\" y2=\""
      << num(py(h.y)) << "\" stroke=\"" << h.color << "\" stroke-dasharray=\"5,3\"/>\n";
    legend(h.label, h.color, true);
  }
  for (const auto& s : plot.series) {
    if (s.markers) {
      for (std::size_t i = 0; i < s.points.size(); ++i) {
        const auto& [x, y] = s.points[i];
        if (plot.log_y && !(y > 0.0)) continue;
        if (i < s.errors.size() && s.errors[i] > 0.0) {
          const double lo = plot.log_y ? std::max(y - s.errors[i], y * 1e-3) : y - s.errors[i];
          o << "<line x1=\"" << num(px(x)) << "\" y1=\"" << num(py(lo)) << "\" x2=\"" << num(px(x)) << "\" y2=\""
            << num(py(y + s.errors[i])) << "\" stroke=\"" << s.color << "\"/>";
        }
        o << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3.5\" fill=\"" << s.color
          << "\"/>\n";
      }
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [x, y] : s.points) {
        if (plot.log_y && !(y > 0.0)) continue;
        o << num(px(x)) << ',' << num(py(y)) << ' ';
      }
      o << "\"/>\n";
    }
    legend(s.label, s.color, false);
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace lpw::app
