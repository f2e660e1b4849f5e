#include "svg_plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace opscale::tools {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Roughly five round-numbered ticks covering [lo, hi].
std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) ticks.push_back(t);
  return ticks;
}

}  // namespace

std::string render_log_plot(const std::vector<Series>& series, const PlotOptions& opt) {
  const double left = 80, right = 190, top = 40, bottom = 60;
  const double pw = opt.width - left - right;
  const double ph = opt.height - top - bottom;
  auto ly = [&](double v) { return std::log10(std::max(v, opt.y_floor)); };

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      const double sd = s.std.empty() ? 0.0 : s.std[i];
      y_lo = std::min(y_lo, ly(s.mean[i] - sd > 0.0 ? s.mean[i] - sd : s.mean[i]));
      y_hi = std::max(y_hi, ly(s.mean[i] + sd));
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0, y_lo = -1.0, y_hi = 0.0;
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  y_lo = std::floor(y_lo);
  y_hi = std::ceil(y_hi);
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;

  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double l) { return top + (y_hi - l) / (y_hi - y_lo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
     << opt.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(opt.title) << "</text>\n";

  // Grid and y ticks at each decade.
  const int decade_step = std::max(1, static_cast<int>((y_hi - y_lo) / 10.0) + 1);
  for (int d = static_cast<int>(y_lo); d <= static_cast<int>(y_hi); d += decade_step) {
    const double y = py(d);
    os << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left + pw)
       << "\" y2=\"" << num(y) << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4)
       << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  for (double t : linear_ticks(x_lo, x_hi)) {
    const double x = px(t);
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(x)
       << "\" y2=\"" << num(top + ph + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(x) << "\" y=\"" << num(top + ph + 18)
       << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(opt.height - 18)
     << "\" text-anchor=\"middle\">" << escape(opt.x_label) << "</text>\n";
  os << "<text transform=\"translate(20," << num(top + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(opt.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    if (s.x.empty()) continue;
    if (!s.std.empty()) {
      os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        os << num(px(s.x[i])) << ',' << num(py(ly(s.mean[i] + s.std[i]))) << ' ';
      }
      for (std::size_t i = s.x.size(); i-- > 0;) {
        const double lo = s.mean[i] - s.std[i];
        os << num(px(s.x[i])) << ',' << num(py(ly(lo > 0.0 ? lo : opt.y_floor))) << ' ';
      }
      os << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      os << num(px(s.x[i])) << ',' << num(py(ly(s.mean[i]))) << ' ';
    }
    os << "\"/>\n";
    const double ly0 = top + 14 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << num(left + pw + 12) << "\" y1=\"" << num(ly0) << "\" x2=\""
       << num(left + pw + 36) << "\" y2=\"" << num(ly0) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(left + pw + 42) << "\" y=\"" << num(ly0 + 4) << "\">"
       << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace opscale::tools
