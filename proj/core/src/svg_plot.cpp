#include "gacl/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gacl::plot {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::string LineChart::render() const {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  std::size_t total = 0;
  for (const Series& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
      ++total;
    }
  }
  if (total == 0) throw std::invalid_argument("plot '" + title + "' has no data points");
  if (x1 - x0 <= 0.0) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 <= 0.0) { y0 -= 0.5; y1 += 0.5; }

  const double left = 70.0;
  const double right = 170.0;
  const double top = 40.0;
  const double bottom = 55.0;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  if (equal_aspect) {
    const double sx = (x1 - x0) / pw;
    const double sy = (y1 - y0) / ph;
    const double s = std::max(sx, sy);
    const double cx = 0.5 * (x0 + x1);
    const double cy = 0.5 * (y0 + y1);
    x0 = cx - 0.5 * s * pw;
    x1 = cx + 0.5 * s * pw;
    y0 = cy - 0.5 * s * ph;
    y1 = cy + 0.5 * s * ph;
  }
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"16\">" << escape_xml(title) << "</text>\n";
  o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
    << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    o << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(px(xv))
      << "\" y2=\"" << num(top + ph) << "\" stroke=\"#ddd\"/>\n";
    o << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << num(left + pw)
      << "\" y2=\"" << num(py(yv)) << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(top + ph + 18)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << tick_label(xv) << "</text>\n";
    o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(yv) + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(yv)
      << "</text>\n";
  }
  o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 12.0)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
    << escape_xml(x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 "
    << num(top + ph / 2) << ")\">" << escape_xml(y_label) << "</text>\n";

  for (double xm : vertical_markers) {
    if (xm < x0 || xm > x1) continue;
    o << "<line x1=\"" << num(px(xm)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(px(xm))
      << "\" y2=\"" << num(top + ph) << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  }

  for (std::size_t s = 0; s < series.size(); ++s) {
    const Series& ser = series[s];
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::ostringstream pts;
    bool first = true;
    for (const auto& [x, y] : ser.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!first) pts << ' ';
      pts << num(px(x)) << ',' << num(py(y));
      first = false;
    }
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\""
      << pts.str() << "\"/>\n";
    if (ser.markers) {
      for (const auto& [x, y] : ser.points) {
        if (!std::isfinite(x) || !std::isfinite(y)) continue;
        o << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
      }
    }
    const double ly = top + 14.0 + 18.0 * static_cast<double>(s);
    o << "<line x1=\"" << num(left + pw + 10) << "\" y1=\"" << num(ly) << "\" x2=\""
      << num(left + pw + 30) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << num(left + pw + 35) << "\" y=\"" << num(ly + 4)
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(ser.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace gacl::plot
