#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace fluxmine {

struct PlotLine {
  std::vector<double> values;  // NaN breaks the line
  std::string color;
  double stroke_width = 1.0;
};

namespace detail {
inline std::string escape_xml(const std::string& s) {
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
}  // namespace detail

/// Standalone SVG line chart of per-minute series sharing one y axis.
inline void write_svg_plot(std::ostream& out, const std::string& title, std::span<const PlotLine> lines,
                           int width = 960, int height = 360) {
  const double left = 50, right = 10, top = 30, bottom = 30;
  std::size_t n = 0;
  double hi = 0.0;
  for (const auto& l : lines) {
    n = std::max(n, l.values.size());
    for (double v : l.values)
      if (std::isfinite(v)) hi = std::max(hi, v);
  }
  if (hi <= 0.0) hi = 1.0;
  const double pw = width - left - right, ph = height - top - bottom;
  auto x = [&](std::size_t i) { return left + (n > 1 ? pw * double(i) / double(n - 1) : 0.0); };
  auto y = [&](double v) { return top + ph * (1.0 - v / hi); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
      << detail::escape_xml(title) << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"5\" y=\"" << top + 10 << "\" font-family=\"sans-serif\" font-size=\"10\">" << hi << "</text>\n";
  for (int hour = 0; hour <= 24; hour += 6) {
    const double hx = left + pw * hour / 24.0;
    out << "<text x=\"" << hx - 8 << "\" y=\"" << height - 10 << "\" font-family=\"sans-serif\" font-size=\"10\">"
        << hour << "h</text>\n";
  }
  out.precision(6);
  for (const auto& l : lines) {
    std::string d;
    bool pen = false;
    for (std::size_t i = 0; i < l.values.size(); ++i) {
      if (!std::isfinite(l.values[i])) {
        pen = false;
        continue;
      }
      d += pen ? " L" : " M";
      d += std::to_string(x(i)) + ' ' + std::to_string(y(l.values[i]));
      pen = true;
    }
    out << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"" << l.stroke_width
        << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace fluxmine
