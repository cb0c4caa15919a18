#include "ppac/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ppac/errors.hpp"

namespace ppac {

namespace {

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

std::string tick_label(double v) {
  if (std::abs(v) < 1e-12) return "0";
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

std::pair<double, double> padded(double lo, double hi) {
  if (!(lo < hi)) {
    const double c = std::isfinite(lo) ? lo : 0.0;
    const double h = std::max(1.0, std::abs(c)) * 0.5;
    return {c - h, c + h};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
  std::vector<double> out;
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi) || target < 1) return out;
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(v);
  return out;
}

std::string render_svg(const Plot& plot) {
  const double left = 70, right = 20, top = 36, bottom = 46;
  const double w = plot.width, h = plot.height;
  const double pw = w - left - right, ph = h - top - bottom;

  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : plot.series) {
    if (s.x.size() != s.y.size()) throw InvalidArgument("series '" + s.label + "' has mismatched x and y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      if (!std::isfinite(s.y[i])) continue;
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  if (!std::isfinite(xlo)) xlo = 0, xhi = 1;
  if (xlo == xhi) xhi = xlo + 1;
  if (plot.y_range) {
    ylo = plot.y_range->first;
    yhi = plot.y_range->second;
  } else {
    std::tie(ylo, yhi) = padded(ylo, yhi);
  }
  if (!(yhi > ylo)) std::tie(ylo, yhi) = padded(ylo, ylo);

  auto px = [&](double x) { return left + (x - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double y) { return top + (yhi - std::clamp(y, ylo, yhi)) / (yhi - ylo) * ph; };

  std::ostringstream o;
  o.precision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
    << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(plot.title)
    << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : nice_ticks(xlo, xhi)) {
    const double X = px(t);
    o << "<line x1=\"" << X << "\" y1=\"" << top + ph << "\" x2=\"" << X << "\" y2=\"" << top + ph + 5
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << X << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << tick_label(t)
      << "</text>\n";
  }
  for (double t : nice_ticks(ylo, yhi)) {
    const double Y = py(t);
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << Y << "\" x2=\"" << left + pw << "\" y2=\"" << Y
      << "\" stroke=\"#ddd\"/>";
    o << "<text x=\"" << left - 8 << "\" y=\"" << Y + 4 << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 8 << "\" text-anchor=\"middle\">" << escape(plot.x_label)
    << "</text>\n";
  o << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(plot.y_label) << "</text>\n";

  o << "<g fill=\"none\" stroke-width=\"1.5\">\n";
  for (const auto& s : plot.series) {
    // non-finite samples split the curve
    std::vector<std::string> runs;
    std::ostringstream pts;
    pts.precision(6);
    bool open = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        if (open) runs.push_back(pts.str());
        pts.str({});
        open = false;
        continue;
      }
      pts << (open ? " " : "") << px(s.x[i]) << ',' << py(s.y[i]);
      open = true;
    }
    if (open) runs.push_back(pts.str());
    for (const auto& r : runs) {
      o << "<polyline stroke=\"" << escape(s.color) << "\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
        << " points=\"" << r << "\"/>\n";
    }
  }
  o << "</g>\n";

  double ly = top + 14;
  for (const auto& s : plot.series) {
    if (s.label.empty()) continue;
    const double lx = left + pw - 150;
    o << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << escape(s.color) << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
      << "/>";
    o << "<text x=\"" << lx + 30 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
    ly += 16;
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const Plot& plot, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << render_svg(plot);
  if (!f) throw Error("write failed for " + path.string());
}

}  // namespace ppac
