#include "fleetfl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fleetfl::svg {

namespace {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

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

const char* color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo <= 0.0) {
      const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
      lo -= pad;
      hi += pad;
    }
  }
  double frac(double v) const { return (v - lo) / (hi - lo); }
};

void header(std::ostringstream& o, const Axes& a) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(a.title) << "</text>\n"
    << "<text x=\"" << kLeft + (kWidth - kLeft - kRight) / 2 << "\" y=\"" << kHeight - 10
    << "\" text-anchor=\"middle\">" << escape(a.x_label) << "</text>\n"
    << "<text transform=\"translate(16," << kTop + (kHeight - kTop - kBottom) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(a.y_label) << "</text>\n";
}

void frame(std::ostringstream& o, const Range& y) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  o << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\""
    << y0 - y1 << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = y.lo + (y.hi - y.lo) * i / 4.0;
    const double py = y0 - (y0 - y1) * i / 4.0;
    o << "<text x=\"" << x0 - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << v
      << "</text>\n";
  }
}

void legend(std::ostringstream& o, const std::vector<Series>& series) {
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 10 + 18.0 * static_cast<double>(i);
    o << "<rect x=\"" << kWidth - kRight + 12 << "\" y=\"" << y - 9 << "\" width=\"12\" height=\"12\" fill=\""
      << color(i) << "\"/>\n<text x=\"" << kWidth - kRight + 30 << "\" y=\"" << y + 1 << "\">"
      << escape(series[i].name) << "</text>\n";
  }
}

}  // namespace

std::string line_chart(const Axes& axes, const std::vector<Series>& series) {
  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.settle();
  yr.settle();
  std::ostringstream o;
  o.precision(6);
  header(o, axes);
  frame(o, yr);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  for (int i = 0; i <= 4; ++i) {
    const double v = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    o << "<text x=\"" << x0 + (x1 - x0) * i / 4.0 << "\" y=\"" << y0 + 16
      << "\" text-anchor=\"middle\">" << v << "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    o << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << color(i) << "\" points=\"";
    const auto& s = series[i];
    for (std::size_t j = 0; j < std::min(s.x.size(), s.y.size()); ++j) {
      if (!std::isfinite(s.y[j])) continue;
      o << x0 + (x1 - x0) * xr.frac(s.x[j]) << ',' << y0 - (y0 - y1) * yr.frac(s.y[j]) << ' ';
    }
    o << "\"/>\n";
  }
  legend(o, series);
  o << "</svg>\n";
  return o.str();
}

std::string stacked_bars(const Axes& axes, const std::vector<std::string>& categories,
                         const std::vector<Series>& series) {
  Range yr;
  yr.add(0.0);
  for (std::size_t c = 0; c < categories.size(); ++c) {
    double total = 0.0;
    for (const auto& s : series) total += c < s.y.size() ? s.y[c] : 0.0;
    yr.add(total);
  }
  yr.settle();
  std::ostringstream o;
  o.precision(6);
  header(o, axes);
  frame(o, yr);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  const double slot = (x1 - x0) / static_cast<double>(std::max<std::size_t>(categories.size(), 1));
  const std::size_t label_every = std::max<std::size_t>(1, categories.size() / 10);
  for (std::size_t c = 0; c < categories.size(); ++c) {
    double base = 0.0;
    const double bx = x0 + slot * static_cast<double>(c) + slot * 0.1;
    for (std::size_t i = 0; i < series.size(); ++i) {
      const double v = c < series[i].y.size() ? series[i].y[c] : 0.0;
      const double top = y0 - (y0 - y1) * yr.frac(base + v);
      const double bottom = y0 - (y0 - y1) * yr.frac(base);
      o << "<rect x=\"" << bx << "\" y=\"" << top << "\" width=\"" << slot * 0.8 << "\" height=\""
        << bottom - top << "\" fill=\"" << color(i) << "\"/>\n";
      base += v;
    }
    if (c % label_every == 0) {
      o << "<text x=\"" << bx + slot * 0.4 << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">"
        << escape(categories[c]) << "</text>\n";
    }
  }
  legend(o, series);
  o << "</svg>\n";
  return o.str();
}

}  // namespace fleetfl::svg
