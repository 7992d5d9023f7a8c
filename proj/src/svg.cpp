#include "corrprobe/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "corrprobe/error.hpp"
#include "corrprobe/io.hpp"
#include "corrprobe/text.hpp"

namespace corrprobe::svg {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
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
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) lo -= 1, hi += 1;
    const double pad = (hi - lo) * 0.05;
    lo -= pad;
    hi += pad;
  }
};

struct Frame {
  Range x, y;
  double sx(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight); }
  double sy(double v) const { return kHeight - kBottom - (v - y.lo) / (y.hi - y.lo) * (kHeight - kTop - kBottom); }
};

void header(std::ostringstream& o, const std::string& title) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << px(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
    << "</text>\n";
  o << "<clipPath id=\"plot\"><rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\""
    << px(kWidth - kLeft - kRight) << "\" height=\"" << px(kHeight - kTop - kBottom) << "\"/></clipPath>\n";
}

void axes(std::ostringstream& o, const Frame& f, const std::string& x_label, const std::string& y_label) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  o << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  o << "<line x1=\"" << px(x0) << "\" y1=\"" << px(y0) << "\" x2=\"" << px(x1) << "\" y2=\"" << px(y0) << "\"/>\n";
  o << "<line x1=\"" << px(x0) << "\" y1=\"" << px(y0) << "\" x2=\"" << px(x0) << "\" y2=\"" << px(y1) << "\"/>\n";
  o << "</g>\n<g class=\"ticks\" font-size=\"10\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x.lo + (f.x.hi - f.x.lo) * i / 4.0;
    const double yv = f.y.lo + (f.y.hi - f.y.lo) * i / 4.0;
    o << "<text x=\"" << px(f.sx(xv)) << "\" y=\"" << px(y0 + 16) << "\" text-anchor=\"middle\">" << tick(xv)
      << "</text>\n";
    o << "<text x=\"" << px(x0 - 6) << "\" y=\"" << px(f.sy(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
      << "</text>\n";
  }
  o << "</g>\n";
  o << "<text x=\"" << px((x0 + x1) / 2) << "\" y=\"" << px(kHeight - 16) << "\" text-anchor=\"middle\">"
    << escape(x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << px((y0 + y1) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << px((y0 + y1) / 2) << ")\">" << escape(y_label) << "</text>\n";
}

}  // namespace

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string render_scatter(const ScatterPlot& plot) {
  Frame f;
  for (const auto& p : plot.points) {
    f.x.add(p.x);
    f.y.add(p.y);
  }
  if (plot.has_fit && std::isfinite(f.x.lo)) {
    f.y.add(plot.slope * f.x.lo + plot.intercept);
    f.y.add(plot.slope * f.x.hi + plot.intercept);
  }
  const double x_lo = f.x.lo, x_hi = f.x.hi;
  f.x.finish();
  f.y.finish();

  std::ostringstream o;
  header(o, plot.title);
  axes(o, f, plot.x_label, plot.y_label);
  o << "<g class=\"points\" fill=\"#1f77b4\" fill-opacity=\"0.8\">\n";
  for (const auto& p : plot.points) {
    o << "<circle cx=\"" << px(f.sx(p.x)) << "\" cy=\"" << px(f.sy(p.y)) << "\" r=\"3\" data-label=\""
      << escape(p.label) << "\" data-x=\"" << io::format_double(p.x) << "\" data-y=\"" << io::format_double(p.y)
      << "\"><title>" << escape(p.label) << "</title></circle>\n";
  }
  o << "</g>\n";
  if (plot.has_fit) {
    const double a = std::isfinite(x_lo) ? x_lo : f.x.lo;
    const double b = std::isfinite(x_hi) ? x_hi : f.x.hi;
    o << "<line class=\"fit\" clip-path=\"url(#plot)\" stroke=\"#d62728\" stroke-width=\"1.5\" x1=\"" << px(f.sx(a))
      << "\" y1=\"" << px(f.sy(plot.slope * a + plot.intercept)) << "\" x2=\"" << px(f.sx(b)) << "\" y2=\""
      << px(f.sy(plot.slope * b + plot.intercept)) << "\" data-slope=\"" << io::format_double(plot.slope)
      << "\" data-intercept=\"" << io::format_double(plot.intercept) << "\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<Series> parse_series_csv(std::istream& in, const std::string& source_name) {
  std::string raw;
  std::vector<Series> series;
  std::size_t line_no = 0;
  bool have_header = false;
  auto parse_number = [&](const std::string& cell, const std::string& where) {
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      return v;
    } catch (const std::exception&) {
      throw InputError(where + ": not a number '" + cell + "'");
    }
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = text::trim(text::strip_line(raw));
    if (line.empty() || line.front() == '#') continue;
    const auto cells = text::split(line, ',');
    const std::string where = source_name + ":" + std::to_string(line_no);
    if (!have_header) {
      if (cells.size() < 2) throw InputError(where + ": expected header 'step,<series>,...'");
      for (std::size_t i = 1; i < cells.size(); ++i) series.push_back({text::trim(cells[i]), {}, {}});
      have_header = true;
      continue;
    }
    if (cells.size() != series.size() + 1) {
      throw InputError(where + ": expected " + std::to_string(series.size() + 1) + " cells");
    }
    const double step = parse_number(text::trim(cells[0]), where);
    for (std::size_t i = 1; i < cells.size(); ++i) {
      const std::string c = text::trim(cells[i]);
      if (c.empty()) continue;
      series[i - 1].steps.push_back(step);
      series[i - 1].values.push_back(parse_number(c, where));
    }
  }
  if (!have_header) throw InputError(source_name + ": empty series file");
  return series;
}

std::string render_series(const std::string& title, const std::vector<Series>& series) {
  Frame f;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
      f.x.add(s.steps[i]);
      f.y.add(s.values[i]);
    }
  }
  f.x.finish();
  f.y.finish();
  std::ostringstream o;
  header(o, title);
  axes(o, f, "step", "value");
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    o << "<polyline class=\"series\" data-name=\"" << escape(s.name) << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
      if (i) o << ' ';
      o << px(f.sx(s.steps[i])) << ',' << px(f.sy(s.values[i]));
    }
    o << "\"/>\n";
    o << "<text x=\"" << px(kWidth - kRight - 4) << "\" y=\"" << px(kTop + 14 + 14 * static_cast<double>(k))
      << "\" text-anchor=\"end\" fill=\"" << color << "\">" << escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace corrprobe::svg
