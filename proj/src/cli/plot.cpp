#include "blochspec/cli/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace blochspec::cli {

namespace {

constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 80, kRight = 560, kTop = 40, kBottom = 380;
constexpr const char* kFont = "font-family=\"DejaVu Sans, Arial, sans-serif\"";

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  std::string s = buf;
  return s == "-0.00" ? "0.00" : s;
}

std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", std::abs(x) < 1e-12 ? 0.0 : x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

double nice_step(double range) {
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      const double d = std::max(1.0, std::abs(lo)) * 0.5;
      lo -= d;
      hi += d;
    }
    const double m = 0.04 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

class Frame {
 public:
  Frame(Range x, Range y, double right = kRight) : x_(x), y_(y), right_(right) {}

  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * (right_ - kLeft); }
  double py(double y) const { return kBottom - (y - y_.lo) / (y_.hi - y_.lo) * (kBottom - kTop); }

  void begin(std::ostringstream& os, const std::string& title) const {
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" fill=\"white\"/>\n"
       << "<text x=\"" << num(0.5 * (kLeft + right_)) << "\" y=\"24\" " << kFont
       << " font-size=\"14\" text-anchor=\"middle\">" << escape(title) << "</text>\n";
  }

  void axes(std::ostringstream& os, const std::string& xlabel, const std::string& ylabel) const {
    os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(right_ - kLeft)
       << "\" height=\"" << num(kBottom - kTop) << "\" fill=\"none\" stroke=\"black\"/>\n";
    ticks(os, x_, true);
    ticks(os, y_, false);
    os << "<text x=\"" << num(0.5 * (kLeft + right_)) << "\" y=\"" << num(kBottom + 40) << "\" "
       << kFont << " font-size=\"13\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n"
       << "<text x=\"20\" y=\"" << num(0.5 * (kTop + kBottom)) << "\" " << kFont
       << " font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
       << num(0.5 * (kTop + kBottom)) << ")\">" << escape(ylabel) << "</text>\n";
  }

 private:
  void ticks(std::ostringstream& os, const Range& r, bool horizontal) const {
    const double step = nice_step(r.hi - r.lo);
    for (double t = std::ceil(r.lo / step) * step; t <= r.hi + 1e-9 * step; t += step) {
      if (horizontal) {
        const double x = px(t);
        os << "<line x1=\"" << num(x) << "\" y1=\"" << num(kBottom) << "\" x2=\"" << num(x)
           << "\" y2=\"" << num(kBottom + 5) << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << num(x) << "\" y=\"" << num(kBottom + 18) << "\" " << kFont
           << " font-size=\"11\" text-anchor=\"middle\">" << label(t) << "</text>\n";
      } else {
        const double y = py(t);
        os << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft)
           << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y + 4) << "\" " << kFont
           << " font-size=\"11\" text-anchor=\"end\">" << label(t) << "</text>\n";
      }
    }
  }

  Range x_, y_;
  double right_;
};

std::string color(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{{68, 1, 84},
                                                               {59, 82, 139},
                                                               {33, 145, 140},
                                                               {94, 201, 98},
                                                               {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(i);
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

}  // namespace

std::string band_structure_svg(const SpectrumResult& result, double period) {
  Range x, y;
  std::size_t points = 0;
  for (const SpectrumEntry& e : result.entries) {
    if (!e.ok) continue;
    for (cplx z : e.eigenvalues) {
      x.add(e.sigma);
      y.add(z.real());
      ++points;
    }
  }
  if (points == 0) throw DomainError("emit_plot: empty result (no eigenvalues to plot)");
  x.lo = std::min(x.lo, 0.0);
  x.hi = std::max(x.hi, brillouin_width(period));
  y.pad();
  const Frame frame(x, y);
  std::ostringstream os;
  const int J = result.entries.front().J;
  frame.begin(os, "Band structure, J = " + std::to_string(J));
  frame.axes(os, "sigma", "Re lambda");
  os << "<g fill=\"#1f4e9c\">\n";
  for (const SpectrumEntry& e : result.entries) {
    if (!e.ok) continue;
    for (cplx z : e.eigenvalues)
      os << "<circle cx=\"" << num(frame.px(e.sigma)) << "\" cy=\"" << num(frame.py(z.real()))
         << "\" r=\"1.8\"/>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

std::string evans_landscape_svg(const EvansGrid& g) {
  const LambdaGrid& lg = g.grid;
  if (g.log_mag.empty() || g.log_mag.size() != static_cast<std::size_t>(lg.re_points * lg.im_points))
    throw DomainError("emit_plot: empty result (no Evans values to plot)");
  Range c;
  for (double v : g.log_mag)
    if (std::isfinite(v)) c.add(v);
  if (!(c.hi >= c.lo)) c = {-1.0, 0.0};
  if (!(c.hi > c.lo)) c.hi = c.lo + 1.0;

  const double dre = (lg.re_max - lg.re_min) / (lg.re_points - 1);
  const double dim = (lg.im_max - lg.im_min) / (lg.im_points - 1);
  const Range x{lg.re_min - 0.5 * dre, lg.re_max + 0.5 * dre};
  const Range y{lg.im_min - 0.5 * dim, lg.im_max + 0.5 * dim};
  const double right = 520;
  const Frame frame(x, y, right);
  std::ostringstream os;
  frame.begin(os, "log |D|, sigma = " + label(g.sigma) + ", J = " + std::to_string(g.J));
  os << "<g shape-rendering=\"crispEdges\">\n";
  for (int i = 0; i < lg.im_points; ++i) {
    const double im = lg.im_min + i * dim;
    for (int r = 0; r < lg.re_points; ++r) {
      const double re = lg.re_min + r * dre;
      const double v = g.log_mag[static_cast<std::size_t>(i) * lg.re_points + r];
      const double t = std::isfinite(v) ? (v - c.lo) / (c.hi - c.lo) : (v > 0 ? 1.0 : 0.0);
      const double x0 = frame.px(re - 0.5 * dre), x1 = frame.px(re + 0.5 * dre);
      const double y0 = frame.py(im + 0.5 * dim), y1 = frame.py(im - 0.5 * dim);
      os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0 + 0.3)
         << "\" height=\"" << num(y1 - y0 + 0.3) << "\" fill=\"" << color(t) << "\"/>\n";
    }
  }
  os << "</g>\n";
  frame.axes(os, "Re lambda", "Im lambda");

  // Colour bar.
  const double bx = 545, bw = 18;
  const int steps = 32;
  for (int s = 0; s < steps; ++s) {
    const double y0 = kTop + (kBottom - kTop) * (steps - 1 - s) / steps;
    os << "<rect x=\"" << num(bx) << "\" y=\"" << num(y0) << "\" width=\"" << num(bw)
       << "\" height=\"" << num((kBottom - kTop) / steps + 0.3) << "\" fill=\""
       << color((s + 0.5) / steps) << "\" shape-rendering=\"crispEdges\"/>\n";
  }
  os << "<rect x=\"" << num(bx) << "\" y=\"" << num(kTop) << "\" width=\"" << num(bw) << "\" height=\""
     << num(kBottom - kTop) << "\" fill=\"none\" stroke=\"black\"/>\n"
     << "<text x=\"" << num(bx + bw + 4) << "\" y=\"" << num(kTop + 10) << "\" " << kFont
     << " font-size=\"11\">" << label(c.hi) << "</text>\n"
     << "<text x=\"" << num(bx + bw + 4) << "\" y=\"" << num(kBottom) << "\" " << kFont
     << " font-size=\"11\">" << label(c.lo) << "</text>\n"
     << "</svg>\n";
  return os.str();
}

std::string convergence_svg(const ConvergenceReport* evans, const ConvergenceReport* spectral) {
  struct Series {
    const char* name;
    const char* colour;
    const ConvergenceReport* report;
    const std::vector<double>* errors;
  };
  std::vector<Series> series;
  if (evans) series.push_back({"Evans", "#c0392b", evans, &evans->evans_errors});
  if (spectral) series.push_back({"spectral", "#1f4e9c", spectral, &spectral->spectral_errors});

  Range x, y;
  bool any = false;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.errors->size() && i < s.report->J_values.size(); ++i) {
      x.add(std::log10(s.report->J_values[i]));
      any = true;
      if ((*s.errors)[i] >= kErrorFloor) y.add(std::log10((*s.errors)[i]));
    }
  }
  if (!any) throw DomainError("emit_plot: empty result (no convergence data to plot)");
  if (!(y.hi >= y.lo)) y = {std::log10(kErrorFloor), 0.0};
  x.pad();
  y.pad();
  const Frame frame(x, y);
  std::ostringstream os;
  frame.begin(os, "Convergence, J_ref = " + std::to_string(series.front().report->J_ref));
  frame.axes(os, "log10 J", "log10 error");

  double legend_y = kTop + 18;
  for (const Series& s : series) {
    const auto& J = s.report->J_values;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.errors->size() && i < J.size(); ++i)
      if ((*s.errors)[i] >= kErrorFloor) pts.push_back({std::log10(J[i]), std::log10((*s.errors)[i])});
    os << "<g fill=\"" << s.colour << "\">\n";
    for (const auto& [lx, ly] : pts)
      os << "<circle cx=\"" << num(frame.px(lx)) << "\" cy=\"" << num(frame.py(ly)) << "\" r=\"3.5\"/>\n";
    os << "</g>\n";

    std::string note = std::string(s.name) + ": ";
    if (s.report->exact) {
      note += "exact (all errors < 1e-12)";
    } else if (s.report->fitted_rate) {
      // Least-squares line through the plotted points.
      const double slope = *s.report->fitted_rate;
      double mx = 0.0, my = 0.0;
      for (const auto& [lx, ly] : pts) {
        mx += lx;
        my += ly;
      }
      mx /= pts.size();
      my /= pts.size();
      const double x0 = pts.front().first, x1 = pts.back().first;
      os << "<line x1=\"" << num(frame.px(x0)) << "\" y1=\"" << num(frame.py(my + slope * (x0 - mx)))
         << "\" x2=\"" << num(frame.px(x1)) << "\" y2=\"" << num(frame.py(my + slope * (x1 - mx)))
         << "\" stroke=\"" << s.colour << "\" stroke-dasharray=\"6 4\"/>\n";
      char buf[64];
      std::snprintf(buf, sizeof buf, "fitted slope %.3f", slope);
      note += buf;
    } else {
      note += "no fit";
    }
    os << "<text x=\"" << num(kRight - 8) << "\" y=\"" << num(legend_y) << "\" " << kFont
       << " font-size=\"12\" text-anchor=\"end\" fill=\"" << s.colour << "\">" << escape(note)
       << "</text>\n";
    legend_y += 16;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace blochspec::cli
