#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "statusloop/sweep.hpp"

namespace statusloop {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 610.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 390.0;

struct Series {
  const char* label;
  const char* color;
  std::vector<std::pair<double, double>> points;  // (value, probability)
};

std::string polyline(const Series& s, double x0, double x1) {
  auto sx = [&](double v) {
    return kLeft + (kRight - kLeft) * (x1 > x0 ? (v - x0) / (x1 - x0) : 0.5);
  };
  auto sy = [](double p) { return kBottom - (kBottom - kTop) * p; };
  std::string path;
  for (const auto& [v, p] : s.points) {
    path += format_value(sx(v)) + "," + format_value(sy(p)) + " ";
  }
  return "<polyline fill=\"none\" stroke=\"" + std::string(s.color) +
         "\" stroke-width=\"1.5\" points=\"" + path + "\"/>\n";
}

}  // namespace

void write_sweep_svg(std::ostream& out, std::string_view title,
                     const std::vector<SweepRow>& rows) {
  Series empirical{"empirical", "#1f77b4", {}};
  Series closed{"closed form", "#d62728", {}};
  Series upper{"upper bound", "#2ca02c", {}};
  Series lower{"lower bound", "#9467bd", {}};
  for (const SweepRow& r : rows) {
    if (!std::isnan(r.p_succ_mean)) empirical.points.emplace_back(r.value, r.p_succ_mean);
    if (r.p_succ_closed) closed.points.emplace_back(r.value, *r.p_succ_closed);
    if (r.upper) upper.points.emplace_back(r.value, *r.upper);
    if (r.lower) lower.points.emplace_back(r.value, *r.lower);
  }
  double x0 = rows.empty() ? 0.0 : rows.front().value;
  double x1 = rows.empty() ? 1.0 : rows.back().value;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
      << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << (kWidth / 2) << "\" y=\"28\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">task-success probability vs "
      << title << "</text>\n";

  // axes with a tick every 0.2 on y and at each end on x
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight
      << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double p = 0.2 * i;
    const double y = kBottom - (kBottom - kTop) * p;
    out << "<line x1=\"" << (kLeft - 4) << "\" y1=\"" << y << "\" x2=\"" << kLeft
        << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (kLeft - 8) << "\" y=\"" << (y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_value(p) << "</text>\n";
  }
  for (double v : {x0, 0.5 * (x0 + x1), x1}) {
    const double x = kLeft + (kRight - kLeft) * (x1 > x0 ? (v - x0) / (x1 - x0) : 0.5);
    out << "<line x1=\"" << x << "\" y1=\"" << kBottom << "\" x2=\"" << x << "\" y2=\""
        << (kBottom + 4) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << (kBottom + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_value(v) << "</text>\n";
  }
  out << "<text x=\"" << ((kLeft + kRight) / 2) << "\" y=\"" << (kBottom + 38)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << title << "</text>\n";

  for (const Series* s : {&closed, &upper, &lower, &empirical}) {
    if (s->points.size() >= 2) out << polyline(*s, x0, x1);
  }
  for (const auto& [v, p] : empirical.points) {
    const double x = kLeft + (kRight - kLeft) * (x1 > x0 ? (v - x0) / (x1 - x0) : 0.5);
    const double y = kBottom - (kBottom - kTop) * p;
    out << "<circle cx=\"" << format_value(x) << "\" cy=\"" << format_value(y)
        << "\" r=\"3.5\" fill=\"white\" stroke=\"" << empirical.color
        << "\" stroke-width=\"1.5\"/>\n";
  }

  double ly = kTop + 8;
  for (const Series* s : {&empirical, &closed, &upper, &lower}) {
    out << "<line x1=\"" << (kRight - 150) << "\" y1=\"" << ly << "\" x2=\""
        << (kRight - 120) << "\" y2=\"" << ly << "\" stroke=\"" << s->color
        << "\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << (kRight - 112) << "\" y=\"" << (ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s->label << "</text>\n";
    ly += 18;
  }
  out << "</svg>\n";
}

}  // namespace statusloop
