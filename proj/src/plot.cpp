#include "geomphase/plot.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace geomphase {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 60.0;

void header(std::ostream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
}

}  // namespace

void write_phase_svg(std::ostream& out, const std::string& title, const std::string& x_label,
                     const std::vector<ScatterSeries>& series) {
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  for (const auto& s : series) {
    for (double x : s.x) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
    }
  }
  if (!(x_max > x_min)) {
    x_min = 0.0;
    x_max = 1.0;
  }
  const double pw = kWidth - 2 * kMargin;
  const double ph = kHeight - 2 * kMargin;
  auto px = [&](double x) { return kMargin + pw * (x - x_min) / (x_max - x_min); };
  auto py = [&](double y) { return kHeight - kMargin - ph * y / kTwoPi; };

  out << std::setprecision(6);
  header(out, title);
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  const char* y_ticks[] = {"0", "π/2", "π", "3π/2", "2π"};
  for (int i = 0; i <= 4; ++i) {
    const double y = py(i * kPi / 2);
    out << "<line x1=\"" << kMargin - 4 << "\" y1=\"" << y << "\" x2=\"" << kMargin + pw << "\" y2=\"" << y
        << "\" stroke=\"#ddd\"/>\n<text x=\"" << kMargin - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\">" << y_ticks[i] << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double x = x_min + (x_max - x_min) * i / 4.0;
    out << "<text x=\"" << px(x) << "\" y=\"" << kHeight - kMargin + 18 << "\" text-anchor=\"middle\">" << x
        << "</text>\n";
  }
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16 << "\" text-anchor=\"middle\">" << x_label
      << "</text>\n";

  double legend_y = kMargin + 16;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      const double x = px(s.x[i]);
      const double y = py(s.y[i]);
      if (s.crosses) {
        out << "<path d=\"M" << x - 3 << ' ' << y - 3 << "L" << x + 3 << ' ' << y + 3 << "M" << x - 3 << ' '
            << y + 3 << "L" << x + 3 << ' ' << y - 3 << "\" stroke=\"" << s.color << "\"/>\n";
      } else {
        out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"2\" fill=\"" << s.color << "\"/>\n";
      }
    }
    out << "<text x=\"" << kWidth - kMargin - 8 << "\" y=\"" << legend_y << "\" text-anchor=\"end\" fill=\""
        << s.color << "\">" << s.label << "</text>\n";
    legend_y += 16;
  }
  out << "</svg>\n";
}

void write_bloch_svg(std::ostream& out, const std::string& title, const std::vector<CurveSeries>& curves) {
  // view direction tilted 25 degrees above the equator
  const double tilt = 25.0 * kPi / 180.0;
  const Eigen::Vector3d right(1.0, 0.0, 0.0);
  const Eigen::Vector3d up(0.0, -std::sin(tilt), std::cos(tilt));
  const Eigen::Vector3d toward(0.0, -std::cos(tilt), -std::sin(tilt));
  const double r = (kHeight - 2 * kMargin) / 2.0;
  const double cx = kWidth / 2.0;
  const double cy = kHeight / 2.0 + 10.0;

  out << std::setprecision(6);
  header(out, title);
  out << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << r
      << "\" fill=\"none\" stroke=\"#999\"/>\n";
  double legend_y = kMargin;
  for (const auto& c : curves) {
    if (!c.path) continue;
    bool open = false;
    bool front_run = true;
    auto flush = [&] {
      if (open) out << "\" fill=\"none\" stroke=\"" << c.color << "\" stroke-width=\"1\""
                    << (front_run ? "" : " stroke-dasharray=\"3,3\" opacity=\"0.5\"") << "/>\n";
      open = false;
    };
    for (const auto& p : c.path->points()) {
      const Eigen::Vector3d v = p.vec();
      const bool front = v.dot(toward) <= 0.0;
      const double x = cx + r * v.dot(right);
      const double y = cy - r * v.dot(up);
      if (open && front != front_run) flush();
      if (!open) {
        out << "<path d=\"M" << x << ' ' << y;
        open = true;
        front_run = front;
      } else {
        out << " L" << x << ' ' << y;
      }
    }
    flush();
    out << "<text x=\"" << kMargin << "\" y=\"" << legend_y << "\" fill=\"" << c.color << "\">" << c.label
        << "</text>\n";
    legend_y += 16;
  }
  out << "</svg>\n";
}

}  // namespace geomphase
