#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "geomphase/bloch.hpp"

namespace geomphase {

// Bare-bones SVG output so figures can be eyeballed without extra tooling.
// Styling is not part of any contract.

struct ScatterSeries {
  std::string label;
  std::string color;
  bool crosses = false;  // markers: dots or crosses
  std::vector<double> x;
  std::vector<double> y;
};

/// Phase-vs-T scatter on a [0, 2 pi] vertical axis.
void write_phase_svg(std::ostream& out, const std::string& title, const std::string& x_label,
                     const std::vector<ScatterSeries>& series);

struct CurveSeries {
  std::string label;
  std::string color;
  const BlochPath* path = nullptr;
};

/// Orthographic view of Bloch curves, front hemisphere solid, back dashed.
void write_bloch_svg(std::ostream& out, const std::string& title, const std::vector<CurveSeries>& curves);

}  // namespace geomphase
