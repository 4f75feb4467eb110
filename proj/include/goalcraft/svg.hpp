#pragma once

#include <string>
#include <vector>

#include "goalcraft/analysis.hpp"
#include "goalcraft/env.hpp"
#include "goalcraft/evalx.hpp"

namespace goalcraft {

struct CurveSeries {
  std::string label;
  std::vector<CurvePoint> points;
};

/// Mean lines with a shaded CI band wherever a point aggregates more than one seed.
std::string learning_curve_svg(const std::vector<CurveSeries>& series, const std::string& title,
                               const std::string& y_label);

/// phi projection of each scanned cell drawn as an arrow; obstacles shaded, goal marked.
std::string quiver_svg(const FieldScan& scan, std::size_t grid_n, const EnvConfig& env, Goal goal);

std::string heatmap_svg(const Heatmap& map, const EnvConfig& env, Goal goal);

std::string xml_escape(const std::string& s);

}  // namespace goalcraft
