#pragma once

#include "ecomann/manifold.hpp"

#include <string>

namespace ecomann::cli {

struct SliceSpec {
  int axis_u = 0;                 // horizontal coordinate
  int axis_v = 1;                 // vertical coordinate
  Eigen::VectorXd anchor;         // values of the remaining coordinates
  double range = 1.5;             // plot [-range, range]^2
  int grid = 41;
  int contour_levels = 9;
};

/// SVG of level curves of h (||h|| when l > 1) on a 2D slice, found by
/// marching squares. The zero curve is drawn heavier. `points` rows within
/// `point_band` of the slice are overlaid as dots.
std::string plot_slice_svg(const ImplicitManifold& model, const SliceSpec& spec, const PointMatrix& points = {},
                           double point_band = 0.05);

}  // namespace ecomann::cli
