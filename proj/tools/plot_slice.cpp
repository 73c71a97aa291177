#include "plot_slice.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

namespace ecomann::cli {

namespace {

constexpr double kSize = 480.0;
constexpr double kMargin = 30.0;

struct Segment {
  double x0, y0, x1, y1;
};

// Marching squares over a grid of values f(i, j), i along u, j along v.
std::vector<Segment> contour(const Eigen::MatrixXd& f, double level, const Eigen::VectorXd& coords) {
  std::vector<Segment> out;
  const Eigen::Index n = f.rows();
  auto lerp = [&](Eigen::Index i0, Eigen::Index j0, Eigen::Index i1, Eigen::Index j1) {
    const double a = f(i0, j0) - level, b = f(i1, j1) - level;
    const double t = a == b ? 0.5 : a / (a - b);
    return std::array<double, 2>{coords(i0) + t * (coords(i1) - coords(i0)), coords(j0) + t * (coords(j1) - coords(j0))};
  };
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
      // corners counter-clockwise from (i, j)
      const int c = (f(i, j) > level) | (f(i + 1, j) > level) << 1 | (f(i + 1, j + 1) > level) << 2 |
                    (f(i, j + 1) > level) << 3;
      if (c == 0 || c == 15) continue;
      const auto bottom = [&] { return lerp(i, j, i + 1, j); };
      const auto right = [&] { return lerp(i + 1, j, i + 1, j + 1); };
      const auto top = [&] { return lerp(i, j + 1, i + 1, j + 1); };
      const auto left = [&] { return lerp(i, j, i, j + 1); };
      auto add = [&](std::array<double, 2> p, std::array<double, 2> q) { out.push_back({p[0], p[1], q[0], q[1]}); };
      const double centre = 0.25 * (f(i, j) + f(i + 1, j) + f(i + 1, j + 1) + f(i, j + 1)) - level;
      switch (c) {
        case 1: case 14: add(left(), bottom()); break;
        case 2: case 13: add(bottom(), right()); break;
        case 3: case 12: add(left(), right()); break;
        case 4: case 11: add(right(), top()); break;
        case 6: case 9: add(bottom(), top()); break;
        case 7: case 8: add(left(), top()); break;
        case 5:
          if (centre > 0) { add(left(), top()); add(bottom(), right()); }
          else { add(left(), bottom()); add(right(), top()); }
          break;
        case 10:
          if (centre > 0) { add(left(), bottom()); add(right(), top()); }
          else { add(left(), top()); add(bottom(), right()); }
          break;
        default: break;
      }
    }
  }
  return out;
}

}  // namespace

std::string plot_slice_svg(const ImplicitManifold& model, const SliceSpec& spec, const PointMatrix& points,
                           double point_band) {
  const int d = model.ambient_dim();
  if (spec.axis_u < 0 || spec.axis_u >= d || spec.axis_v < 0 || spec.axis_v >= d || spec.axis_u == spec.axis_v)
    throw ParameterError("cli", "plot-slice: slice axes must be two distinct coordinates");
  if (spec.anchor.size() != d) throw ParameterError("cli", "plot-slice: anchor must have one value per coordinate");
  if (!(spec.range > 0.0) || spec.grid < 2) throw ParameterError("cli", "plot-slice: invalid range or grid");

  const Eigen::VectorXd coords = Eigen::VectorXd::LinSpaced(spec.grid, -spec.range, spec.range);
  Eigen::MatrixXd f(spec.grid, spec.grid);
  const bool scalar = model.codim() == 1;
  for (int i = 0; i < spec.grid; ++i) {
    for (int j = 0; j < spec.grid; ++j) {
      Eigen::VectorXd q = spec.anchor;
      q(spec.axis_u) = coords(i);
      q(spec.axis_v) = coords(j);
      const Eigen::VectorXd h = model.evaluate(q);
      f(i, j) = scalar ? h(0) : h.norm();
    }
  }

  auto px = [&](double u) { return kMargin + (u + spec.range) / (2 * spec.range) * kSize; };
  auto py = [&](double v) { return kMargin + (spec.range - v) / (2 * spec.range) * kSize; };

  std::string svg;
  char buf[256];
  const double total = kSize + 2 * kMargin;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                total, total, total, total);
  svg += buf;
  std::snprintf(buf, sizeof buf, "<rect x=\"%.0f\" y=\"%.0f\" width=\"%.0f\" height=\"%.0f\" fill=\"white\" stroke=\"black\"/>\n",
                kMargin, kMargin, kSize, kSize);
  svg += buf;

  const double lo = f.minCoeff(), hi = f.maxCoeff();
  std::vector<double> levels;
  for (int k = 1; k <= spec.contour_levels; ++k) levels.push_back(lo + (hi - lo) * k / (spec.contour_levels + 1));
  for (double level : levels) {
    svg += "<g stroke=\"#8899bb\" stroke-width=\"0.8\" fill=\"none\">\n";
    for (const auto& s : contour(f, level, coords)) {
      std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n", px(s.x0), py(s.y0),
                    px(s.x1), py(s.y1));
      svg += buf;
    }
    svg += "</g>\n";
  }
  if (scalar && lo < 0.0 && hi > 0.0) {
    svg += "<g stroke=\"#cc2222\" stroke-width=\"2\" fill=\"none\">\n";
    for (const auto& s : contour(f, 0.0, coords)) {
      std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n", px(s.x0), py(s.y0),
                    px(s.x1), py(s.y1));
      svg += buf;
    }
    svg += "</g>\n";
  }

  if (points.rows() > 0 && points.cols() == d) {
    svg += "<g fill=\"#222222\">\n";
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
      bool near = true;
      for (int k = 0; k < d; ++k)
        if (k != spec.axis_u && k != spec.axis_v && std::abs(points(r, k) - spec.anchor(k)) > point_band) near = false;
      const double u = points(r, spec.axis_u), v = points(r, spec.axis_v);
      if (!near || std::abs(u) > spec.range || std::abs(v) > spec.range) continue;
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"1.5\"/>\n", px(u), py(v));
      svg += buf;
    }
    svg += "</g>\n";
  }

  std::snprintf(buf, sizeof buf,
                "<text x=\"%.0f\" y=\"%.0f\" font-size=\"12\" font-family=\"sans-serif\">q%d (horizontal) vs q%d, "
                "[%.2f, %.2f], %s in [%.3g, %.3g]</text>\n",
                kMargin, kMargin - 10, spec.axis_u + 1, spec.axis_v + 1, -spec.range, spec.range, scalar ? "h" : "|h|",
                lo, hi);
  svg += buf;
  svg += "</svg>\n";
  return svg;
}

}  // namespace ecomann::cli
