#pragma once

#include "ecomann/common.hpp"
#include "ecomann/manifold.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace ecomann {

enum class GroundTruth { Sphere, Circle3D, PlaneArm3R, Orient6R, None };

std::string to_string(GroundTruth gt);
GroundTruth parse_ground_truth(const std::string& s);

/// Demonstrations lying on a manifold; each row of `points` is a configuration.
struct OnManifoldDataset {
  std::string name;
  PointMatrix points;
  int true_codim = 1;
  GroundTruth ground_truth = GroundTruth::None;

  Eigen::Index size() const { return points.rows(); }
  int dim() const { return static_cast<int>(points.cols()); }
};

/// The analytic constraint h-bar behind a ground-truth id.
ManifoldPtr ground_truth_manifold(GroundTruth gt);

OnManifoldDataset gen_sphere(Eigen::Index n, std::uint64_t seed);
OnManifoldDataset gen_circle3d(Eigen::Index n, std::uint64_t seed);
/// Arm datasets: uniform joint samples projected onto the task constraint,
/// angles wrapped back into [-pi, pi).
OnManifoldDataset gen_plane_arm(Eigen::Index n, std::uint64_t seed);
OnManifoldDataset gen_orient(Eigen::Index n, std::uint64_t seed);

/// Dispatch on "sphere", "circle3d", "plane" or "orient".
OnManifoldDataset generate_dataset(const std::string& kind, Eigen::Index n, std::uint64_t seed);

/// Adds i.i.d. N(0, sigma^2) to every coordinate.
OnManifoldDataset add_noise(const OnManifoldDataset& ds, double sigma, std::uint64_t seed);

/// Text format: `# name=<s> d=<int> N=<int> l=<int> gt=<enum>` followed by N
/// rows of d comma-separated %.17g values. When `levels` is given a trailing
/// integer column is written and the header carries `level=1`.
void save_dataset(const std::string& path, const OnManifoldDataset& ds, const std::vector<int>* levels = nullptr);
std::string format_dataset(const OnManifoldDataset& ds, const std::vector<int>* levels = nullptr);

OnManifoldDataset load_dataset(const std::string& path, std::vector<int>* levels = nullptr);
OnManifoldDataset parse_dataset(const std::string& text, std::vector<int>* levels = nullptr);

}  // namespace ecomann
