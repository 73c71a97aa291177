#pragma once

// Accuracy metrics against a known ground truth, and the experiment
// harnesses built on them (ablations, augmentation levels, noise).

#include "ecomann/dataset.hpp"
#include "ecomann/projection.hpp"
#include "ecomann/train.hpp"

#include <iosfwd>
#include <optional>

namespace ecomann {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd mean_std(const std::vector<double>& values);

/// Distance-like residual to the ground truth: |‖q‖-1| on the sphere, the exact
/// distance to the unit circle for Circle3D, |p_z| for the plane arm and
/// ‖(Rz_x, Rz_y)‖ for the orientation arm (task space).
double gt_residual(GroundTruth gt, const Eigen::Ref<const Eigen::VectorXd>& q);

MeanStd metric_mu(const PointMatrix& points, GroundTruth gt);

struct SampleBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

/// [-1.5, 1.5]^d for the geometric datasets, [-pi, pi]^d for the arm datasets.
SampleBox default_sample_box(GroundTruth gt, int d);

PointMatrix sample_uniform(const SampleBox& box, Eigen::Index n, std::uint64_t seed);

/// Projects every row; the final iterate is kept whether or not it converged.
PointMatrix project_points(const ImplicitManifold& manifold, const PointMatrix& points,
                           const ProjectionOptions& options = {});

struct EvalOptions {
  Eigen::Index n_samples = 1000;
  double threshold = 0.1;
  std::uint64_t seed = 0;
  std::optional<SampleBox> box;
  ProjectionOptions projection;
};

struct EvalReport {
  MeanStd mu_train;  // training points after projection onto the model
  MeanStd mu_test;   // projected random samples
  double P = 0.0;    // percent of projected samples within threshold
  Eigen::Index n_samples = 0;
  double threshold = 0.1;
  std::uint64_t seed = 0;
};

/// Percent of uniformly sampled, projected points whose ground-truth residual
/// is at most the threshold.
double metric_P(const ImplicitManifold& model, GroundTruth gt, int d, const EvalOptions& options = {});

EvalReport evaluate(const ImplicitManifold& model, const OnManifoldDataset& train_data, const EvalOptions& options = {});

// ---- experiment harnesses ---------------------------------------------------

struct StudyRow {
  std::string dataset;
  std::string row;
  MeanStd P;
  MeanStd mu_train;
  MeanStd mu_test;
  std::uint64_t seed = 0;
};

/// "No Ablation", "w/o Data Augmentation", "w/o OSA", "w/o Siamese Losses",
/// "w/o L_reflection", "w/o L_fraction", "w/o L_similar".
const std::vector<std::string>& ablation_row_names();
TrainConfig ablation_config(const TrainConfig& base, std::size_t row);

/// Repeat r trains with seed base.seed + r and evaluates with eval.seed + r, so
/// rows are paired across repeats. `which` selects row indices; empty runs all.
std::vector<StudyRow> run_ablation(const OnManifoldDataset& dataset, const TrainConfig& base, int repeats,
                                   const EvalOptions& eval = {}, std::vector<std::size_t> which = {});

std::vector<StudyRow> run_level_study(const OnManifoldDataset& dataset, const std::vector<int>& levels,
                                      const TrainConfig& base, int repeats = 1, const EvalOptions& eval = {});

/// Trains on a noisy copy of the dataset (noise seed base.seed + r) and
/// evaluates against the clean ground truth.
std::vector<StudyRow> run_noise_study(const OnManifoldDataset& dataset, const std::vector<double>& sigmas,
                                      const TrainConfig& base, int repeats = 1, const EvalOptions& eval = {});

/// dataset,row,P_mean,P_std,mu_train_mean,mu_train_std,mu_test_mean,mu_test_std,seed
void write_study_csv(std::ostream& out, const std::vector<StudyRow>& rows);

}  // namespace ecomann
