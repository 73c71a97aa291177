#pragma once

#include "ecomann/augment.hpp"
#include "ecomann/dataset.hpp"
#include "ecomann/lin_geom.hpp"
#include "ecomann/mlp.hpp"
#include "ecomann/osa.hpp"

#include <cstdint>
#include <optional>

namespace ecomann {

struct TrainConfig {
  // loss weights
  double w_norm = 1.0;
  double w_reflection = 1.0;
  double w_fraction = 1.0;
  double w_similar = 1.0;
  double w_align = 1.0;

  // optimiser (Adam)
  double learning_rate = 1e-3;
  int epochs = 100;
  int batch_size = 128;
  std::uint64_t seed = 0;
  double damping = 1e-4;  // Tikhonov term in the alignment projector

  // ablations
  bool disable_augmentation = false;
  bool disable_osa = false;
  bool disable_siamese = false;
  bool disable_reflection = false;
  bool disable_fraction = false;
  bool disable_similar = false;
  bool disable_alignment = false;

  // geometry / augmentation
  int k = 0;                       // local PCA neighbours; 0 selects default_k(d)
  int codim_k = 0;                 // codimension vote neighbours; 0 selects default_codim_k(d)
  std::optional<int> codim;        // overrides the estimate
  int levels = 7;
  int dirs_per_point = 2;
  std::vector<int> hidden = {36, 24, 18, 10};
  // Constant start value of every output. The sign-free losses keep whatever
  // sign pattern h starts with; a zero-bias net changes sign across the data
  // and that boundary survives training as a spurious zero sheet.
  double output_bias_init = 0.5;
  OsaOptions osa;
};

/// Everything derived from the on-manifold data before optimisation starts.
struct PreparedData {
  int codim = 1;
  double epsilon = 0.0;
  std::vector<LocalFrame> frames;
  std::vector<Eigen::MatrixXd> normals;  // aligned unless OSA is disabled
  AugmentedSet augmented;
};

PreparedData prepare_training_data(const OnManifoldDataset& dataset, const TrainConfig& config);

struct TrainResult {
  MlpModel model;
  std::vector<double> loss_history;  // mean combined loss per epoch
  int codim = 1;
  double epsilon = 0.0;
  std::size_t num_augmented = 0;
};

/// local PCA -> OSA -> epsilon -> augmentation -> minibatch Adam on the
/// weighted sum of the norm, siamese and alignment losses.
TrainResult train(const OnManifoldDataset& dataset, const TrainConfig& config);

/// Optimisation stage only, on already prepared data.
TrainResult train_prepared(const PreparedData& data, int ambient_dim, const TrainConfig& config);

/// Weighted batch objective and its parameter gradient; exposed so the
/// gradient can be audited against finite differences.
struct BatchSpec {
  std::vector<std::size_t> norm;
  std::vector<std::pair<std::size_t, std::size_t>> reflection;
  std::vector<FractionPair> fraction;
  std::vector<std::pair<std::size_t, std::size_t>> similar;
  std::vector<std::size_t> align;  // on-manifold indices
};

double batch_objective(const MlpModel& model, const PreparedData& data, const BatchSpec& batch,
                       const TrainConfig& config, Eigen::VectorXd* grad);

}  // namespace ecomann
