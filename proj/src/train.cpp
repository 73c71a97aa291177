#include "ecomann/train.hpp"

#include "ecomann/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace ecomann {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser over (seed, stream)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct EffectiveWeights {
  double norm, reflection, fraction, similar, align;
};

EffectiveWeights effective_weights(const TrainConfig& c) {
  const bool no_pairs = c.disable_augmentation || c.disable_siamese;
  return {c.w_norm,
          (no_pairs || c.disable_reflection) ? 0.0 : c.w_reflection,
          (no_pairs || c.disable_fraction) ? 0.0 : c.w_fraction,
          (no_pairs || c.disable_similar) ? 0.0 : c.w_similar,
          c.disable_alignment ? 0.0 : c.w_align};
}

void validate(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0)) throw ParameterError("ecomann", "learning rate must be positive");
  if (!(c.damping > 0.0)) throw ParameterError("ecomann", "damping must be positive");
  if (c.epochs < 1) throw ParameterError("ecomann", "epochs must be >= 1");
  if (c.batch_size < 1) throw ParameterError("ecomann", "batch size must be >= 1");
  if (!std::isfinite(c.output_bias_init)) throw ParameterError("ecomann", "output bias init must be finite");
  for (double w : {c.w_norm, c.w_reflection, c.w_fraction, c.w_similar, c.w_align}) {
    if (!(w >= 0.0)) throw ParameterError("ecomann", "loss weights must be non-negative");
  }
}

}  // namespace

PreparedData prepare_training_data(const OnManifoldDataset& dataset, const TrainConfig& config) {
  validate(config);
  const int d = dataset.dim();
  const int k = config.k > 0 ? config.k : default_k(d);
  if (dataset.size() < k + 1) {
    throw ParameterError("ecomann", "dataset needs at least K+1 = " + std::to_string(k + 1) + " points");
  }
  PreparedData data;
  data.frames = local_frames(dataset.points, k);
  const int codim_k = config.codim_k > 0 ? config.codim_k : default_codim_k(d);
  data.codim = config.codim ? *config.codim : estimate_global_codim(dataset.points, codim_k);
  if (data.codim < 1 || data.codim >= d) throw ParameterError("ecomann", "codimension must be in [1, d-1]");
  for (auto& f : data.frames) f.codim = data.codim;

  data.normals.reserve(data.frames.size());
  for (const auto& f : data.frames) data.normals.emplace_back(f.normal_basis());
  data.epsilon = compute_epsilon(data.frames);

  if (config.disable_augmentation) {
    for (Eigen::Index i = 0; i < dataset.size(); ++i) {
      data.augmented.points.push_back({dataset.points.row(i).transpose(), i, 0, Eigen::VectorXd(), 0.0});
    }
    return data;
  }
  if (!config.disable_osa) {
    OsaOptions osa = config.osa;
    osa.seed = derive_seed(config.seed, 2);
    data.normals = osa_align(dataset.points, data.normals, osa).aligned;
  }
  AugmentOptions aug;
  aug.levels = config.levels;
  aug.dirs_per_point = config.dirs_per_point;
  aug.k = k;
  aug.seed = derive_seed(config.seed, 3);
  data.augmented = augment_dataset(dataset.points, data.normals, data.epsilon, aug);
  return data;
}

double batch_objective(const MlpModel& model, const PreparedData& data, const BatchSpec& batch,
                       const TrainConfig& config, Eigen::VectorXd* grad) {
  const EffectiveWeights w = effective_weights(config);
  const auto& pts = data.augmented.points;
  const Eigen::Index d = model.input_dim();

  const std::size_t n_cols = batch.norm.size() + 2 * (batch.reflection.size() + batch.fraction.size() + batch.similar.size());
  double total = 0.0;
  if (n_cols > 0) {
    Eigen::MatrixXd x(d, static_cast<Eigen::Index>(n_cols));
    Eigen::Index col = 0;
    for (std::size_t i : batch.norm) x.col(col++) = pts[i].point;
    for (const auto& [a, b] : batch.reflection) {
      x.col(col++) = pts[a].point;
      x.col(col++) = pts[b].point;
    }
    for (const auto& fp : batch.fraction) {
      x.col(col++) = pts[fp.far].point;
      x.col(col++) = pts[fp.near].point;
    }
    for (const auto& [a, b] : batch.similar) {
      x.col(col++) = pts[a].point;
      x.col(col++) = pts[b].point;
    }

    MlpModel::BatchCache cache;
    model.forward_batch(x, cache);
    const Eigen::MatrixXd& h = cache.acts.back();
    Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(h.rows(), h.cols());

    col = 0;
    if (!batch.norm.empty()) {
      const double scale = w.norm / static_cast<double>(batch.norm.size());
      for (std::size_t i : batch.norm) {
        const Eigen::VectorXd hc = h.col(col);
        total += scale * loss_norm(hc, pts[i].norm_label);
        d_out.col(col) = scale * grad_loss_norm(hc, pts[i].norm_label);
        ++col;
      }
    }
    if (!batch.reflection.empty()) {
      const double scale = w.reflection / static_cast<double>(batch.reflection.size());
      for (std::size_t p = 0; p < batch.reflection.size(); ++p, col += 2) {
        const Eigen::VectorXd s = h.col(col) + h.col(col + 1);
        total += scale * s.squaredNorm();
        d_out.col(col) = 2.0 * scale * s;
        d_out.col(col + 1) = 2.0 * scale * s;
      }
    }
    if (!batch.fraction.empty()) {
      std::size_t valid = 0;
      for (std::size_t p = 0; p < batch.fraction.size(); ++p)
        if (fraction_pair_valid(h.col(col + 2 * static_cast<Eigen::Index>(p)), h.col(col + 2 * static_cast<Eigen::Index>(p) + 1))) ++valid;
      const double scale = valid ? w.fraction / static_cast<double>(valid) : 0.0;
      for (std::size_t p = 0; p < batch.fraction.size(); ++p, col += 2) {
        const Eigen::VectorXd hf = h.col(col), hn = h.col(col + 1);
        if (!fraction_pair_valid(hf, hn)) continue;
        total += scale * loss_fraction(hf, hn);
        const auto [gf, gn] = grad_loss_fraction(hf, hn);
        d_out.col(col) = scale * gf;
        d_out.col(col + 1) = scale * gn;
      }
    }
    if (!batch.similar.empty()) {
      const double scale = w.similar / static_cast<double>(batch.similar.size());
      for (std::size_t p = 0; p < batch.similar.size(); ++p, col += 2) {
        const Eigen::VectorXd diff = h.col(col) - h.col(col + 1);
        total += scale * diff.squaredNorm();
        d_out.col(col) = 2.0 * scale * diff;
        d_out.col(col + 1) = -2.0 * scale * diff;
      }
    }
    if (grad) model.backward_batch(cache, d_out, *grad);
  }

  if (!batch.align.empty()) {
    const double scale = w.align / static_cast<double>(batch.align.size());
    MlpModel::JacobianCache jc;
    const Eigen::VectorXd no_value_grad;
    for (std::size_t i : batch.align) {
      const Eigen::MatrixXd jac = model.jacobian_cached(pts[i].point, jc);
      const AlignmentTerm term = alignment_term(jac, data.frames[i].normal_basis(), config.damping);
      total += scale * term.loss;
      if (grad) model.backward_jacobian(jc, scale * term.d_jac, no_value_grad, *grad);
    }
  }
  return total;
}

TrainResult train_prepared(const PreparedData& data, int ambient_dim, const TrainConfig& config) {
  validate(config);
  const EffectiveWeights w = effective_weights(config);

  std::vector<int> dims{ambient_dim};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(data.codim);

  TrainResult result;
  result.model = MlpModel::glorot(dims, derive_seed(config.seed, 1));
  result.model.bias(result.model.num_layers() - 1).setConstant(config.output_bias_init);
  result.codim = data.codim;
  result.epsilon = data.epsilon;
  result.num_augmented = data.augmented.points.size();

  const auto& pairs = data.augmented.pairs;
  BatchSpec all;
  if (w.norm > 0.0) {
    all.norm.resize(data.augmented.points.size());
    std::iota(all.norm.begin(), all.norm.end(), std::size_t{0});
  }
  if (w.reflection > 0.0) all.reflection = pairs.reflection;
  if (w.fraction > 0.0) all.fraction = pairs.fraction;
  if (w.similar > 0.0) all.similar = pairs.similar;
  if (w.align > 0.0) {
    all.align.resize(data.frames.size());
    std::iota(all.align.begin(), all.align.end(), std::size_t{0});
  }

  const std::size_t longest =
      std::max({all.norm.size(), all.reflection.size(), all.fraction.size(), all.similar.size(), all.align.size()});
  if (longest == 0) throw TrainingError("ecomann", "every loss term is disabled or empty");
  const std::size_t anchor = all.norm.empty() ? longest : all.norm.size();
  const std::size_t steps = (anchor + static_cast<std::size_t>(config.batch_size) - 1) / static_cast<std::size_t>(config.batch_size);
  auto chunk = [steps](std::size_t n) { return (n + steps - 1) / steps; };
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  std::mt19937_64 rng(derive_seed(config.seed, 4));
  const Eigen::Index np = result.model.params().size();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(np), v = Eigen::VectorXd::Zero(np), grad(np);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  long t = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(all.norm.begin(), all.norm.end(), rng);
    std::shuffle(all.reflection.begin(), all.reflection.end(), rng);
    std::shuffle(all.fraction.begin(), all.fraction.end(), rng);
    std::shuffle(all.similar.begin(), all.similar.end(), rng);
    std::shuffle(all.align.begin(), all.align.end(), rng);

    double epoch_loss = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      auto slice = [&](const auto& list) {
        const std::size_t c = chunk(list.size());
        const std::size_t lo = std::min(list.size(), s * c), hi = std::min(list.size(), (s + 1) * c);
        return std::decay_t<decltype(list)>(list.begin() + static_cast<long>(lo), list.begin() + static_cast<long>(hi));
      };
      BatchSpec batch{slice(all.norm), slice(all.reflection), slice(all.fraction), slice(all.similar), {}};
      // the alignment term sees a full minibatch every step, cycling through the data
      const std::size_t ac = std::min(std::max(chunk(all.align.size()), batch_size), all.align.size());
      for (std::size_t j = 0; j < ac; ++j) batch.align.push_back(all.align[(s * ac + j) % all.align.size()]);
      grad.setZero();
      const double loss = batch_objective(result.model, data, batch, config, &grad);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        throw TrainingError("ecomann", "training diverged (non-finite loss) at epoch " + std::to_string(epoch + 1));
      }
      epoch_loss += loss;

      ++t;
      m = kBeta1 * m + (1.0 - kBeta1) * grad;
      v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseAbs2();
      const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
      const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
      result.model.params().array() -=
          config.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + kEps);
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(steps));
  }
  return result;
}

TrainResult train(const OnManifoldDataset& dataset, const TrainConfig& config) {
  const PreparedData data = prepare_training_data(dataset, config);
  return train_prepared(data, dataset.dim(), config);
}

}  // namespace ecomann
