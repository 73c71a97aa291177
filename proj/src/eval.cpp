#include "ecomann/eval.hpp"

#include "ecomann/kinematics.hpp"
#include "ecomann/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

namespace ecomann {

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) return {};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

double gt_residual(GroundTruth gt, const Eigen::Ref<const Eigen::VectorXd>& q) {
  switch (gt) {
    case GroundTruth::Sphere:
      if (q.size() != 3) break;
      return std::abs(q.norm() - 1.0);
    case GroundTruth::Circle3D: {
      if (q.size() != 3) break;
      const double radial = std::hypot(q[0], q[1]) - 1.0;
      return std::hypot(radial, q[2]);
    }
    case GroundTruth::PlaneArm3R: {
      static const KinematicChain chain = KinematicChain::plane_arm_3r();
      if (q.size() != chain.dof()) break;
      return std::abs(fk(chain, q).position.z());
    }
    case GroundTruth::Orient6R: {
      static const KinematicChain chain = KinematicChain::orient_arm_6r();
      if (q.size() != chain.dof()) break;
      const Eigen::Vector3d z = fk(chain, q).rotation.col(2);
      return std::hypot(z.x(), z.y());
    }
    case GroundTruth::None:
      throw ParameterError("eval", "no ground truth to measure against");
  }
  throw ParameterError("eval", "configuration dimension does not match the ground truth");
}

MeanStd metric_mu(const PointMatrix& points, GroundTruth gt) {
  std::vector<double> r(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) r[static_cast<std::size_t>(i)] = gt_residual(gt, points.row(i).transpose());
  return mean_std(r);
}

SampleBox default_sample_box(GroundTruth gt, int d) {
  const bool arm = gt == GroundTruth::PlaneArm3R || gt == GroundTruth::Orient6R;
  const double half = arm ? std::numbers::pi : 1.5;
  return {Eigen::VectorXd::Constant(d, -half), Eigen::VectorXd::Constant(d, half)};
}

PointMatrix sample_uniform(const SampleBox& box, Eigen::Index n, std::uint64_t seed) {
  if (box.lo.size() != box.hi.size() || box.lo.size() == 0) throw ParameterError("eval", "malformed sample box");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointMatrix out(n, box.lo.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < box.lo.size(); ++j) out(i, j) = box.lo[j] + (box.hi[j] - box.lo[j]) * u(rng);
  return out;
}

PointMatrix project_points(const ImplicitManifold& manifold, const PointMatrix& points,
                           const ProjectionOptions& options) {
  PointMatrix out(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out.row(i) = project(manifold, points.row(i).transpose(), options).q.transpose();
  }
  return out;
}

namespace {

double percent_within(const PointMatrix& points, GroundTruth gt, double threshold) {
  if (points.rows() == 0) return 0.0;
  Eigen::Index ok = 0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    if (gt_residual(gt, points.row(i).transpose()) <= threshold) ++ok;
  return 100.0 * static_cast<double>(ok) / static_cast<double>(points.rows());
}

PointMatrix projected_samples(const ImplicitManifold& model, GroundTruth gt, int d, const EvalOptions& options) {
  const SampleBox box = options.box ? *options.box : default_sample_box(gt, d);
  return project_points(model, sample_uniform(box, options.n_samples, options.seed), options.projection);
}

}  // namespace

double metric_P(const ImplicitManifold& model, GroundTruth gt, int d, const EvalOptions& options) {
  return percent_within(projected_samples(model, gt, d, options), gt, options.threshold);
}

EvalReport evaluate(const ImplicitManifold& model, const OnManifoldDataset& train_data, const EvalOptions& options) {
  const GroundTruth gt = train_data.ground_truth;
  if (gt == GroundTruth::None) throw ParameterError("eval", "dataset has no ground truth");
  EvalReport report;
  const PointMatrix test = projected_samples(model, gt, train_data.dim(), options);
  report.P = percent_within(test, gt, options.threshold);
  report.mu_test = metric_mu(test, gt);
  report.mu_train = metric_mu(project_points(model, train_data.points, options.projection), gt);
  report.n_samples = options.n_samples;
  report.threshold = options.threshold;
  report.seed = options.seed;
  return report;
}

// ---- harnesses --------------------------------------------------------------

const std::vector<std::string>& ablation_row_names() {
  static const std::vector<std::string> names{"No Ablation",         "w/o Data Augmentation", "w/o OSA",
                                              "w/o Siamese Losses",  "w/o L_reflection",      "w/o L_fraction",
                                              "w/o L_similar"};
  return names;
}

TrainConfig ablation_config(const TrainConfig& base, std::size_t row) {
  TrainConfig c = base;
  switch (row) {
    case 0: break;
    case 1: c.disable_augmentation = true; break;
    case 2: c.disable_osa = true; break;
    case 3: c.disable_siamese = true; break;
    case 4: c.disable_reflection = true; break;
    case 5: c.disable_fraction = true; break;
    case 6: c.disable_similar = true; break;
    default: throw ParameterError("eval", "ablation row out of range");
  }
  return c;
}

namespace {

struct Trial {
  double p, mu_train_mean, mu_test_mean;
};

Trial train_and_eval(const OnManifoldDataset& train_data, const OnManifoldDataset& eval_data, const TrainConfig& config,
                     const EvalOptions& eval) {
  const TrainResult tr = train(train_data, config);
  const LearnedManifold learned(tr.model);
  const EvalReport r = evaluate(learned, eval_data, eval);
  return {r.P, r.mu_train.mean, r.mu_test.mean};
}

StudyRow summarize(const std::string& dataset, const std::string& row, const std::vector<Trial>& trials,
                   std::uint64_t seed) {
  std::vector<double> p, mt, ms;
  for (const auto& t : trials) {
    p.push_back(t.p);
    mt.push_back(t.mu_train_mean);
    ms.push_back(t.mu_test_mean);
  }
  return {dataset, row, mean_std(p), mean_std(mt), mean_std(ms), seed};
}

void check_repeats(int repeats) {
  if (repeats < 1) throw ParameterError("eval", "repeats must be >= 1");
}

}  // namespace

std::vector<StudyRow> run_ablation(const OnManifoldDataset& dataset, const TrainConfig& base, int repeats,
                                   const EvalOptions& eval, std::vector<std::size_t> which) {
  check_repeats(repeats);
  if (which.empty()) {
    which.resize(ablation_row_names().size());
    std::iota(which.begin(), which.end(), std::size_t{0});
  }
  std::vector<StudyRow> rows;
  for (std::size_t row : which) {
    std::vector<Trial> trials;
    for (int r = 0; r < repeats; ++r) {
      TrainConfig c = ablation_config(base, row);
      c.seed = base.seed + static_cast<std::uint64_t>(r);
      EvalOptions e = eval;
      e.seed = eval.seed + static_cast<std::uint64_t>(r);
      trials.push_back(train_and_eval(dataset, dataset, c, e));
    }
    rows.push_back(summarize(dataset.name, ablation_row_names()[row], trials, base.seed));
  }
  return rows;
}

std::vector<StudyRow> run_level_study(const OnManifoldDataset& dataset, const std::vector<int>& levels,
                                      const TrainConfig& base, int repeats, const EvalOptions& eval) {
  check_repeats(repeats);
  std::vector<StudyRow> rows;
  for (int level : levels) {
    std::vector<Trial> trials;
    for (int r = 0; r < repeats; ++r) {
      TrainConfig c = base;
      c.levels = level;
      c.seed = base.seed + static_cast<std::uint64_t>(r);
      EvalOptions e = eval;
      e.seed = eval.seed + static_cast<std::uint64_t>(r);
      trials.push_back(train_and_eval(dataset, dataset, c, e));
    }
    rows.push_back(summarize(dataset.name, "levels=" + std::to_string(level), trials, base.seed));
  }
  return rows;
}

std::vector<StudyRow> run_noise_study(const OnManifoldDataset& dataset, const std::vector<double>& sigmas,
                                      const TrainConfig& base, int repeats, const EvalOptions& eval) {
  check_repeats(repeats);
  std::vector<StudyRow> rows;
  for (double sigma : sigmas) {
    std::vector<Trial> trials;
    for (int r = 0; r < repeats; ++r) {
      TrainConfig c = base;
      c.seed = base.seed + static_cast<std::uint64_t>(r);
      const OnManifoldDataset noisy = add_noise(dataset, sigma, c.seed);
      EvalOptions e = eval;
      e.seed = eval.seed + static_cast<std::uint64_t>(r);
      trials.push_back(train_and_eval(noisy, noisy, c, e));
    }
    char label[64];
    std::snprintf(label, sizeof label, "sigma=%g", sigma);
    rows.push_back(summarize(dataset.name, label, trials, base.seed));
  }
  return rows;
}

void write_study_csv(std::ostream& out, const std::vector<StudyRow>& rows) {
  out << "dataset,row,P_mean,P_std,mu_train_mean,mu_train_std,mu_test_mean,mu_test_std,seed\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.4f,%.4f,%.6g,%.6g,%.6g,%.6g,%llu\n", r.dataset.c_str(), r.row.c_str(),
                  r.P.mean, r.P.std, r.mu_train.mean, r.mu_train.std, r.mu_test.mean, r.mu_test.std,
                  static_cast<unsigned long long>(r.seed));
    out << buf;
  }
}

}  // namespace ecomann
