#include "ecomann/augment.hpp"

#include "ecomann/osa.hpp"

#include <random>

namespace ecomann {

double compute_epsilon(const std::vector<LocalFrame>& frames) {
  if (frames.empty()) throw ParameterError("augment", "compute_epsilon: no frames");
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& f : frames) {
    sum += f.tangent_eigvals().sum();
    count += static_cast<std::size_t>(f.tangent_eigvals().size());
  }
  if (count == 0) throw ParameterError("augment", "compute_epsilon: frames carry no tangent eigenvalues");
  return std::sqrt(sum / static_cast<double>(count));
}

AugmentedSet augment_dataset(const PointMatrix& on_manifold, const std::vector<Eigen::MatrixXd>& normals, double epsilon,
                             const AugmentOptions& options) {
  const Eigen::Index n = on_manifold.rows();
  const int d = static_cast<int>(on_manifold.cols());
  if (!(epsilon > 0.0)) throw ParameterError("augment", "epsilon must be positive");
  if (options.levels < 1) throw ParameterError("augment", "levels must be >= 1");
  if (options.dirs_per_point < 1) throw ParameterError("augment", "dirs_per_point must be >= 1");
  if (static_cast<Eigen::Index>(normals.size()) != n || n < 2) {
    throw ParameterError("augment", "one normal basis per on-manifold point (N >= 2) required");
  }
  const Eigen::Index l = normals.front().cols();
  const int dirs = (l == 1) ? 1 : options.dirs_per_point;
  const int levels = options.levels;
  const Eigen::Index k = std::min<Eigen::Index>(options.k > 0 ? options.k : default_k(d), n - 1);

  const KdTree tree(on_manifold);

  // One weight vector per direction slot, shared by every point: with aligned
  // bases, neighbours then step along matching normal directions.
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> weights(static_cast<std::size_t>(dirs));
  for (auto& w : weights) {
    w.resize(l);
    do {
      for (Eigen::Index j = 0; j < l; ++j) w(j) = normal(rng);
    } while (w.norm() < 1e-12);
  }

  AugmentedSet out;
  out.points.reserve(static_cast<std::size_t>(n) * (1 + 2 * static_cast<std::size_t>(dirs * levels)));
  for (Eigen::Index i = 0; i < n; ++i) {
    out.points.push_back({on_manifold.row(i).transpose(), i, 0, Eigen::VectorXd(), 0.0});
  }

  // slot(i, dir, sign, level) -> index into out.points, or -1 if rejected
  const auto slot = [&](Eigen::Index i, int dir, int sign, int level) {
    return ((static_cast<std::size_t>(i) * static_cast<std::size_t>(dirs) + static_cast<std::size_t>(dir)) * 2 +
            static_cast<std::size_t>(sign)) *
               static_cast<std::size_t>(levels) +
           static_cast<std::size_t>(level - 1);
  };
  std::vector<long> index(static_cast<std::size_t>(n) * static_cast<std::size_t>(dirs) * 2 * static_cast<std::size_t>(levels), -1);

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& v = normals[static_cast<std::size_t>(i)];
    const Eigen::VectorXd q = on_manifold.row(i).transpose();
    for (int dir = 0; dir < dirs; ++dir) {
      Eigen::VectorXd u = v * weights[static_cast<std::size_t>(dir)];
      u /= u.norm();
      for (int sign = 0; sign < 2; ++sign) {
        const Eigen::VectorXd us = sign == 0 ? u : Eigen::VectorXd(-u);
        for (int level = 1; level <= levels; ++level) {
          const double label = level * epsilon;
          Eigen::VectorXd candidate = q + label * us;
          if (tree.nearest(candidate) != i) {
            ++out.rejected;
            continue;
          }
          index[slot(i, dir, sign, level)] = static_cast<long>(out.points.size());
          out.points.push_back({std::move(candidate), i, level, us, label});
        }
      }
    }
  }

  auto& pairs = out.pairs;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int dir = 0; dir < dirs; ++dir) {
      for (int level = 1; level <= levels; ++level) {
        const long plus = index[slot(i, dir, 0, level)];
        const long minus = index[slot(i, dir, 1, level)];
        if (plus >= 0 && minus >= 0) pairs.reflection.emplace_back(plus, minus);
      }
      for (int sign = 0; sign < 2; ++sign) {
        for (int level = 2; level <= levels; ++level) {
          const int near_level = (level + 1) / 2;
          const long far = index[slot(i, dir, sign, level)];
          const long near = index[slot(i, dir, sign, near_level)];
          if (far >= 0 && near >= 0) {
            pairs.fraction.push_back({static_cast<std::size_t>(far), static_cast<std::size_t>(near),
                                      static_cast<double>(near_level) / level});
          }
        }
      }
    }
  }
  // k-NN edges in either direction, widened until connected: a single
  // sign convention has to reach every point
  for (const auto& e : build_neighbor_graph(on_manifold, static_cast<int>(k)).edges) {
    for (int dir = 0; dir < dirs; ++dir)
      for (int sign = 0; sign < 2; ++sign)
        for (int level = 1; level <= levels; ++level) {
          const long ia = index[slot(e.a, dir, sign, level)];
          const long ic = index[slot(e.b, dir, sign, level)];
          if (ia >= 0 && ic >= 0) pairs.similar.emplace_back(ia, ic);
        }
  }
  return out;
}

}  // namespace ecomann
