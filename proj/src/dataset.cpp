#include "ecomann/dataset.hpp"

#include "ecomann/projection.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace ecomann {

std::string to_string(GroundTruth gt) {
  switch (gt) {
    case GroundTruth::Sphere: return "Sphere";
    case GroundTruth::Circle3D: return "Circle3D";
    case GroundTruth::PlaneArm3R: return "PlaneArm3R";
    case GroundTruth::Orient6R: return "Orient6R";
    case GroundTruth::None: return "None";
  }
  return "None";
}

GroundTruth parse_ground_truth(const std::string& s) {
  static const std::map<std::string, GroundTruth> names = {
      {"Sphere", GroundTruth::Sphere},         {"sphere", GroundTruth::Sphere},
      {"Circle3D", GroundTruth::Circle3D},     {"circle3d", GroundTruth::Circle3D},
      {"PlaneArm3R", GroundTruth::PlaneArm3R}, {"plane", GroundTruth::PlaneArm3R},
      {"Orient6R", GroundTruth::Orient6R},     {"orient", GroundTruth::Orient6R},
      {"None", GroundTruth::None},             {"none", GroundTruth::None}};
  const auto it = names.find(s);
  if (it == names.end()) throw ParameterError("dataset", "unknown ground truth '" + s + "'");
  return it->second;
}

ManifoldPtr ground_truth_manifold(GroundTruth gt) {
  switch (gt) {
    case GroundTruth::Sphere: return std::make_shared<SphereManifold>();
    case GroundTruth::Circle3D: return std::make_shared<Circle3DManifold>();
    case GroundTruth::PlaneArm3R: return std::make_shared<EndEffectorPlaneManifold>(KinematicChain::plane_arm_3r());
    case GroundTruth::Orient6R: return std::make_shared<EndEffectorUprightManifold>(KinematicChain::orient_arm_6r());
    case GroundTruth::None: break;
  }
  throw ParameterError("dataset", "dataset has no ground-truth constraint");
}

OnManifoldDataset gen_sphere(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw ParameterError("dataset", "gen_sphere: N must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  OnManifoldDataset ds{"sphere", PointMatrix(n, 3), 1, GroundTruth::Sphere};
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Vector3d v;
    do {
      v = Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
    } while (v.norm() < 1e-12);
    ds.points.row(i) = v.normalized().transpose();
  }
  return ds;
}

OnManifoldDataset gen_circle3d(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw ParameterError("dataset", "gen_circle3d: N must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  OnManifoldDataset ds{"circle3d", PointMatrix(n, 3), 2, GroundTruth::Circle3D};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = angle(rng);
    ds.points.row(i) << std::cos(t), std::sin(t), 0.0;
  }
  return ds;
}

namespace {

OnManifoldDataset gen_arm(const std::string& name, const ImplicitManifold& constraint, int codim, GroundTruth gt,
                          Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw ParameterError("dataset", "gen_" + name + ": N must be >= 1");
  const int d = constraint.ambient_dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> joint(-std::numbers::pi, std::numbers::pi);
  ProjectionOptions opts;
  opts.tol = 1e-9;
  opts.max_iters = 100;

  OnManifoldDataset ds{name, PointMatrix(n, d), codim, gt};
  Eigen::Index kept = 0;
  long attempts = 0;
  Eigen::VectorXd q(d);
  while (kept < n) {
    for (int i = 0; i < d; ++i) q(i) = joint(rng);
    ++attempts;
    const auto res = project(constraint, q, opts);
    if (res.converged) {
      // revolute joints: fold back into the sampling range
      for (int i = 0; i < d; ++i) ds.points(kept, i) = std::remainder(res.q(i), 2.0 * std::numbers::pi);
      ++kept;
    }
    if (attempts >= 100 && kept * 10 < attempts) {
      throw GenerationError("dataset", "gen_" + name + ": projection failure rate above 90% after " +
                                           std::to_string(attempts) + " samples");
    }
  }
  return ds;
}

}  // namespace

OnManifoldDataset gen_plane_arm(Eigen::Index n, std::uint64_t seed) {
  const EndEffectorPlaneManifold constraint(KinematicChain::plane_arm_3r());
  return gen_arm("plane", constraint, 1, GroundTruth::PlaneArm3R, n, seed);
}

OnManifoldDataset gen_orient(Eigen::Index n, std::uint64_t seed) {
  const EndEffectorUprightManifold constraint(KinematicChain::orient_arm_6r());
  return gen_arm("orient", constraint, 2, GroundTruth::Orient6R, n, seed);
}

OnManifoldDataset generate_dataset(const std::string& kind, Eigen::Index n, std::uint64_t seed) {
  if (kind == "sphere") return gen_sphere(n, seed);
  if (kind == "circle3d") return gen_circle3d(n, seed);
  if (kind == "plane") return gen_plane_arm(n, seed);
  if (kind == "orient") return gen_orient(n, seed);
  throw ParameterError("dataset", "unknown dataset kind '" + kind + "' (sphere|circle3d|plane|orient)");
}

OnManifoldDataset add_noise(const OnManifoldDataset& ds, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ParameterError("dataset", "add_noise: sigma must be >= 0");
  OnManifoldDataset out = ds;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (Eigen::Index i = 0; i < out.points.rows(); ++i)
    for (Eigen::Index j = 0; j < out.points.cols(); ++j) out.points(i, j) += normal(rng);
  return out;
}

// ---- file format -----------------------------------------------------------

std::string format_dataset(const OnManifoldDataset& ds, const std::vector<int>* levels) {
  if (levels && static_cast<Eigen::Index>(levels->size()) != ds.size()) {
    throw ParameterError("dataset", "save_dataset: level column length does not match N");
  }
  std::ostringstream os;
  os << "# name=" << ds.name << " d=" << ds.dim() << " N=" << ds.size() << " l=" << ds.true_codim
     << " gt=" << to_string(ds.ground_truth);
  if (levels) os << " level=1";
  os << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (Eigen::Index j = 0; j < ds.points.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.points(i, j));
      if (j) os << ',';
      os << buf;
    }
    if (levels) os << ',' << (*levels)[static_cast<std::size_t>(i)];
    os << '\n';
  }
  return os.str();
}

void save_dataset(const std::string& path, const OnManifoldDataset& ds, const std::vector<int>* levels) {
  std::ofstream out(path);
  if (!out) throw ParseError("dataset", "cannot open '" + path + "' for writing");
  out << format_dataset(ds, levels);
  if (!out) throw ParseError("dataset", "write failed for '" + path + "'");
}

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
  throw ParseError("dataset", "line " + std::to_string(line) + ": " + msg);
}

long parse_int(const std::string& s, std::size_t line, const std::string& key) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) parse_fail(line, "invalid integer for " + key + ": '" + s + "'");
  return v;
}

}  // namespace

OnManifoldDataset parse_dataset(const std::string& text, std::vector<int>* levels) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) parse_fail(1, "missing '# name=... d=... N=... l=... gt=...' header");

  std::map<std::string, std::string> kv;
  std::istringstream hs(line.substr(2));
  for (std::string tok; hs >> tok;) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) parse_fail(1, "malformed header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"name", "d", "N", "l", "gt"}) {
    if (!kv.count(key)) parse_fail(1, std::string("header is missing '") + key + "'");
  }
  const long d = parse_int(kv["d"], 1, "d");
  const long n = parse_int(kv["N"], 1, "N");
  const long l = parse_int(kv["l"], 1, "l");
  if (d < 1 || n < 0 || l < 0) parse_fail(1, "header values out of range");
  const bool has_level = kv.count("level") && kv["level"] == "1";
  GroundTruth gt;
  try {
    gt = parse_ground_truth(kv["gt"]);
  } catch (const ParameterError&) {
    parse_fail(1, "unknown gt '" + kv["gt"] + "'");
  }

  OnManifoldDataset ds{kv["name"], PointMatrix(n, d), static_cast<int>(l), gt};
  if (levels) levels->assign(static_cast<std::size_t>(n), 0);
  const long cols = d + (has_level ? 1 : 0);
  long row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row >= n) parse_fail(lineno, "more rows than N=" + std::to_string(n));
    long col = 0;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      const std::string field = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (col >= cols) parse_fail(lineno, "expected " + std::to_string(cols) + " columns");
      if (has_level && col == d) {
        const long lv = parse_int(field, lineno, "level");
        if (levels) (*levels)[static_cast<std::size_t>(row)] = static_cast<int>(lv);
      } else {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc() || ptr != field.data() + field.size()) parse_fail(lineno, "invalid number '" + field + "'");
        if (!std::isfinite(v)) parse_fail(lineno, "non-finite value");
        ds.points(row, col) = v;
      }
      ++col;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (col != cols) {
      parse_fail(lineno, "expected " + std::to_string(cols) + " columns, found " + std::to_string(col));
    }
    ++row;
  }
  if (row != n) parse_fail(lineno, "expected " + std::to_string(n) + " rows, found " + std::to_string(row));
  return ds;
}

OnManifoldDataset load_dataset(const std::string& path, std::vector<int>* levels) {
  std::ifstream in(path);
  if (!in) throw ParseError("dataset", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str(), levels);
}

}  // namespace ecomann
