#include "ecomann/mlp.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace ecomann {

MlpModel::MlpModel(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw ParameterError("ecomann", "model needs at least an input and an output layer");
  Eigen::Index total = 0;
  for (std::size_t k = 0; k + 1 < dims_.size(); ++k) {
    if (dims_[k] < 1 || dims_[k + 1] < 1) throw ParameterError("ecomann", "layer widths must be positive");
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(dims_[k + 1]) * (dims_[k] + 1);
  }
  params_ = Eigen::VectorXd::Zero(total);
}

MlpModel MlpModel::glorot(std::vector<int> dims, std::uint64_t seed) {
  MlpModel m(std::move(dims));
  std::mt19937_64 rng(seed);
  for (int k = 0; k < m.num_layers(); ++k) {
    const double limit = std::sqrt(6.0 / (m.dims_[static_cast<std::size_t>(k)] + m.dims_[static_cast<std::size_t>(k) + 1]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto w = m.weight(k);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
  }
  return m;
}

MlpModel::ConstMatrixMap MlpModel::weight(int layer) const {
  const auto k = static_cast<std::size_t>(layer);
  return ConstMatrixMap(params_.data() + offsets_[k], dims_[k + 1], dims_[k]);
}

MlpModel::ConstVectorMap MlpModel::bias(int layer) const {
  const auto k = static_cast<std::size_t>(layer);
  return ConstVectorMap(params_.data() + offsets_[k] + static_cast<Eigen::Index>(dims_[k + 1]) * dims_[k], dims_[k + 1]);
}

MlpModel::MatrixMap MlpModel::weight(int layer) {
  const auto k = static_cast<std::size_t>(layer);
  return MatrixMap(params_.data() + offsets_[k], dims_[k + 1], dims_[k]);
}

MlpModel::VectorMap MlpModel::bias(int layer) {
  const auto k = static_cast<std::size_t>(layer);
  return VectorMap(params_.data() + offsets_[k] + static_cast<Eigen::Index>(dims_[k + 1]) * dims_[k], dims_[k + 1]);
}

namespace {

void check_input(const MlpModel& m, const Eigen::Ref<const Eigen::VectorXd>& q) {
  if (q.size() != m.input_dim()) {
    throw ParameterError("ecomann", "model expects " + std::to_string(m.input_dim()) + " inputs, got " +
                                        std::to_string(q.size()));
  }
  if (!q.allFinite()) throw ParameterError("ecomann", "non-finite model input");
}

}  // namespace

Eigen::VectorXd MlpModel::forward(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  check_input(*this, q);
  Eigen::VectorXd a = q;
  for (int k = 0; k < num_layers(); ++k) {
    Eigen::VectorXd z = weight(k) * a + bias(k);
    a = (k + 1 < num_layers()) ? Eigen::VectorXd(z.array().tanh()) : z;
  }
  return a;
}

Eigen::MatrixXd MlpModel::jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  JacobianCache cache;
  return jacobian_cached(q, cache);
}

void MlpModel::forward_batch(const Eigen::MatrixXd& inputs, BatchCache& cache) const {
  if (inputs.rows() != input_dim()) throw ParameterError("ecomann", "forward_batch: input dimension mismatch");
  cache.acts.resize(static_cast<std::size_t>(num_layers()) + 1);
  cache.acts[0] = inputs;
  for (int k = 0; k < num_layers(); ++k) {
    auto& out = cache.acts[static_cast<std::size_t>(k) + 1];
    out.noalias() = weight(k) * cache.acts[static_cast<std::size_t>(k)];
    out.colwise() += bias(k);
    if (k + 1 < num_layers()) out = out.array().tanh();
  }
}

void MlpModel::backward_batch(const BatchCache& cache, const Eigen::MatrixXd& d_out,
                              Eigen::Ref<Eigen::VectorXd> grad) const {
  Eigen::MatrixXd da = d_out;
  Eigen::MatrixXd dz;
  for (int k = num_layers() - 1; k >= 0; --k) {
    const auto ku = static_cast<std::size_t>(k);
    if (k + 1 < num_layers()) {
      const auto& a = cache.acts[ku + 1];
      dz = da.array() * (1.0 - a.array().square());
    } else {
      dz = da;
    }
    const Eigen::Index rows = dims_[ku + 1], cols = dims_[ku];
    MatrixMap(grad.data() + offsets_[ku], rows, cols).noalias() += dz * cache.acts[ku].transpose();
    VectorMap(grad.data() + offsets_[ku] + rows * cols, rows) += dz.rowwise().sum();
    if (k > 0) da.noalias() = weight(k).transpose() * dz;
  }
}

Eigen::MatrixXd MlpModel::jacobian_cached(const Eigen::Ref<const Eigen::VectorXd>& q, JacobianCache& cache) const {
  check_input(*this, q);
  const auto layers = static_cast<std::size_t>(num_layers());
  cache.acts.resize(layers + 1);
  cache.pre_tangents.resize(layers + 1);
  cache.tangents.resize(layers + 1);
  cache.acts[0] = q;
  cache.tangents[0] = Eigen::MatrixXd::Identity(q.size(), q.size());
  for (std::size_t k = 0; k < layers; ++k) {
    const int ki = static_cast<int>(k);
    Eigen::VectorXd z = weight(ki) * cache.acts[k] + bias(ki);
    cache.pre_tangents[k + 1].noalias() = weight(ki) * cache.tangents[k];
    if (k + 1 < layers) {
      cache.acts[k + 1] = z.array().tanh();
      const Eigen::VectorXd slope = 1.0 - cache.acts[k + 1].array().square();
      cache.tangents[k + 1] = slope.asDiagonal() * cache.pre_tangents[k + 1];
    } else {
      cache.acts[k + 1] = z;
      cache.tangents[k + 1] = cache.pre_tangents[k + 1];
    }
  }
  return cache.tangents[layers];
}

void MlpModel::backward_jacobian(const JacobianCache& cache, const Eigen::MatrixXd& d_jac, const Eigen::VectorXd& d_out,
                                 Eigen::Ref<Eigen::VectorXd> grad) const {
  const auto layers = static_cast<std::size_t>(num_layers());
  // Adjoints of the tangent T_k and activation a_k flowing into the layer above.
  Eigen::MatrixXd g_tangent = d_jac;
  Eigen::VectorXd g_act = d_out.size() ? d_out : Eigen::VectorXd::Zero(output_dim());
  for (std::size_t k = layers; k-- > 0;) {
    const Eigen::Index rows = dims_[k + 1], cols = dims_[k];
    Eigen::MatrixXd g_pre;
    Eigen::VectorXd g_z;
    if (k + 1 == layers) {
      g_pre = g_tangent;
      g_z = g_act;
    } else {
      const Eigen::VectorXd& a = cache.acts[k + 1];
      const Eigen::VectorXd slope = 1.0 - a.array().square();
      g_pre = slope.asDiagonal() * g_tangent;
      // T = diag(slope) * pre; slope = 1 - a^2
      const Eigen::VectorXd g_slope = (g_tangent.array() * cache.pre_tangents[k + 1].array()).rowwise().sum();
      const Eigen::VectorXd g_a = g_act - 2.0 * (a.array() * g_slope.array()).matrix();
      g_z = g_a.cwiseProduct(slope);
    }
    MatrixMap gw(grad.data() + offsets_[k], rows, cols);
    gw.noalias() += g_pre * cache.tangents[k].transpose();
    gw.noalias() += g_z * cache.acts[k].transpose();
    VectorMap(grad.data() + offsets_[k] + rows * cols, rows) += g_z;
    if (k > 0) {
      const int ki = static_cast<int>(k);
      g_tangent = weight(ki).transpose() * g_pre;
      g_act = weight(ki).transpose() * g_z;
    }
  }
}

// ---- file format -----------------------------------------------------------

std::string format_model(const MlpModel& model) {
  std::ostringstream os;
  os << "# ecomann dims=";
  for (std::size_t i = 0; i < model.dims().size(); ++i) os << (i ? "," : "") << model.dims()[i];
  os << '\n';
  char buf[32];
  auto put_row = [&](const auto& row) {
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", row(j));
      if (j) os << ',';
      os << buf;
    }
    os << '\n';
  };
  for (int k = 0; k < model.num_layers(); ++k) {
    const auto w = model.weight(k);
    for (Eigen::Index i = 0; i < w.rows(); ++i) put_row(w.row(i));
    put_row(model.bias(k));
  }
  return os.str();
}

void save_model(const std::string& path, const MlpModel& model) {
  std::ofstream out(path);
  if (!out) throw ParseError("ecomann", "cannot open '" + path + "' for writing");
  out << format_model(model);
  if (!out) throw ParseError("ecomann", "write failed for '" + path + "'");
}

namespace {

[[noreturn]] void model_fail(std::size_t line, const std::string& msg) {
  throw ParseError("ecomann", "model line " + std::to_string(line) + ": " + msg);
}

std::vector<double> parse_row(const std::string& line, std::size_t lineno) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    const std::string field = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) model_fail(lineno, "invalid number '" + field + "'");
    if (!std::isfinite(v)) model_fail(lineno, "non-finite parameter");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

MlpModel parse_model(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  const std::string prefix = "# ecomann dims=";
  if (!std::getline(in, line) || line.rfind(prefix, 0) != 0) model_fail(1, "missing '# ecomann dims=...' header");
  std::vector<int> dims;
  {
    std::istringstream ds(line.substr(prefix.size()));
    for (std::string tok; std::getline(ds, tok, ',');) {
      int v = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 1) model_fail(1, "invalid layer width '" + tok + "'");
      dims.push_back(v);
    }
  }
  if (dims.size() < 2) model_fail(1, "need at least two layer widths");

  MlpModel model(dims);
  std::size_t lineno = 1;
  auto next_row = [&](std::size_t expected, const std::string& what) {
    do {
      if (!std::getline(in, line)) model_fail(lineno + 1, "truncated file: expected " + what);
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
    } while (line.empty());
    auto row = parse_row(line, lineno);
    if (row.size() != expected) {
      model_fail(lineno, what + " has " + std::to_string(row.size()) + " values, expected " + std::to_string(expected));
    }
    return row;
  };
  for (int k = 0; k < model.num_layers(); ++k) {
    auto w = model.weight(k);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      const auto row = next_row(static_cast<std::size_t>(w.cols()), "weight row of layer " + std::to_string(k));
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = row[static_cast<std::size_t>(j)];
    }
    const auto b = next_row(static_cast<std::size_t>(w.rows()), "bias row of layer " + std::to_string(k));
    for (Eigen::Index i = 0; i < w.rows(); ++i) model.bias(k)(i) = b[static_cast<std::size_t>(i)];
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line != "\r") model_fail(lineno, "unexpected data after the last layer (layer count mismatch)");
  }
  return model;
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("ecomann", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace ecomann
