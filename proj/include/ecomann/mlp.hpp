#pragma once

#include "ecomann/common.hpp"
#include "ecomann/manifold.hpp"

#include <cstdint>

namespace ecomann {

/// Fully connected network h: R^d -> R^l with tanh hidden layers and a linear
/// output layer. Parameters live in one flat vector; per layer the weight
/// (column-major, out x in) is followed by the bias.
class MlpModel {
 public:
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
  using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;
  using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
  using VectorMap = Eigen::Map<Eigen::VectorXd>;

  MlpModel() = default;
  explicit MlpModel(std::vector<int> dims);  // zero parameters

  static std::vector<int> default_dims(int d, int l) { return {d, 36, 24, 18, 10, l}; }

  /// Uniform in +/- sqrt(6 / (fan_in + fan_out)); zero biases.
  static MlpModel glorot(std::vector<int> dims, std::uint64_t seed);

  const std::vector<int>& dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  int num_layers() const { return static_cast<int>(dims_.size()) - 1; }

  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }

  ConstMatrixMap weight(int layer) const;
  ConstVectorMap bias(int layer) const;
  MatrixMap weight(int layer);
  VectorMap bias(int layer);

  Eigen::VectorXd forward(const Eigen::Ref<const Eigen::VectorXd>& q) const;
  Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const;

  // ---- training interface ------------------------------------------------

  /// Activations for a batch stored column-wise: acts[0] is the input,
  /// acts.back() the output.
  struct BatchCache {
    std::vector<Eigen::MatrixXd> acts;
  };
  void forward_batch(const Eigen::MatrixXd& inputs, BatchCache& cache) const;

  /// Accumulates into `grad` the parameter gradient of sum_j <d_out(:, j), h(x_j)>.
  void backward_batch(const BatchCache& cache, const Eigen::MatrixXd& d_out, Eigen::Ref<Eigen::VectorXd> grad) const;

  /// Values, hidden activations and forward tangents T_k = d a_k / d q of one sample.
  struct JacobianCache {
    std::vector<Eigen::VectorXd> acts;
    std::vector<Eigen::MatrixXd> pre_tangents;  // W_k T_{k-1}
    std::vector<Eigen::MatrixXd> tangents;      // T_k, T_0 = I
  };
  Eigen::MatrixXd jacobian_cached(const Eigen::Ref<const Eigen::VectorXd>& q, JacobianCache& cache) const;

  /// Accumulates into `grad` the parameter gradient of <d_jac, J(q)> + <d_out, h(q)>.
  void backward_jacobian(const JacobianCache& cache, const Eigen::MatrixXd& d_jac, const Eigen::VectorXd& d_out,
                         Eigen::Ref<Eigen::VectorXd> grad) const;

 private:
  std::vector<int> dims_;
  std::vector<Eigen::Index> offsets_;  // start of each layer's weight block
  Eigen::VectorXd params_;
};

/// `# ecomann dims=<d>,36,24,18,10,<l>` followed, per layer, by one row per
/// output unit holding its weights and then a single bias row.
void save_model(const std::string& path, const MlpModel& model);
std::string format_model(const MlpModel& model);
MlpModel load_model(const std::string& path);
MlpModel parse_model(const std::string& text);

/// A trained network used as an implicit manifold.
class LearnedManifold final : public ImplicitManifold {
 public:
  explicit LearnedManifold(MlpModel model) : model_(std::move(model)) {}

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const override { return model_.forward(q); }
  Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const override { return model_.jacobian(q); }
  int ambient_dim() const override { return model_.input_dim(); }
  int codim() const override { return model_.output_dim(); }
  std::string name() const override { return "learned"; }
  bool is_learned() const override { return true; }

  const MlpModel& model() const { return model_; }

 private:
  MlpModel model_;
};

}  // namespace ecomann
