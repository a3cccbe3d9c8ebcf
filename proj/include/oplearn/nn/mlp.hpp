#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oplearn::nn {

/// One named tensor inside a flat parameter vector.
struct TensorSlot {
  std::string name;
  Eigen::Index offset = 0;  // in doubles
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index size() const { return rows * cols; }
};

using ParamLayout = std::vector<TensorSlot>;

/// Gradient of a single affine map y = W x + b for a batch stored column-wise.
struct AffineGradients {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
  Eigen::MatrixXd input;
};

AffineGradients affine_backward(const Eigen::MatrixXd& weight, const Eigen::MatrixXd& input,
                                const Eigen::MatrixXd& upstream);

/// Activations kept from a batched forward pass; consumed by Mlp::backward.
struct MlpTape {
  // activations[0] is the input batch, activations[l] the tanh output of hidden layer l.
  std::vector<Eigen::MatrixXd> activations;
};

struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::MatrixXd input;

  /// Writes in checkpoint order: per layer, weights row-major then biases.
  void pack(std::span<double> out) const;
};

/// Dense feed-forward network: tanh on every hidden layer, identity on the output layer.
class Mlp {
 public:
  Mlp() = default;

  /// Zero weights and biases. Needs input, at least one hidden width, and output.
  explicit Mlp(std::vector<int> layer_dims);

  /// Glorot-uniform weights, zero biases.
  static Mlp glorot(std::vector<int> layer_dims, std::mt19937_64& rng);

  const std::vector<int>& layer_dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  int layer_count() const { return static_cast<int>(weights_.size()); }

  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  std::vector<Eigen::VectorXd>& biases() { return biases_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  /// Columns of `inputs` are independent samples.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs, MlpTape& tape) const;

  /// `upstream` is dLoss/dOutput with one column per sample of the taped batch.
  MlpGradients backward(const MlpTape& tape, const Eigen::MatrixXd& upstream) const;

  Eigen::Index parameter_count() const;
  ParamLayout layout(const std::string& prefix, Eigen::Index base_offset = 0) const;
  void pack(std::span<double> out) const;
  void unpack(std::span<const double> in);

  bool operator==(const Mlp&) const = default;

 private:
  std::vector<int> dims_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// Parses the "Din-width*depth-Dout" notation, e.g. "2-400*4-100" -> {2,400,400,400,400,100}.
std::vector<int> parse_architecture(const std::string& spec);
std::string format_architecture(const std::vector<int>& dims);

}  // namespace oplearn::nn
