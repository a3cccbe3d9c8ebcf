#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "oplearn/nn/mlp.hpp"

namespace oplearn {

/// Multi-input operator network: sum(B_1(v_1) * ... * B_n(v_n) * T(y)) + b.
/// A single branch is the DeepONet special case.
struct MIONetModel {
  std::vector<nn::Mlp> branches;  // branch i reads input channel i
  nn::Mlp trunk;
  double bias = 0.0;

  static MIONetModel glorot(const std::vector<std::vector<int>>& branch_dims,
                            const std::vector<int>& trunk_dims, std::mt19937_64& rng);

  int branch_count() const { return static_cast<int>(branches.size()); }
  int latent_dim() const { return trunk.output_dim(); }
  int head_count() const { return 1; }
  int channel_count() const { return branch_count(); }
  std::vector<int> sensor_counts() const;

  /// Throws unless every branch and the trunk share the latent width.
  void validate() const;

  Eigen::Index parameter_count() const;
  nn::ParamLayout layout() const;
  Eigen::VectorXd pack() const;
  void unpack(const Eigen::VectorXd& params);

  bool operator==(const MIONetModel&) const = default;
};

/// Complex-split variant: per input function one branch for the real head and one for the
/// imaginary head, both fused with a single shared trunk evaluation.
/// Input channels are ordered (Re v_1, Im v_1, Re v_2, Im v_2, ...); real branch i reads
/// channel 2i and imaginary branch i reads channel 2i+1.
struct ComplexMIONetModel {
  std::vector<nn::Mlp> real_branches;
  std::vector<nn::Mlp> imag_branches;
  nn::Mlp trunk;
  double bias_re = 0.0;
  double bias_im = 0.0;

  static ComplexMIONetModel glorot(const std::vector<std::vector<int>>& branch_dims,
                                   const std::vector<int>& trunk_dims, std::mt19937_64& rng);

  int function_count() const { return static_cast<int>(real_branches.size()); }
  int latent_dim() const { return trunk.output_dim(); }
  int head_count() const { return 2; }
  int channel_count() const { return 2 * function_count(); }
  std::vector<int> sensor_counts() const;

  void validate() const;

  Eigen::Index parameter_count() const;
  nn::ParamLayout layout() const;
  Eigen::VectorXd pack() const;
  void unpack(const Eigen::VectorXd& params);

  bool operator==(const ComplexMIONetModel&) const = default;
};

using OperatorModel = std::variant<MIONetModel, ComplexMIONetModel>;

/// Single-point evaluation.
double mionet_forward(const MIONetModel& model, std::span<const Eigen::VectorXd> sensors,
                      const Eigen::VectorXd& y);
std::pair<double, double> complex_mionet_forward(const ComplexMIONetModel& model,
                                                 std::span<const Eigen::VectorXd> sensors,
                                                 const Eigen::VectorXd& y);

/// Training inputs in column layout: inputs[c] is (sensor count of channel c) x N samples.
using ChannelInputs = std::vector<Eigen::MatrixXd>;

/// One mini-batch of (sample index, query location, target) triples.
struct Batch {
  std::vector<int> sample;    // size B, columns of ChannelInputs
  Eigen::MatrixXd locations;  // trunk input dim x B
  Eigen::MatrixXd targets;    // heads x B
};

namespace detail {
struct Wiring;
struct TapeData;
}  // namespace detail

/// Forward pass over a batch that keeps what the backward pass needs.
class BatchEvaluation {
 public:
  BatchEvaluation(const MIONetModel& model, const ChannelInputs& inputs,
                  std::span<const int> sample, const Eigen::MatrixXd& locations);
  BatchEvaluation(const ComplexMIONetModel& model, const ChannelInputs& inputs,
                  std::span<const int> sample, const Eigen::MatrixXd& locations);
  ~BatchEvaluation();
  BatchEvaluation(BatchEvaluation&&) noexcept;
  BatchEvaluation& operator=(BatchEvaluation&&) noexcept;

  /// heads x B
  const Eigen::MatrixXd& outputs() const;

  /// Gradient of sum(upstream .* outputs) over all model parameters, in pack order.
  Eigen::VectorXd backward(const Eigen::MatrixXd& upstream) const;

 private:
  std::unique_ptr<detail::Wiring> wiring_;
  std::unique_ptr<detail::TapeData> tape_;
};

struct LossAndGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

/// Mean over the batch of the squared error summed over heads, and its gradient.
LossAndGradient mionet_gradients(const MIONetModel& model, const ChannelInputs& inputs,
                                 const Batch& batch);
LossAndGradient complex_mionet_gradients(const ComplexMIONetModel& model,
                                         const ChannelInputs& inputs, const Batch& batch);
LossAndGradient model_gradients(const OperatorModel& model, const ChannelInputs& inputs,
                                const Batch& batch);

/// Predicts every location for one fixed set of branch inputs; branch outputs are computed once.
/// `sensors` holds one vector per channel. Returns heads x locations.cols().
Eigen::MatrixXd predict_field(const OperatorModel& model, std::span<const Eigen::VectorXd> sensors,
                              const Eigen::MatrixXd& locations);

Eigen::Index parameter_count(const OperatorModel& model);
Eigen::VectorXd pack(const OperatorModel& model);
void unpack(OperatorModel& model, const Eigen::VectorXd& params);
nn::ParamLayout layout(const OperatorModel& model);
int head_count(const OperatorModel& model);
int channel_count(const OperatorModel& model);
int trunk_input_dim(const OperatorModel& model);

/// Checkpoint: nn checkpoint layout plus a header with variant, n, p and per-branch sensor counts.
void save_model(const OperatorModel& model, const std::filesystem::path& dir);
OperatorModel load_model(const std::filesystem::path& dir);

}  // namespace oplearn
