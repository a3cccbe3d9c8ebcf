#include "oplearn/nn/mlp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace oplearn::nn {

namespace {

void require_dims(const std::vector<int>& dims) {
  if (dims.size() < 3) {
    throw std::invalid_argument("mlp: need input, at least one hidden layer, and output dims");
  }
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("mlp: layer dims must be positive");
  }
}

// tanh(z) = 1 - 2 / (exp(2z) + 1); Eigen vectorises exp for doubles but not tanh.
// Saturates to +-1 without overflow issues: exp -> inf gives 1, exp -> 0 gives -1.
void tanh_inplace(Eigen::MatrixXd& z) {
  z = (1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0)).matrix();
}

}  // namespace

AffineGradients affine_backward(const Eigen::MatrixXd& weight, const Eigen::MatrixXd& input,
                                const Eigen::MatrixXd& upstream) {
  if (upstream.cols() != input.cols() || upstream.rows() != weight.rows() ||
      input.rows() != weight.cols()) {
    throw std::invalid_argument("affine_backward: shape mismatch");
  }
  AffineGradients g;
  g.weight.noalias() = upstream * input.transpose();
  g.bias = upstream.rowwise().sum();
  g.input.noalias() = weight.transpose() * upstream;
  return g;
}

Mlp::Mlp(std::vector<int> layer_dims) : dims_(std::move(layer_dims)) {
  require_dims(dims_);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    weights_.push_back(Eigen::MatrixXd::Zero(dims_[l + 1], dims_[l]));
    biases_.push_back(Eigen::VectorXd::Zero(dims_[l + 1]));
  }
}

Mlp Mlp::glorot(std::vector<int> layer_dims, std::mt19937_64& rng) {
  Mlp net(std::move(layer_dims));
  for (auto& w : net.weights_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    // Fill row-major so the draw order matches the checkpoint layout.
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
  }
  return net;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd out = forward_batch(Eigen::MatrixXd(x));
  return out.col(0);
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& inputs) const {
  if (dims_.empty()) throw std::logic_error("mlp: uninitialised network");
  if (inputs.rows() != input_dim()) {
    std::ostringstream msg;
    msg << "mlp: input has " << inputs.rows() << " rows, network expects " << input_dim();
    throw std::invalid_argument(msg.str());
  }
  Eigen::MatrixXd a = inputs;
  const int last = layer_count() - 1;
  for (int l = 0; l <= last; ++l) {
    Eigen::MatrixXd z = weights_[l] * a;
    z.colwise() += biases_[l];
    if (l < last) tanh_inplace(z);
    a = std::move(z);
  }
  return a;
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& inputs, MlpTape& tape) const {
  if (dims_.empty()) throw std::logic_error("mlp: uninitialised network");
  if (inputs.rows() != input_dim()) {
    std::ostringstream msg;
    msg << "mlp: input has " << inputs.rows() << " rows, network expects " << input_dim();
    throw std::invalid_argument(msg.str());
  }
  const int last = layer_count() - 1;
  tape.activations.resize(layer_count());
  tape.activations[0] = inputs;
  Eigen::MatrixXd out;
  for (int l = 0; l <= last; ++l) {
    Eigen::MatrixXd z = weights_[l] * tape.activations[l];
    z.colwise() += biases_[l];
    if (l < last) {
      tanh_inplace(z);
      tape.activations[l + 1] = std::move(z);
    } else {
      out = std::move(z);
    }
  }
  return out;
}

MlpGradients Mlp::backward(const MlpTape& tape, const Eigen::MatrixXd& upstream) const {
  if (static_cast<int>(tape.activations.size()) != layer_count()) {
    throw std::invalid_argument("mlp backward: tape does not belong to this network");
  }
  const Eigen::Index batch = tape.activations[0].cols();
  if (upstream.rows() != output_dim() || upstream.cols() != batch) {
    throw std::invalid_argument("mlp backward: upstream shape does not match forward pass");
  }
  MlpGradients g;
  g.weights.resize(layer_count());
  g.biases.resize(layer_count());
  Eigen::MatrixXd delta = upstream;
  for (int l = layer_count() - 1; l >= 0; --l) {
    const Eigen::MatrixXd& a = tape.activations[l];
    g.weights[l].noalias() = delta * a.transpose();
    g.biases[l] = delta.rowwise().sum();
    Eigen::MatrixXd da = weights_[l].transpose() * delta;
    if (l > 0) {
      delta = (da.array() * (1.0 - a.array().square())).matrix();
    } else {
      g.input = std::move(da);
    }
  }
  return g;
}

Eigen::Index Mlp::parameter_count() const {
  Eigen::Index n = 0;
  for (int l = 0; l < layer_count(); ++l) n += weights_[l].size() + biases_[l].size();
  return n;
}

ParamLayout Mlp::layout(const std::string& prefix, Eigen::Index base_offset) const {
  ParamLayout slots;
  Eigen::Index off = base_offset;
  for (int l = 0; l < layer_count(); ++l) {
    slots.push_back({prefix + ".layer" + std::to_string(l) + ".weight", off, weights_[l].rows(),
                     weights_[l].cols()});
    off += weights_[l].size();
    slots.push_back({prefix + ".layer" + std::to_string(l) + ".bias", off, biases_[l].size(), 1});
    off += biases_[l].size();
  }
  return slots;
}

namespace {

template <typename W, typename B>
void pack_layers(const std::vector<W>& weights, const std::vector<B>& biases,
                 std::span<double> out) {
  std::size_t k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const auto& w = weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) out[k++] = w(r, c);
    for (Eigen::Index i = 0; i < biases[l].size(); ++i) out[k++] = biases[l](i);
  }
}

}  // namespace

void Mlp::pack(std::span<double> out) const {
  if (static_cast<Eigen::Index>(out.size()) != parameter_count()) {
    throw std::invalid_argument("mlp pack: buffer size mismatch");
  }
  pack_layers(weights_, biases_, out);
}

void Mlp::unpack(std::span<const double> in) {
  if (static_cast<Eigen::Index>(in.size()) != parameter_count()) {
    throw std::invalid_argument("mlp unpack: buffer size mismatch");
  }
  std::size_t k = 0;
  for (int l = 0; l < layer_count(); ++l) {
    auto& w = weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = in[k++];
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) biases_[l](i) = in[k++];
  }
}

void MlpGradients::pack(std::span<double> out) const {
  std::size_t expected = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) expected += weights[l].size() + biases[l].size();
  if (out.size() != expected) throw std::invalid_argument("gradient pack: buffer size mismatch");
  pack_layers(weights, biases, out);
}

std::vector<int> parse_architecture(const std::string& spec) {
  // Din-width*depth-Dout
  const auto first = spec.find('-');
  const auto star = spec.find('*');
  const auto last = spec.rfind('-');
  if (first == std::string::npos || star == std::string::npos || last == first || star < first ||
      star > last) {
    throw std::invalid_argument("bad architecture string '" + spec + "'");
  }
  try {
    const int din = std::stoi(spec.substr(0, first));
    const int width = std::stoi(spec.substr(first + 1, star - first - 1));
    const int depth = std::stoi(spec.substr(star + 1, last - star - 1));
    const int dout = std::stoi(spec.substr(last + 1));
    if (din <= 0 || width <= 0 || depth <= 0 || dout <= 0) throw std::invalid_argument("");
    std::vector<int> dims{din};
    dims.insert(dims.end(), depth, width);
    dims.push_back(dout);
    return dims;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad architecture string '" + spec + "'");
  }
}

std::string format_architecture(const std::vector<int>& dims) {
  if (dims.size() < 3) throw std::invalid_argument("format_architecture: need >= 3 dims");
  const int width = dims[1];
  for (std::size_t i = 1; i + 1 < dims.size(); ++i) {
    if (dims[i] != width) throw std::invalid_argument("format_architecture: non-uniform widths");
  }
  return std::to_string(dims.front()) + "-" + std::to_string(width) + "*" +
         std::to_string(dims.size() - 2) + "-" + std::to_string(dims.back());
}

}  // namespace oplearn::nn
