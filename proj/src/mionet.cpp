#include "oplearn/mionet.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "oplearn/binary_io.hpp"
#include "oplearn/nn/checkpoint.hpp"

namespace oplearn {

namespace {

template <typename T>
void copy_into(Eigen::VectorXd& flat, Eigen::Index& off, const T& net) {
  const auto n = net.parameter_count();
  net.pack(std::span<double>(flat.data() + off, static_cast<std::size_t>(n)));
  off += n;
}

template <typename T>
void copy_from(const Eigen::VectorXd& flat, Eigen::Index& off, T& net) {
  const auto n = net.parameter_count();
  net.unpack(std::span<const double>(flat.data() + off, static_cast<std::size_t>(n)));
  off += n;
}

void check_latent(const std::vector<nn::Mlp>& branches, const nn::Mlp& trunk,
                  const char* what) {
  if (branches.empty()) throw std::invalid_argument(std::string(what) + ": need at least one branch");
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (branches[i].output_dim() != trunk.output_dim()) {
      std::ostringstream msg;
      msg << what << ": branch " << i << " output dim " << branches[i].output_dim()
          << " != trunk output dim " << trunk.output_dim();
      throw std::invalid_argument(msg.str());
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Model types

MIONetModel MIONetModel::glorot(const std::vector<std::vector<int>>& branch_dims,
                                const std::vector<int>& trunk_dims, std::mt19937_64& rng) {
  MIONetModel m;
  for (const auto& d : branch_dims) m.branches.push_back(nn::Mlp::glorot(d, rng));
  m.trunk = nn::Mlp::glorot(trunk_dims, rng);
  m.validate();
  return m;
}

std::vector<int> MIONetModel::sensor_counts() const {
  std::vector<int> out;
  for (const auto& b : branches) out.push_back(b.input_dim());
  return out;
}

void MIONetModel::validate() const { check_latent(branches, trunk, "mionet"); }

Eigen::Index MIONetModel::parameter_count() const {
  Eigen::Index n = trunk.parameter_count() + 1;
  for (const auto& b : branches) n += b.parameter_count();
  return n;
}

nn::ParamLayout MIONetModel::layout() const {
  nn::ParamLayout out;
  Eigen::Index off = 0;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    auto slots = branches[i].layout("branch" + std::to_string(i), off);
    out.insert(out.end(), slots.begin(), slots.end());
    off += branches[i].parameter_count();
  }
  auto slots = trunk.layout("trunk", off);
  out.insert(out.end(), slots.begin(), slots.end());
  off += trunk.parameter_count();
  out.push_back({"bias", off, 1, 1});
  return out;
}

Eigen::VectorXd MIONetModel::pack() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index off = 0;
  for (const auto& b : branches) copy_into(flat, off, b);
  copy_into(flat, off, trunk);
  flat(off) = bias;
  return flat;
}

void MIONetModel::unpack(const Eigen::VectorXd& params) {
  if (params.size() != parameter_count()) throw std::invalid_argument("mionet unpack: size mismatch");
  Eigen::Index off = 0;
  for (auto& b : branches) copy_from(params, off, b);
  copy_from(params, off, trunk);
  bias = params(off);
}

ComplexMIONetModel ComplexMIONetModel::glorot(const std::vector<std::vector<int>>& branch_dims,
                                              const std::vector<int>& trunk_dims,
                                              std::mt19937_64& rng) {
  ComplexMIONetModel m;
  for (const auto& d : branch_dims) m.real_branches.push_back(nn::Mlp::glorot(d, rng));
  for (const auto& d : branch_dims) m.imag_branches.push_back(nn::Mlp::glorot(d, rng));
  m.trunk = nn::Mlp::glorot(trunk_dims, rng);
  m.validate();
  return m;
}

std::vector<int> ComplexMIONetModel::sensor_counts() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < real_branches.size(); ++i) {
    out.push_back(real_branches[i].input_dim());
    out.push_back(imag_branches[i].input_dim());
  }
  return out;
}

void ComplexMIONetModel::validate() const {
  check_latent(real_branches, trunk, "complex mionet (real head)");
  check_latent(imag_branches, trunk, "complex mionet (imaginary head)");
  if (real_branches.size() != imag_branches.size()) {
    throw std::invalid_argument("complex mionet: real and imaginary branch counts differ");
  }
}

Eigen::Index ComplexMIONetModel::parameter_count() const {
  Eigen::Index n = trunk.parameter_count() + 2;
  for (const auto& b : real_branches) n += b.parameter_count();
  for (const auto& b : imag_branches) n += b.parameter_count();
  return n;
}

nn::ParamLayout ComplexMIONetModel::layout() const {
  nn::ParamLayout out;
  Eigen::Index off = 0;
  auto add = [&](const nn::Mlp& net, const std::string& name) {
    auto slots = net.layout(name, off);
    out.insert(out.end(), slots.begin(), slots.end());
    off += net.parameter_count();
  };
  for (std::size_t i = 0; i < real_branches.size(); ++i) add(real_branches[i], "branch_re" + std::to_string(i));
  for (std::size_t i = 0; i < imag_branches.size(); ++i) add(imag_branches[i], "branch_im" + std::to_string(i));
  add(trunk, "trunk");
  out.push_back({"bias_re", off, 1, 1});
  out.push_back({"bias_im", off + 1, 1, 1});
  return out;
}

Eigen::VectorXd ComplexMIONetModel::pack() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index off = 0;
  for (const auto& b : real_branches) copy_into(flat, off, b);
  for (const auto& b : imag_branches) copy_into(flat, off, b);
  copy_into(flat, off, trunk);
  flat(off) = bias_re;
  flat(off + 1) = bias_im;
  return flat;
}

void ComplexMIONetModel::unpack(const Eigen::VectorXd& params) {
  if (params.size() != parameter_count()) {
    throw std::invalid_argument("complex mionet unpack: size mismatch");
  }
  Eigen::Index off = 0;
  for (auto& b : real_branches) copy_from(params, off, b);
  for (auto& b : imag_branches) copy_from(params, off, b);
  copy_from(params, off, trunk);
  bias_re = params(off);
  bias_im = params(off + 1);
}

// ---------------------------------------------------------------------------
// Shared batched engine

namespace detail {

struct BranchRef {
  const nn::Mlp* net;
  int channel;
  Eigen::Index offset;  // in the packed parameter vector
};

struct HeadRef {
  std::vector<BranchRef> branches;
  Eigen::Index bias_offset;
};

struct Wiring {
  std::vector<HeadRef> heads;
  const nn::Mlp* trunk;
  Eigen::Index trunk_offset;
  Eigen::Index parameter_count;
};

struct TapeData {
  std::vector<int> unique;             // distinct sample ids, ascending
  std::vector<int> position;           // batch column -> index into unique
  std::vector<std::vector<nn::MlpTape>> branch_tapes;  // [head][branch]
  std::vector<std::vector<Eigen::MatrixXd>> branch_out;  // p x U
  nn::MlpTape trunk_tape;
  Eigen::MatrixXd trunk_out;           // p x B
  std::vector<Eigen::MatrixXd> branch_product;  // per head, p x B
  Eigen::MatrixXd outputs;             // heads x B
};

Wiring wire(const MIONetModel& m) {
  m.validate();
  Wiring w;
  HeadRef head;
  Eigen::Index off = 0;
  for (std::size_t i = 0; i < m.branches.size(); ++i) {
    head.branches.push_back({&m.branches[i], static_cast<int>(i), off});
    off += m.branches[i].parameter_count();
  }
  w.trunk = &m.trunk;
  w.trunk_offset = off;
  off += m.trunk.parameter_count();
  head.bias_offset = off;
  w.heads.push_back(std::move(head));
  w.parameter_count = off + 1;
  return w;
}

Wiring wire(const ComplexMIONetModel& m) {
  m.validate();
  Wiring w;
  HeadRef re, im;
  Eigen::Index off = 0;
  for (std::size_t i = 0; i < m.real_branches.size(); ++i) {
    re.branches.push_back({&m.real_branches[i], static_cast<int>(2 * i), off});
    off += m.real_branches[i].parameter_count();
  }
  for (std::size_t i = 0; i < m.imag_branches.size(); ++i) {
    im.branches.push_back({&m.imag_branches[i], static_cast<int>(2 * i + 1), off});
    off += m.imag_branches[i].parameter_count();
  }
  w.trunk = &m.trunk;
  w.trunk_offset = off;
  off += m.trunk.parameter_count();
  re.bias_offset = off;
  im.bias_offset = off + 1;
  w.heads.push_back(std::move(re));
  w.heads.push_back(std::move(im));
  w.parameter_count = off + 2;
  return w;
}

std::vector<double> biases_of(const MIONetModel& m) { return {m.bias}; }
std::vector<double> biases_of(const ComplexMIONetModel& m) { return {m.bias_re, m.bias_im}; }

void run_forward(const Wiring& w, const std::vector<double>& biases, const ChannelInputs& inputs,
                 std::span<const int> sample, const Eigen::MatrixXd& locations, TapeData& t) {
  const auto batch = static_cast<Eigen::Index>(sample.size());
  if (batch == 0) throw std::invalid_argument("mionet: empty batch");
  if (locations.cols() != batch) {
    throw std::invalid_argument("mionet: locations and sample index counts differ");
  }
  if (locations.rows() != w.trunk->input_dim()) {
    std::ostringstream msg;
    msg << "mionet: trunk expects " << w.trunk->input_dim() << "-dim locations, got "
        << locations.rows();
    throw std::invalid_argument(msg.str());
  }

  t.unique.assign(sample.begin(), sample.end());
  std::sort(t.unique.begin(), t.unique.end());
  t.unique.erase(std::unique(t.unique.begin(), t.unique.end()), t.unique.end());
  t.position.resize(sample.size());
  for (std::size_t b = 0; b < sample.size(); ++b) {
    t.position[b] = static_cast<int>(
        std::lower_bound(t.unique.begin(), t.unique.end(), sample[b]) - t.unique.begin());
  }
  const auto n_unique = static_cast<Eigen::Index>(t.unique.size());

  const auto p = w.trunk->output_dim();
  t.branch_tapes.assign(w.heads.size(), {});
  t.branch_out.assign(w.heads.size(), {});
  for (std::size_t h = 0; h < w.heads.size(); ++h) {
    for (std::size_t i = 0; i < w.heads[h].branches.size(); ++i) {
      const auto& br = w.heads[h].branches[i];
      if (br.channel >= static_cast<int>(inputs.size())) {
        throw std::invalid_argument("mionet: no input channel for branch " + std::to_string(i));
      }
      const Eigen::MatrixXd& src = inputs[br.channel];
      if (src.rows() != br.net->input_dim()) {
        std::ostringstream msg;
        msg << "mionet: branch " << i << " expects " << br.net->input_dim()
            << " sensor values, channel " << br.channel << " has " << src.rows();
        throw std::invalid_argument(msg.str());
      }
      Eigen::MatrixXd x(src.rows(), n_unique);
      for (Eigen::Index u = 0; u < n_unique; ++u) {
        const int s = t.unique[u];
        if (s < 0 || s >= src.cols()) throw std::out_of_range("mionet: sample index out of range");
        x.col(u) = src.col(s);
      }
      t.branch_tapes[h].emplace_back();
      t.branch_out[h].push_back(br.net->forward_batch(x, t.branch_tapes[h].back()));
    }
  }

  t.trunk_out = w.trunk->forward_batch(locations, t.trunk_tape);

  t.branch_product.assign(w.heads.size(), Eigen::MatrixXd());
  t.outputs.resize(static_cast<Eigen::Index>(w.heads.size()), batch);
  for (std::size_t h = 0; h < w.heads.size(); ++h) {
    Eigen::MatrixXd prod = Eigen::MatrixXd::Ones(p, batch);
    for (const auto& out : t.branch_out[h]) {
      for (Eigen::Index b = 0; b < batch; ++b) prod.col(b).array() *= out.col(t.position[b]).array();
    }
    t.outputs.row(static_cast<Eigen::Index>(h)) =
        (prod.array() * t.trunk_out.array()).colwise().sum() + biases[h];
    t.branch_product[h] = std::move(prod);
  }
  if (!t.outputs.allFinite()) throw std::runtime_error("mionet: non-finite output");
}

Eigen::VectorXd run_backward(const Wiring& w, const TapeData& t, const Eigen::MatrixXd& upstream) {
  const auto batch = t.trunk_out.cols();
  if (upstream.rows() != static_cast<Eigen::Index>(w.heads.size()) || upstream.cols() != batch) {
    throw std::invalid_argument("mionet backward: upstream must be heads x batch");
  }
  const auto p = t.trunk_out.rows();
  const auto n_unique = static_cast<Eigen::Index>(t.unique.size());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(w.parameter_count);
  Eigen::MatrixXd d_trunk = Eigen::MatrixXd::Zero(p, batch);

  for (std::size_t h = 0; h < w.heads.size(); ++h) {
    const auto hh = static_cast<Eigen::Index>(h);
    const auto& head = w.heads[h];
    const Eigen::RowVectorXd g = upstream.row(hh);
    d_trunk += (t.branch_product[h].array().rowwise() * g.array()).matrix();
    grad(head.bias_offset) = g.sum();

    // g_b * T_b, shared by every branch of this head
    const Eigen::MatrixXd gt = (t.trunk_out.array().rowwise() * g.array()).matrix();
    for (std::size_t i = 0; i < head.branches.size(); ++i) {
      Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(p, n_unique);
      for (Eigen::Index b = 0; b < batch; ++b) {
        Eigen::ArrayXd others = gt.col(b).array();
        for (std::size_t k = 0; k < head.branches.size(); ++k) {
          if (k != i) others *= t.branch_out[h][k].col(t.position[b]).array();
        }
        d_out.col(t.position[b]).array() += others;
      }
      const auto& br = head.branches[i];
      const auto bg = br.net->backward(t.branch_tapes[h][i], d_out);
      bg.pack(std::span<double>(grad.data() + br.offset,
                                static_cast<std::size_t>(br.net->parameter_count())));
    }
  }
  const auto tg = w.trunk->backward(t.trunk_tape, d_trunk);
  tg.pack(std::span<double>(grad.data() + w.trunk_offset,
                            static_cast<std::size_t>(w.trunk->parameter_count())));
  if (!grad.allFinite()) throw std::runtime_error("mionet backward: non-finite gradient");
  return grad;
}

}  // namespace detail

BatchEvaluation::BatchEvaluation(const MIONetModel& model, const ChannelInputs& inputs,
                                 std::span<const int> sample, const Eigen::MatrixXd& locations)
    : wiring_(std::make_unique<detail::Wiring>(detail::wire(model))),
      tape_(std::make_unique<detail::TapeData>()) {
  detail::run_forward(*wiring_, detail::biases_of(model), inputs, sample, locations, *tape_);
}

BatchEvaluation::BatchEvaluation(const ComplexMIONetModel& model, const ChannelInputs& inputs,
                                 std::span<const int> sample, const Eigen::MatrixXd& locations)
    : wiring_(std::make_unique<detail::Wiring>(detail::wire(model))),
      tape_(std::make_unique<detail::TapeData>()) {
  detail::run_forward(*wiring_, detail::biases_of(model), inputs, sample, locations, *tape_);
}

BatchEvaluation::~BatchEvaluation() = default;
BatchEvaluation::BatchEvaluation(BatchEvaluation&&) noexcept = default;
BatchEvaluation& BatchEvaluation::operator=(BatchEvaluation&&) noexcept = default;

const Eigen::MatrixXd& BatchEvaluation::outputs() const { return tape_->outputs; }

Eigen::VectorXd BatchEvaluation::backward(const Eigen::MatrixXd& upstream) const {
  return detail::run_backward(*wiring_, *tape_, upstream);
}

// ---------------------------------------------------------------------------
// Convenience entry points

namespace {

ChannelInputs as_columns(std::span<const Eigen::VectorXd> sensors) {
  ChannelInputs in;
  for (const auto& v : sensors) in.push_back(Eigen::MatrixXd(v));
  return in;
}

template <typename Model>
LossAndGradient mse_gradients(const Model& model, const ChannelInputs& inputs, const Batch& batch) {
  if (batch.sample.empty()) throw std::invalid_argument("mionet gradients: empty batch");
  BatchEvaluation eval(model, inputs, batch.sample, batch.locations);
  if (batch.targets.rows() != eval.outputs().rows() || batch.targets.cols() != eval.outputs().cols()) {
    throw std::invalid_argument("mionet gradients: targets must be heads x batch");
  }
  const Eigen::MatrixXd residual = eval.outputs() - batch.targets;
  const double scale = 1.0 / static_cast<double>(batch.sample.size());
  LossAndGradient out;
  out.loss = residual.squaredNorm() * scale;
  if (!std::isfinite(out.loss)) throw std::runtime_error("mionet gradients: non-finite loss");
  out.gradient = eval.backward(2.0 * scale * residual);
  return out;
}

}  // namespace

double mionet_forward(const MIONetModel& model, std::span<const Eigen::VectorXd> sensors,
                      const Eigen::VectorXd& y) {
  if (static_cast<int>(sensors.size()) != model.branch_count()) {
    throw std::invalid_argument("mionet_forward: got " + std::to_string(sensors.size()) +
                                " sensor vectors for " + std::to_string(model.branch_count()) +
                                " branches");
  }
  const int zero = 0;
  BatchEvaluation eval(model, as_columns(sensors), std::span<const int>(&zero, 1),
                       Eigen::MatrixXd(y));
  return eval.outputs()(0, 0);
}

std::pair<double, double> complex_mionet_forward(const ComplexMIONetModel& model,
                                                 std::span<const Eigen::VectorXd> sensors,
                                                 const Eigen::VectorXd& y) {
  if (static_cast<int>(sensors.size()) != model.channel_count()) {
    throw std::invalid_argument("complex_mionet_forward: got " + std::to_string(sensors.size()) +
                                " sensor vectors for " + std::to_string(model.channel_count()) +
                                " branch inputs");
  }
  const int zero = 0;
  BatchEvaluation eval(model, as_columns(sensors), std::span<const int>(&zero, 1),
                       Eigen::MatrixXd(y));
  return {eval.outputs()(0, 0), eval.outputs()(1, 0)};
}

LossAndGradient mionet_gradients(const MIONetModel& model, const ChannelInputs& inputs,
                                 const Batch& batch) {
  return mse_gradients(model, inputs, batch);
}

LossAndGradient complex_mionet_gradients(const ComplexMIONetModel& model,
                                         const ChannelInputs& inputs, const Batch& batch) {
  return mse_gradients(model, inputs, batch);
}

LossAndGradient model_gradients(const OperatorModel& model, const ChannelInputs& inputs,
                                const Batch& batch) {
  return std::visit([&](const auto& m) { return mse_gradients(m, inputs, batch); }, model);
}

Eigen::MatrixXd predict_field(const OperatorModel& model, std::span<const Eigen::VectorXd> sensors,
                              const Eigen::MatrixXd& locations) {
  return std::visit(
      [&](const auto& m) -> Eigen::MatrixXd {
        if (static_cast<int>(sensors.size()) != m.channel_count()) {
          throw std::invalid_argument("predict: got " + std::to_string(sensors.size()) +
                                      " input functions, model expects " +
                                      std::to_string(m.channel_count()));
        }
        const auto cols = locations.cols();
        if (cols == 0) return Eigen::MatrixXd(m.head_count(), 0);
        if (locations.rows() != m.trunk.input_dim()) {
          throw std::invalid_argument("predict: trunk expects " + std::to_string(m.trunk.input_dim()) +
                                      "-dim locations, got " + std::to_string(locations.rows()));
        }
        // Branches run once; every location then goes through the trunk as its own column,
        // which is the arithmetic of a single-point forward pass.
        const ChannelInputs inputs = as_columns(sensors);
        const detail::Wiring w = detail::wire(m);
        const std::vector<double> biases = detail::biases_of(m);
        const auto p = m.trunk.output_dim();
        std::vector<Eigen::MatrixXd> products;
        for (const auto& head : w.heads) {
          Eigen::MatrixXd prod = Eigen::MatrixXd::Ones(p, 1);
          for (const auto& br : head.branches) {
            const Eigen::MatrixXd& src = inputs[static_cast<std::size_t>(br.channel)];
            if (src.rows() != br.net->input_dim()) {
              throw std::invalid_argument("predict: branch expects " + std::to_string(br.net->input_dim()) +
                                          " sensor values, got " + std::to_string(src.rows()));
            }
            prod.col(0).array() *= br.net->forward_batch(src).col(0).array();
          }
          products.push_back(std::move(prod));
        }
        Eigen::MatrixXd out(m.head_count(), cols);
        for (Eigen::Index k = 0; k < cols; ++k) {
          const Eigen::MatrixXd trunk = m.trunk.forward_batch(Eigen::MatrixXd(locations.col(k)));
          for (std::size_t h = 0; h < products.size(); ++h) {
            out(static_cast<Eigen::Index>(h), k) =
                ((products[h].array() * trunk.array()).colwise().sum() + biases[h])(0, 0);
          }
        }
        if (!out.allFinite()) throw std::runtime_error("predict: non-finite output");
        return out;
      },
      model);
}

Eigen::Index parameter_count(const OperatorModel& model) {
  return std::visit([](const auto& m) { return m.parameter_count(); }, model);
}

Eigen::VectorXd pack(const OperatorModel& model) {
  return std::visit([](const auto& m) { return m.pack(); }, model);
}

void unpack(OperatorModel& model, const Eigen::VectorXd& params) {
  std::visit([&](auto& m) { m.unpack(params); }, model);
}

nn::ParamLayout layout(const OperatorModel& model) {
  return std::visit([](const auto& m) { return m.layout(); }, model);
}

int head_count(const OperatorModel& model) {
  return std::visit([](const auto& m) { return m.head_count(); }, model);
}

int channel_count(const OperatorModel& model) {
  return std::visit([](const auto& m) { return m.channel_count(); }, model);
}

int trunk_input_dim(const OperatorModel& model) {
  return std::visit([](const auto& m) { return m.trunk.input_dim(); }, model);
}

// ---------------------------------------------------------------------------
// Checkpoint

namespace {

constexpr int kModelSchemaVersion = 1;

}  // namespace

void save_model(const OperatorModel& model, const std::filesystem::path& dir) {
  using nlohmann::json;
  std::filesystem::create_directories(dir);
  const Eigen::VectorXd flat = pack(model);
  json networks = json::array();
  json biases = json::array();
  std::string variant;
  int n = 0;
  int p = 0;
  std::vector<int> sensors;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        std::size_t off = 0;
        auto add = [&](const nn::Mlp& net, const std::string& name) {
          networks.push_back(nn::network_manifest(net, name, off));
          off += static_cast<std::size_t>(net.parameter_count()) * sizeof(double);
        };
        if constexpr (std::is_same_v<T, MIONetModel>) {
          variant = "real";
          n = m.branch_count();
          for (int i = 0; i < n; ++i) add(m.branches[i], "branch" + std::to_string(i));
          add(m.trunk, "trunk");
          biases.push_back({{"name", "bias"}, {"byte_offset", off}});
        } else {
          variant = "complex-split";
          n = m.function_count();
          for (int i = 0; i < n; ++i) add(m.real_branches[i], "branch_re" + std::to_string(i));
          for (int i = 0; i < n; ++i) add(m.imag_branches[i], "branch_im" + std::to_string(i));
          add(m.trunk, "trunk");
          biases.push_back({{"name", "bias_re"}, {"byte_offset", off}});
          biases.push_back({{"name", "bias_im"}, {"byte_offset", off + sizeof(double)}});
        }
        p = m.latent_dim();
        sensors = m.sensor_counts();
      },
      model);
  const std::span<const double> blob(flat.data(), static_cast<std::size_t>(flat.size()));
  json manifest = {{"format", "oplearn-mionet"},
                   {"schema_version", kModelSchemaVersion},
                   {"variant", variant},
                   {"n", n},
                   {"p", p},
                   {"sensor_counts", sensors},
                   {"dtype", "float64-le"},
                   {"blob", "params.bin"},
                   {"checksum", fnv1a_hex(blob)},
                   {"networks", networks},
                   {"biases", biases}};
  write_f64_blob(dir / "params.bin", blob);
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

OperatorModel load_model(const std::filesystem::path& dir) {
  using nlohmann::json;
  if (!std::filesystem::exists(dir / "manifest.json")) {
    throw std::runtime_error("no model checkpoint at " + dir.string());
  }
  const json manifest = json::parse(read_text(dir / "manifest.json"));
  if (manifest.at("format").get<std::string>() != "oplearn-mionet") {
    throw std::runtime_error("checkpoint at " + dir.string() + " is not a MIONet checkpoint");
  }
  if (manifest.at("schema_version").get<int>() != kModelSchemaVersion) {
    throw std::runtime_error("unsupported model schema_version " +
                             manifest.at("schema_version").dump());
  }
  const auto& nets = manifest.at("networks");
  const int n = manifest.at("n").get<int>();
  OperatorModel model;
  const std::string variant = manifest.at("variant").get<std::string>();
  if (variant == "real") {
    MIONetModel m;
    for (int i = 0; i < n; ++i) m.branches.push_back(nn::network_from_manifest(nets.at(i)));
    m.trunk = nn::network_from_manifest(nets.at(n));
    model = std::move(m);
  } else if (variant == "complex-split") {
    ComplexMIONetModel m;
    for (int i = 0; i < n; ++i) m.real_branches.push_back(nn::network_from_manifest(nets.at(i)));
    for (int i = 0; i < n; ++i) m.imag_branches.push_back(nn::network_from_manifest(nets.at(n + i)));
    m.trunk = nn::network_from_manifest(nets.at(2 * n));
    model = std::move(m);
  } else {
    throw std::runtime_error("unknown model variant '" + variant + "'");
  }
  const auto blob = read_f64_blob(dir / manifest.at("blob").get<std::string>());
  if (static_cast<Eigen::Index>(blob.size()) != parameter_count(model)) {
    throw std::runtime_error("model checkpoint blob is truncated");
  }
  if (fnv1a_hex(std::span<const double>(blob)) != manifest.at("checksum").get<std::string>()) {
    throw std::runtime_error("model checkpoint checksum mismatch");
  }
  unpack(model, Eigen::Map<const Eigen::VectorXd>(blob.data(), static_cast<Eigen::Index>(blob.size())));
  std::visit([](const auto& m) { m.validate(); }, model);
  return model;
}

}  // namespace oplearn
