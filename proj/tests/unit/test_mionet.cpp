#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oplearn/mionet.hpp"

using namespace oplearn;

namespace {

// Network whose output is the constant `value` for every input (zero weights, last bias set).
nn::Mlp constant_net(int input_dim, double value) {
  nn::Mlp net({input_dim, 1, 1});
  net.biases().back()(0) = value;
  return net;
}

Eigen::Index slot_offset(const nn::ParamLayout& layout, const std::string& name) {
  for (const auto& s : layout)
    if (s.name == name) return s.offset;
  throw std::runtime_error("no slot " + name);
}

MIONetModel random_model(std::mt19937_64& rng, int n, int p) {
  std::uniform_int_distribution<int> width(2, 6), sensors(1, 4);
  std::vector<std::vector<int>> branches;
  for (int i = 0; i < n; ++i) branches.push_back({sensors(rng), width(rng), p});
  MIONetModel m = MIONetModel::glorot(branches, {2, width(rng), width(rng), p}, rng);
  m.bias = 0.3;
  for (auto& b : m.branches)
    for (auto& v : b.biases()) v.setRandom();
  for (auto& v : m.trunk.biases()) v.setRandom();
  return m;
}

ChannelInputs random_inputs(const std::vector<int>& counts, int samples) {
  ChannelInputs in;
  for (int c : counts) in.push_back(Eigen::MatrixXd::Random(c, samples));
  return in;
}

Batch random_batch(int samples, int heads, int size, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, samples - 1);
  Batch b;
  for (int k = 0; k < size; ++k) b.sample.push_back(pick(rng));
  b.locations = Eigen::MatrixXd::Random(2, size);
  b.targets = Eigen::MatrixXd::Random(heads, size);
  return b;
}

template <typename Model>
double loss_at(Model m, const Eigen::VectorXd& params, const ChannelInputs& in, const Batch& b) {
  m.unpack(params);
  return model_gradients(OperatorModel(m), in, b).loss;
}

template <typename Model>
double max_fd_error(const Model& model, const ChannelInputs& in, const Batch& b) {
  const LossAndGradient lg = model_gradients(OperatorModel(model), in, b);
  const Eigen::VectorXd p = model.pack();
  // fourth-order central stencil keeps truncation and roundoff well below the tolerance
  const double h = 1e-3;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    auto at = [&](double s) {
      Eigen::VectorXd q = p;
      q(k) += s;
      return loss_at(model, q, in, b);
    };
    const double fd = (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
    worst = std::max(worst, std::abs(fd - lg.gradient(k)) / std::max(std::abs(fd), 1e-6));
  }
  return worst;
}

}  // namespace

TEST_CASE("forward with stub networks") {
  MIONetModel m;
  m.branches = {constant_net(3, 2.0), constant_net(2, 3.0)};
  m.trunk = constant_net(2, 4.0);
  m.bias = 1.0;
  const std::vector<Eigen::VectorXd> s{Eigen::Vector3d(1, 2, 3), Eigen::Vector2d(-1, 1)};
  CHECK(mionet_forward(m, s, Eigen::Vector2d(0.3, 0.7)) == 25.0);

  ComplexMIONetModel c;
  c.real_branches = {constant_net(2, 1.0)};
  c.imag_branches = {constant_net(2, 2.0)};
  c.trunk = constant_net(2, 3.0);
  const std::vector<Eigen::VectorXd> cs{Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 1)};
  const auto [re, im] = complex_mionet_forward(c, cs, Eigen::Vector2d(0.1, 0.2));
  CHECK(re == 3.0);
  CHECK(im == 6.0);
}

TEST_CASE("zero branches give the bias") {
  std::mt19937_64 rng(2);
  MIONetModel m = random_model(rng, 2, 4);
  for (auto& b : m.branches) {
    for (auto& w : b.weights()) w.setZero();
    for (auto& v : b.biases()) v.setZero();
  }
  m.bias = -0.75;
  const std::vector<Eigen::VectorXd> s{Eigen::VectorXd::Random(m.branches[0].input_dim()),
                                       Eigen::VectorXd::Random(m.branches[1].input_dim())};
  CHECK(mionet_forward(m, s, Eigen::Vector2d(0.5, 0.5)) == -0.75);

  ComplexMIONetModel c;
  c.real_branches = {nn::Mlp({2, 3, 4})};
  c.imag_branches = {nn::Mlp({2, 3, 4})};
  c.trunk = nn::Mlp::glorot({2, 3, 4}, rng);
  c.bias_re = 0.25;
  c.bias_im = -2.0;
  const std::vector<Eigen::VectorXd> cs{Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)};
  const auto [re, im] = complex_mionet_forward(c, cs, Eigen::Vector2d(0.0, 1.0));
  CHECK(re == 0.25);
  CHECK(im == -2.0);
}

TEST_CASE("single branch is the DeepONet inner product") {
  std::mt19937_64 rng(4);
  const MIONetModel m = random_model(rng, 1, 5);
  const Eigen::VectorXd v = Eigen::VectorXd::Random(m.branches[0].input_dim());
  const Eigen::Vector2d y(0.2, -0.4);
  const double deeponet = m.branches[0].forward(v).dot(m.trunk.forward(y)) + m.bias;
  const std::vector<Eigen::VectorXd> s{v};
  CHECK(mionet_forward(m, s, y) == doctest::Approx(deeponet).epsilon(1e-14));
}

TEST_CASE("forward rejects wrong arity and dims") {
  std::mt19937_64 rng(5);
  const MIONetModel m = random_model(rng, 2, 3);
  const std::vector<Eigen::VectorXd> one{Eigen::VectorXd::Zero(m.branches[0].input_dim())};
  CHECK_THROWS_AS(mionet_forward(m, one, Eigen::Vector2d::Zero()), std::invalid_argument);
  const std::vector<Eigen::VectorXd> wrong{Eigen::VectorXd::Zero(9), Eigen::VectorXd::Zero(9)};
  CHECK_THROWS_AS(mionet_forward(m, wrong, Eigen::Vector2d::Zero()), std::invalid_argument);
  CHECK_THROWS_AS(MIONetModel::glorot({{2, 3, 4}}, {2, 3, 5}, rng), std::invalid_argument);
}

TEST_CASE("branch permutation symmetry") {
  std::mt19937_64 rng(6);
  const MIONetModel m = random_model(rng, 3, 4);
  std::vector<Eigen::VectorXd> s;
  for (const auto& b : m.branches) s.push_back(Eigen::VectorXd::Random(b.input_dim()));
  MIONetModel swapped = m;
  std::swap(swapped.branches[0], swapped.branches[2]);
  std::vector<Eigen::VectorXd> s2 = s;
  std::swap(s2[0], s2[2]);
  const Eigen::Vector2d y(0.1, 0.9);
  CHECK(mionet_forward(m, s, y) == doctest::Approx(mionet_forward(swapped, s2, y)).epsilon(1e-14));
}

TEST_CASE("stub product-rule gradient") {
  MIONetModel m;
  m.branches = {constant_net(1, 2.0), constant_net(1, 3.0)};
  m.trunk = constant_net(2, 4.0);
  m.bias = 1.0;
  const ChannelInputs in{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)};
  Batch b{{0}, Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Constant(1, 1, 24.0)};
  const LossAndGradient lg = mionet_gradients(m, in, b);
  CHECK(lg.loss == 1.0);
  const auto layout = m.layout();
  // d/d(out) of (out - 24)^2 is 2; the output-bias slots see the products of the other factors.
  CHECK(lg.gradient(slot_offset(layout, "branch0.layer1.bias")) == 2.0 * 3.0 * 4.0);
  CHECK(lg.gradient(slot_offset(layout, "branch1.layer1.bias")) == 2.0 * 2.0 * 4.0);
  CHECK(lg.gradient(slot_offset(layout, "trunk.layer1.bias")) == 2.0 * 2.0 * 3.0);
  CHECK(lg.gradient(slot_offset(layout, "bias")) == 2.0);

  b.targets(0, 0) = 25.0;
  CHECK(mionet_gradients(m, in, b).gradient.isZero(0.0));
}

TEST_CASE("bias derivative is one") {
  std::mt19937_64 rng(7);
  const MIONetModel m = random_model(rng, 2, 3);
  const ChannelInputs in = random_inputs(m.sensor_counts(), 4);
  const Batch b = random_batch(4, 1, 6, rng);
  BatchEvaluation ev(m, in, b.sample, b.locations);
  for (int k = 0; k < 6; ++k) {
    Eigen::MatrixXd up = Eigen::MatrixXd::Zero(1, 6);
    up(0, k) = 1.0;
    CHECK(ev.backward(up)(m.parameter_count() - 1) == 1.0);
  }
}

TEST_CASE("gradients match central differences on random small models") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> n(1, 3), p(1, 4);
  for (int trial = 0; trial < 20; ++trial) {
    const MIONetModel m = random_model(rng, n(rng), p(rng));
    const ChannelInputs in = random_inputs(m.sensor_counts(), 3);
    CHECK(max_fd_error(m, in, random_batch(3, 1, 5, rng)) < 1e-6);

    std::vector<std::vector<int>> dims;
    const int latent = p(rng);
    for (int i = 0, fn = n(rng); i < fn; ++i) dims.push_back({2 + i, 3, latent});
    ComplexMIONetModel c = ComplexMIONetModel::glorot(dims, {2, 4, latent}, rng);
    c.bias_re = 0.1;
    c.bias_im = -0.2;
    const ChannelInputs cin = random_inputs(c.sensor_counts(), 3);
    const double cerr = max_fd_error(c, cin, random_batch(3, 2, 5, rng));
    INFO("complex trial " << trial << " error " << cerr);
    CHECK(cerr < 1e-6);
  }
}

TEST_CASE("complex heads are independent and share the trunk") {
  std::mt19937_64 rng(8);
  ComplexMIONetModel c = ComplexMIONetModel::glorot({{3, 4, 5}}, {2, 4, 5}, rng);
  const std::vector<Eigen::VectorXd> s{Eigen::VectorXd::Random(3), Eigen::VectorXd::Random(3)};
  const Eigen::Vector2d y(0.3, 0.6);
  const auto before = complex_mionet_forward(c, s, y);
  ComplexMIONetModel perturbed = c;
  perturbed.imag_branches[0].weights()[0].array() += 0.5;
  const auto after = complex_mionet_forward(perturbed, s, y);
  CHECK(after.first == before.first);
  CHECK(after.second != before.second);

  // trunk gradient from both heads equals the sum of per-head gradients
  const ChannelInputs in = random_inputs(c.sensor_counts(), 2);
  const Batch b = random_batch(2, 2, 4, rng);
  BatchEvaluation ev(c, in, b.sample, b.locations);
  Eigen::MatrixXd up_re = Eigen::MatrixXd::Zero(2, 4), up_im = up_re;
  up_re.row(0).setOnes();
  up_im.row(1).setOnes();
  const Eigen::VectorXd both = ev.backward(up_re + up_im);
  const Eigen::VectorXd sum = ev.backward(up_re) + ev.backward(up_im);
  CHECK((both - sum).cwiseAbs().maxCoeff() < 1e-12);
  const auto layout = c.layout();
  const Eigen::Index t0 = slot_offset(layout, "trunk.layer0.weight");
  CHECK(ev.backward(up_re).segment(t0, 8).norm() > 0.0);
  CHECK(ev.backward(up_im).segment(t0, 8).norm() > 0.0);
}

TEST_CASE("full-batch gradient is the mean of single-example gradients") {
  std::mt19937_64 rng(10);
  const MIONetModel m = random_model(rng, 2, 3);
  const ChannelInputs in = random_inputs(m.sensor_counts(), 3);
  const Batch b = random_batch(3, 1, 5, rng);
  const LossAndGradient full = mionet_gradients(m, in, b);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(full.gradient.size());
  for (int k = 0; k < 5; ++k) {
    Batch one{{b.sample[k]}, b.locations.col(k), b.targets.col(k)};
    mean += mionet_gradients(m, in, one).gradient / 5.0;
  }
  CHECK((full.gradient - mean).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("cached prediction equals per-point evaluation bitwise") {
  std::mt19937_64 rng(11);
  const MIONetModel m = random_model(rng, 2, 6);
  std::vector<Eigen::VectorXd> s;
  for (const auto& b : m.branches) s.push_back(Eigen::VectorXd::Random(b.input_dim()));
  const Eigen::MatrixXd locs = Eigen::MatrixXd::Random(2, 5000);
  const Eigen::MatrixXd cached = predict_field(OperatorModel(m), s, locs);
  for (Eigen::Index k = 0; k < locs.cols(); ++k) {
    const double naive = mionet_forward(m, s, locs.col(k));
    if (cached(0, k) != naive) {
      FAIL_CHECK("mismatch at " << k << ": " << cached(0, k) << " vs " << naive);
      break;
    }
  }

  ComplexMIONetModel c = ComplexMIONetModel::glorot({{3, 4, 5}, {2, 4, 5}}, {2, 4, 5}, rng);
  std::vector<Eigen::VectorXd> cs;
  for (int n : c.sensor_counts()) cs.push_back(Eigen::VectorXd::Random(n));
  const Eigen::MatrixXd cc = predict_field(OperatorModel(c), cs, locs.leftCols(100));
  for (Eigen::Index k = 0; k < 100; ++k) {
    const auto [re, im] = complex_mionet_forward(c, cs, locs.col(k));
    CHECK(cc(0, k) == re);
    CHECK(cc(1, k) == im);
  }
  CHECK_THROWS_AS(predict_field(OperatorModel(m), cs, locs), std::invalid_argument);
}

TEST_CASE("model checkpoint round trip") {
  std::mt19937_64 rng(12);
  const auto dir = std::filesystem::temp_directory_path() / "oplearn_mionet_ckpt";
  std::filesystem::remove_all(dir);
  const OperatorModel m = random_model(rng, 3, 4);
  save_model(m, dir);
  CHECK(std::get<MIONetModel>(load_model(dir)) == std::get<MIONetModel>(m));
  const OperatorModel c = ComplexMIONetModel::glorot({{3, 4, 5}}, {2, 4, 5}, rng);
  save_model(c, dir / "c");
  CHECK(std::get<ComplexMIONetModel>(load_model(dir / "c")) == std::get<ComplexMIONetModel>(c));
  CHECK_THROWS_AS(load_model(dir / "missing"), std::runtime_error);
  std::filesystem::remove_all(dir);
}
