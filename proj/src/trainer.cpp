#include "oplearn/trainer.hpp"

#include <array>
#include <limits>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "oplearn/families.hpp"

namespace oplearn {

namespace {

constexpr std::uint64_t kModelStream = 3;
constexpr std::uint64_t kBatchStream = 4;
constexpr std::uint64_t kPhysicsStream = 5;

// Finite-difference stencil in units of h over (x1, x2, t).
using Offset = std::array<int, 3>;

enum Deriv { kU, kUx, kUxx, kUxxx, kUt, kUtt, kUy, kUyy, kDerivCount };

struct Stencil {
  std::vector<Offset> offsets;
  // per derivative: (stencil index, coefficient)
  std::array<std::vector<std::pair<int, double>>, kDerivCount> weights;
};

Stencil make_stencil(const PdeSpec& pde, double h) {
  Stencil s;
  auto index = [&](Offset o) {
    for (std::size_t i = 0; i < s.offsets.size(); ++i)
      if (s.offsets[i] == o) return static_cast<int>(i);
    s.offsets.push_back(o);
    return static_cast<int>(s.offsets.size() - 1);
  };
  auto axis = [](int a, int k) {
    Offset o{0, 0, 0};
    o[static_cast<std::size_t>(a)] = k;
    return o;
  };
  const int c = index({0, 0, 0});
  s.weights[kU] = {{c, 1.0}};
  auto first = [&](Deriv d, int a) {
    s.weights[d] = {{index(axis(a, 1)), 0.5 / h}, {index(axis(a, -1)), -0.5 / h}};
  };
  auto second = [&](Deriv d, int a) {
    s.weights[d] = {{index(axis(a, 1)), 1.0 / (h * h)}, {c, -2.0 / (h * h)}, {index(axis(a, -1)), 1.0 / (h * h)}};
  };
  const double h3 = h * h * h;
  switch (pde.equation) {
    case Equation::Wave1d:
      second(kUxx, 0);
      second(kUtt, 2);
      break;
    case Equation::Wave2d:
      second(kUxx, 0);
      second(kUyy, 1);
      second(kUtt, 2);
      break;
    case Equation::Burgers:
      first(kUx, 0);
      second(kUxx, 0);
      first(kUt, 2);
      break;
    case Equation::Kdv:
      first(kUx, 0);
      first(kUt, 2);
      s.weights[kUxxx] = {{index(axis(0, 2)), 0.5 / h3},
                          {index(axis(0, 1)), -1.0 / h3},
                          {index(axis(0, -1)), 1.0 / h3},
                          {index(axis(0, -2)), -0.5 / h3}};
      break;
    case Equation::Schrodinger:
      throw std::invalid_argument("physics residual: complex models are not supported");
  }
  return s;
}

// Residual R(D) - f and its partials with respect to each derivative value.
double residual_and_partials(const PdeSpec& pde, const std::array<double, kDerivCount>& D, double f,
                             std::array<double, kDerivCount>& dR) {
  dR.fill(0.0);
  switch (pde.equation) {
    case Equation::Wave1d:
      dR[kUtt] = 1.0;
      dR[kUxx] = -1.0;
      return D[kUtt] - D[kUxx] - f;
    case Equation::Wave2d:
      dR[kUtt] = 1.0;
      dR[kUxx] = -1.0;
      dR[kUyy] = -1.0;
      return D[kUtt] - D[kUxx] - D[kUyy] - f;
    case Equation::Burgers:
      dR[kUt] = 1.0;
      dR[kU] = -D[kUx];
      dR[kUx] = -D[kU];
      dR[kUxx] = -pde.viscosity;
      return D[kUt] - D[kU] * D[kUx] - pde.viscosity * D[kUxx] - f;
    case Equation::Kdv:
      dR[kUt] = 1.0;
      dR[kU] = 6.0 * D[kUx];
      dR[kUx] = 6.0 * D[kU];
      dR[kUxxx] = 1.0;
      return D[kUt] + 6.0 * D[kU] * D[kUx] + D[kUxxx] - f;
    case Equation::Schrodinger:
      break;
  }
  throw std::invalid_argument("physics residual: complex models are not supported");
}

std::vector<std::vector<int>> branch_dims(const ExperimentConfig& cfg) {
  std::vector<std::vector<int>> dims;
  for (int i = 0; i < cfg.initial_function_count(); ++i) dims.push_back(cfg.branch_dims_initial());
  if (cfg.use_source_branch) dims.push_back(cfg.branch_dims_source());
  return dims;
}

}  // namespace

TrainConfig TrainConfig::from(const ExperimentConfig& cfg) {
  TrainConfig t;
  t.iterations = cfg.iterations;
  t.batch_size = cfg.batch_size;
  t.schedule = nn::LrSchedule{cfg.lr, cfg.lr_step, cfg.lr_decay};
  t.eval_every = cfg.eval_every;
  t.seed = cfg.seed;
  t.physics = PhysicsConfig{cfg.physics_weight, cfg.physics_points, cfg.physics_fd_step};
  return t;
}

void write_history_csv(const TrainHistory& history, std::ostream& out) {
  out << "iteration,loss,rel_l2,rel_l1,max_err\n" << std::setprecision(17);
  for (const auto& r : history.records) {
    out << r.iteration << ',' << r.loss << ',' << r.rel_l2 << ',' << r.rel_l1 << ',' << r.max_err << '\n';
  }
}

double data_loss(const OperatorModel& model, const ChannelInputs& inputs, const Batch& batch) {
  if (batch.sample.empty()) throw std::invalid_argument("data_loss: empty batch");
  const Eigen::MatrixXd out = std::visit(
      [&](const auto& m) { return BatchEvaluation(m, inputs, batch.sample, batch.locations).outputs(); }, model);
  if (out.rows() != batch.targets.rows() || out.cols() != batch.targets.cols()) {
    throw std::invalid_argument("data_loss: targets do not match the model heads");
  }
  const double loss = (out - batch.targets).squaredNorm() / static_cast<double>(batch.sample.size());
  if (!std::isfinite(loss)) throw std::runtime_error("data_loss: loss is not finite");
  return loss;
}

OperatorModel make_model(const ExperimentConfig& cfg) {
  std::mt19937_64 rng(derive_seed(cfg.seed, kModelStream));
  const auto dims = branch_dims(cfg);
  if (case_pde(cfg.case_id).complex) return ComplexMIONetModel::glorot(dims, cfg.trunk_dims(), rng);
  return MIONetModel::glorot(dims, cfg.trunk_dims(), rng);
}

Batch draw_batch(const OperatorDataset& ds, int batch_size, std::mt19937_64& rng) {
  const Eigen::Index N = ds.size(), P = ds.layout.P();
  if (N == 0 || P == 0) throw std::invalid_argument("draw_batch: empty dataset");
  const bool complex = ds.is_complex();
  std::uniform_int_distribution<Eigen::Index> pick_n(0, N - 1), pick_j(0, P - 1);
  Batch b;
  b.sample.resize(static_cast<std::size_t>(batch_size));
  b.locations.resize(ds.layout.outputs.rows(), batch_size);
  b.targets.resize(complex ? 2 : 1, batch_size);
  for (int k = 0; k < batch_size; ++k) {
    const Eigen::Index n = pick_n(rng);
    const Eigen::Index j = pick_j(rng);
    b.sample[static_cast<std::size_t>(k)] = static_cast<int>(n);
    b.locations.col(k) = ds.layout.outputs.col(j);
    if (complex) {
      b.targets(0, k) = ds.u(n, 2 * j);
      b.targets(1, k) = ds.u(n, 2 * j + 1);
    } else {
      b.targets(0, k) = ds.u(n, j);
    }
  }
  return b;
}

PhysicsPoints make_physics_points(const OperatorDataset& ds, const PhysicsConfig& physics, std::mt19937_64& rng) {
  const auto& cfg = ds.config;
  PhysicsPoints pts;
  pts.pde = PdeSpec::make(case_pde(cfg.case_id).equation, cfg.viscosity);
  if (pts.pde.complex) throw std::invalid_argument("physics residual: complex models are not supported");
  if (physics.points < 1 || !(physics.fd_step > 0.0)) {
    throw std::invalid_argument("physics residual: need Q >= 1 and h > 0");
  }
  if (ds.size() == 0) throw std::invalid_argument("physics residual: empty dataset");
  pts.fd_step = physics.fd_step;
  const int d = cfg.spatial_dim();
  const double h = physics.fd_step;
  const int rx = pts.pde.equation == Equation::Kdv ? 2 : 1;
  // Clamped stencils: points are drawn inside the region where every stencil node fits.
  const double lo = cfg.domain_of_interest[0] + rx * h, hi = cfg.domain_of_interest[1] - rx * h;
  const double t_lo = h, t_hi = cfg.time_horizon - h;
  if (!(lo < hi) || !(t_lo < t_hi)) throw std::invalid_argument("physics residual: fd_step too large for the domain");
  std::uniform_int_distribution<int> pick_n(0, static_cast<int>(ds.size()) - 1);
  std::uniform_real_distribution<double> ux(lo, hi), ut(t_lo, t_hi);
  pts.sample.resize(static_cast<std::size_t>(physics.points));
  pts.locations.resize(d + 1, physics.points);
  pts.f.resize(physics.points);
  for (int q = 0; q < physics.points; ++q) {
    const int n = pick_n(rng);
    SpaceTimePoint p;
    p.x1 = ux(rng);
    if (d == 2) p.x2 = ux(rng);
    p.t = ut(rng);
    pts.sample[static_cast<std::size_t>(q)] = n;
    pts.locations(0, q) = p.x1;
    if (d == 2) pts.locations(1, q) = p.x2;
    pts.locations(d, q) = p.t;
    pts.f(q) = apply_operator(pts.pde, eval_jet(ds.params[static_cast<std::size_t>(n)], p));
  }
  return pts;
}

LossAndGradient physics_residual_loss(const OperatorModel& model, const ChannelInputs& inputs,
                                      const PhysicsPoints& points) {
  const auto* real = std::get_if<MIONetModel>(&model);
  if (real == nullptr) throw std::invalid_argument("physics residual: complex models are not supported");
  const double h = points.fd_step;
  const Stencil st = make_stencil(points.pde, h);
  const Eigen::Index Q = points.locations.cols();
  const Eigen::Index S = static_cast<Eigen::Index>(st.offsets.size());
  const int d = points.pde.spatial_dim();
  std::vector<int> sample(static_cast<std::size_t>(Q * S));
  Eigen::MatrixXd loc(points.locations.rows(), Q * S);
  for (Eigen::Index q = 0; q < Q; ++q) {
    for (Eigen::Index s = 0; s < S; ++s) {
      const Offset& o = st.offsets[static_cast<std::size_t>(s)];
      const Eigen::Index c = q * S + s;
      sample[static_cast<std::size_t>(c)] = points.sample[static_cast<std::size_t>(q)];
      loc.col(c) = points.locations.col(q);
      loc(0, c) += o[0] * h;
      if (d == 2) loc(1, c) += o[1] * h;
      loc(d, c) += o[2] * h;
    }
  }
  BatchEvaluation eval(*real, inputs, sample, loc);
  const Eigen::MatrixXd& v = eval.outputs();
  Eigen::MatrixXd upstream(1, Q * S);
  double loss = 0.0;
  for (Eigen::Index q = 0; q < Q; ++q) {
    std::array<double, kDerivCount> D{};
    for (int k = 0; k < kDerivCount; ++k)
      for (const auto& [s, w] : st.weights[static_cast<std::size_t>(k)]) D[static_cast<std::size_t>(k)] += w * v(0, q * S + s);
    std::array<double, kDerivCount> dR{};
    const double R = residual_and_partials(points.pde, D, points.f(q), dR);
    loss += R * R;
    for (Eigen::Index s = 0; s < S; ++s) upstream(0, q * S + s) = 0.0;
    const double scale = 2.0 * R / static_cast<double>(Q);
    for (int k = 0; k < kDerivCount; ++k) {
      if (dR[static_cast<std::size_t>(k)] == 0.0) continue;
      for (const auto& [s, w] : st.weights[static_cast<std::size_t>(k)])
        upstream(0, q * S + s) += scale * dR[static_cast<std::size_t>(k)] * w;
    }
  }
  LossAndGradient out;
  out.loss = loss / static_cast<double>(Q);
  out.gradient = eval.backward(upstream);
  return out;
}

Eigen::MatrixXd predict(const OperatorModel& model, const std::vector<Eigen::VectorXd>& sensors,
                        const SpaceTimeGrid& grid) {
  return predict_field(model, sensors, grid.locations());
}

TrainResult train(OperatorModel model, const OperatorDataset& ds, const ReferenceField& reference,
                  const std::vector<Eigen::VectorXd>& target_sensors, const TrainConfig& config,
                  const TrainOptions& options) {
  if (config.iterations < 0 || config.batch_size <= 0 || config.eval_every <= 0) {
    throw std::invalid_argument("train: iterations >= 0, batch_size > 0 and eval_every > 0 required");
  }
  if (channel_count(model) != static_cast<int>(channel_inputs(ds).size())) {
    throw std::invalid_argument("train: model arity does not match the dataset's input functions");
  }
  TrainResult result{std::move(model), {}};
  if (config.iterations == 0) return result;
  if (static_cast<double>(config.batch_size) > static_cast<double>(ds.size()) * static_cast<double>(ds.layout.P())) {
    throw std::invalid_argument("train: batch_size exceeds N * P");
  }
  const ChannelInputs inputs = channel_inputs(ds);
  std::mt19937_64 batch_rng(derive_seed(config.seed, kBatchStream));
  const bool physics = config.physics.weight > 0.0;
  PhysicsPoints physics_points;
  if (physics) {
    std::mt19937_64 prng(derive_seed(config.seed, kPhysicsStream));
    physics_points = make_physics_points(ds, config.physics, prng);
  }
  Eigen::VectorXd params = pack(result.model);
  const nn::ParamLayout param_layout = layout(result.model);
  nn::AdamState adam = nn::AdamState::zeros(params.size());
  double best = std::numeric_limits<double>::infinity();
  double window_loss = 0.0;
  std::int64_t window = 0;

  for (std::int64_t it = 0; it < config.iterations; ++it) {
    const Batch batch = draw_batch(ds, config.batch_size, batch_rng);
    LossAndGradient lg = model_gradients(result.model, inputs, batch);
    if (physics) {
      const LossAndGradient pg = physics_residual_loss(result.model, inputs, physics_points);
      lg.loss += config.physics.weight * pg.loss;
      lg.gradient += config.physics.weight * pg.gradient;
    }
    if (!std::isfinite(lg.loss)) {
      throw std::runtime_error("train: loss became non-finite at iteration " + std::to_string(it + 1) +
                               (options.checkpoint_dir.empty() ? std::string()
                                                               : "; last good checkpoint kept in " +
                                                                     options.checkpoint_dir.string()));
    }
    nn::adam_step(params, lg.gradient, adam, nn::lr_at(config.schedule, it), param_layout);
    unpack(result.model, params);
    window_loss += lg.loss;
    ++window;

    const std::int64_t done = it + 1;
    if (done % config.eval_every == 0 || done == config.iterations) {
      const ErrorReport r = score(result.model, target_sensors, reference);
      HistoryRecord rec{done, window_loss / static_cast<double>(window), r.rel_l2, r.rel_l1, r.max_err};
      result.history.records.push_back(rec);
      window_loss = 0.0;
      window = 0;
      if (!options.checkpoint_dir.empty()) {
        save_model(result.model, options.checkpoint_dir / "latest");
        if (r.rel_l2 < best) save_model(result.model, options.checkpoint_dir / "best");
      }
      best = std::min(best, r.rel_l2);
      if (options.log) {
        *options.log << "iter " << done << "  loss " << std::setprecision(4) << std::scientific << rec.loss
                     << "  rel_l2 " << rec.rel_l2 << "  rel_l1 " << rec.rel_l1 << "  max " << rec.max_err
                     << std::defaultfloat << std::endl;
      }
    }
  }
  return result;
}

ErrorAverages last20_average(const TrainHistory& history) {
  if (history.records.empty()) throw std::invalid_argument("last20_average: empty history");
  const std::size_t n = history.records.size();
  const std::size_t count = std::min<std::size_t>(20, n);
  ErrorAverages a;
  for (std::size_t i = n - count; i < n; ++i) {
    a.rel_l2 += history.records[i].rel_l2;
    a.rel_l1 += history.records[i].rel_l1;
    a.max_err += history.records[i].max_err;
  }
  a.rel_l2 /= static_cast<double>(count);
  a.rel_l1 /= static_cast<double>(count);
  a.max_err /= static_cast<double>(count);
  a.count = count;
  a.partial = n < 20;
  return a;
}

}  // namespace oplearn
