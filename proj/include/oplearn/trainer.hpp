#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "oplearn/config.hpp"
#include "oplearn/dataset.hpp"
#include "oplearn/evaluation.hpp"
#include "oplearn/mionet.hpp"
#include "oplearn/nn/adam.hpp"
#include "oplearn/pde.hpp"
#include "oplearn/reference.hpp"

namespace oplearn {

struct PhysicsConfig {
  double weight = 0.0;  // 0 disables the residual term entirely
  int points = 1000;    // Q
  double fd_step = 1e-3;
};

struct TrainConfig {
  std::int64_t iterations = 0;
  int batch_size = 8192;
  nn::LrSchedule schedule;
  std::int64_t eval_every = 1000;
  std::uint64_t seed = 0;
  PhysicsConfig physics;

  static TrainConfig from(const ExperimentConfig& cfg);
};

struct HistoryRecord {
  std::int64_t iteration = 0;
  double loss = 0.0;  // mean mini-batch loss since the previous record
  double rel_l2 = 0.0;
  double rel_l1 = 0.0;
  double max_err = 0.0;
  bool operator==(const HistoryRecord&) const = default;
};

struct TrainHistory {
  std::vector<HistoryRecord> records;
  bool operator==(const TrainHistory&) const = default;
};

void write_history_csv(const TrainHistory& history, std::ostream& out);

/// Mean over the batch of the squared error summed over heads. Throws if not finite.
double data_loss(const OperatorModel& model, const ChannelInputs& inputs, const Batch& batch);

/// Glorot-initialised model with the config's architecture (seeded from cfg.seed).
OperatorModel make_model(const ExperimentConfig& cfg);

/// Uniform (sample, location) pairs with replacement.
Batch draw_batch(const OperatorDataset& ds, int batch_size, std::mt19937_64& rng);

/// Residual collocation set: fixed (sample, point) pairs with the manufactured source there.
struct PhysicsPoints {
  PdeSpec pde;
  std::vector<int> sample;
  Eigen::MatrixXd locations;  // trunk input dim x Q, shifted inward so every stencil stays inside
  Eigen::VectorXd f;          // manufactured source at each point
  double fd_step = 1e-3;
};

PhysicsPoints make_physics_points(const OperatorDataset& ds, const PhysicsConfig& physics, std::mt19937_64& rng);

/// Mean squared PDE residual of the model with finite-difference derivatives in the trunk
/// input, and its gradient. Real models only.
LossAndGradient physics_residual_loss(const OperatorModel& model, const ChannelInputs& inputs,
                                      const PhysicsPoints& points);

struct TrainOptions {
  std::filesystem::path checkpoint_dir;  // empty: no checkpoints; else writes latest/ and best/
  std::ostream* log = nullptr;
};

struct TrainResult {
  OperatorModel model;
  TrainHistory history;
};

/// Adam on uniformly drawn mini-batches; every eval_every iterations (and at the end) the model
/// is scored against the reference with the target sensor inputs. A non-finite loss throws,
/// leaving the last checkpoints in place.
TrainResult train(OperatorModel model, const OperatorDataset& ds, const ReferenceField& reference,
                  const std::vector<Eigen::VectorXd>& target_sensors, const TrainConfig& config,
                  const TrainOptions& options = {});

/// Prediction on a grid with fixed branch inputs; heads x grid.size().
Eigen::MatrixXd predict(const OperatorModel& model, const std::vector<Eigen::VectorXd>& sensors,
                        const SpaceTimeGrid& grid);

struct ErrorAverages {
  double rel_l2 = 0.0;
  double rel_l1 = 0.0;
  double max_err = 0.0;
  std::size_t count = 0;  // records averaged
  bool partial = false;   // fewer than 20 records were available
};

/// Mean of the last 20 records (all of them, flagged, when fewer). Throws on an empty history.
ErrorAverages last20_average(const TrainHistory& history);

}  // namespace oplearn
