#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "oplearn/nn/mlp.hpp"

namespace oplearn::nn {

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  std::int64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState zeros(Eigen::Index n) {
    AdamState s;
    s.first_moment = Eigen::VectorXd::Zero(n);
    s.second_moment = Eigen::VectorXd::Zero(n);
    return s;
  }
};

/// Bias-corrected Adam update on a flat parameter vector. `layout` only names
/// the offending tensor when a gradient entry is not finite.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state, double lr,
               const ParamLayout& layout = {});

/// Step-wise exponential decay: base_lr * decay_rate^floor(iteration / step_size).
struct LrSchedule {
  double base_lr = 1e-3;
  std::int64_t step_size = 1000;
  double decay_rate = 1.0;
};

double lr_at(const LrSchedule& schedule, std::int64_t iteration);

}  // namespace oplearn::nn
