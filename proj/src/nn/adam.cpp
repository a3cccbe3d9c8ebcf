#include "oplearn/nn/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace oplearn::nn {

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state, double lr,
               const ParamLayout& layout) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw std::invalid_argument("adam_step: parameter, gradient and moment sizes differ");
  }
  if (!(lr > 0.0)) throw std::invalid_argument("adam_step: learning rate must be positive");
  if (!grads.allFinite()) {
    Eigen::Index bad = 0;
    while (std::isfinite(grads(bad))) ++bad;
    std::string where = "entry " + std::to_string(bad);
    for (const auto& slot : layout) {
      if (bad >= slot.offset && bad < slot.offset + slot.size()) {
        where = "tensor '" + slot.name + "' (entry " + std::to_string(bad - slot.offset) + ")";
        break;
      }
    }
    throw std::runtime_error("adam_step: non-finite gradient in " + where);
  }

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads;
  state.second_moment =
      state.beta2 * state.second_moment + (1.0 - state.beta2) * grads.cwiseAbs2();
  params.array() -= lr * (state.first_moment.array() / c1) /
                    ((state.second_moment.array() / c2).sqrt() + state.eps);
}

double lr_at(const LrSchedule& schedule, std::int64_t iteration) {
  if (iteration < 0) throw std::invalid_argument("lr_at: negative iteration");
  if (schedule.step_size <= 0) throw std::invalid_argument("lr_at: step size must be positive");
  const auto k = iteration / schedule.step_size;
  return schedule.base_lr * std::pow(schedule.decay_rate, static_cast<double>(k));
}

}  // namespace oplearn::nn
