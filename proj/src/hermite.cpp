#include "oplearn/hermite.hpp"

#include <numbers>

namespace oplearn {

void hermite_functions(double x, std::span<double> out) {
  if (out.empty()) return;
  out[0] = std::exp(-0.5 * x * x) / std::sqrt(std::sqrt(std::numbers::pi));
  if (out.size() == 1) return;
  out[1] = std::sqrt(2.0) * x * out[0];
  for (std::size_t i = 1; i + 1 < out.size(); ++i) {
    const double n = static_cast<double>(i);
    out[i + 1] = x * std::sqrt(2.0 / (n + 1.0)) * out[i] - std::sqrt(n / (n + 1.0)) * out[i - 1];
  }
}

double hermite_function(int i, double x) {
  if (i < 0 || i > kMaxHermiteIndex) throw std::out_of_range("hermite index out of range");
  std::array<double, kMaxHermiteIndex + 1> values{};
  hermite_functions(x, std::span<double>(values.data(), static_cast<std::size_t>(i + 1)));
  return values[static_cast<std::size_t>(i)];
}

}  // namespace oplearn
