#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace oplearn {

/// ||g_tar - g||_2 / ||g_tar||_2. Throws when the target norm is zero; use metric_mse then.
template <typename DerivedA, typename DerivedB>
double metric_rel_l2(const Eigen::MatrixBase<DerivedA>& g, const Eigen::MatrixBase<DerivedB>& g_tar) {
  if (g.size() != g_tar.size()) throw std::invalid_argument("metric_rel_l2: length mismatch");
  const double denom = g_tar.norm();
  if (!(denom > 0.0)) {
    throw std::invalid_argument("metric_rel_l2: target has zero norm, use metric_mse instead");
  }
  return (g_tar - g).norm() / denom;
}

/// Root mean square of g_tar - g over P entries.
template <typename DerivedA, typename DerivedB>
double metric_mse(const Eigen::MatrixBase<DerivedA>& g, const Eigen::MatrixBase<DerivedB>& g_tar) {
  if (g.size() != g_tar.size()) throw std::invalid_argument("metric_mse: length mismatch");
  if (g.size() == 0) throw std::invalid_argument("metric_mse: empty input");
  return std::sqrt((g_tar - g).squaredNorm() / static_cast<double>(g.size()));
}

}  // namespace oplearn
