#pragma once

#include <vector>

#include <Eigen/Dense>

namespace oplearn {

/// A point in space-time; x2 is ignored for one spatial dimension.
struct SpaceTimePoint {
  double x1 = 0.0;
  double x2 = 0.0;
  double t = 0.0;
};

/// `count` uniformly spaced nodes on [lo, hi], endpoints included.
struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  int count = 1;

  double step() const { return count > 1 ? (hi - lo) / (count - 1) : 0.0; }
  double at(int i) const {
    // Exact endpoints, uniform interior.
    if (count <= 1) return lo;
    if (i == count - 1) return hi;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  std::vector<double> nodes() const;

  bool operator==(const Axis&) const = default;
};

/// Tensor-product grid over (space..., time). Flattened with the time index fastest:
/// k = (i1 * n2 + i2) * nt + it. A spatial-only grid has a single time node.
struct SpaceTimeGrid {
  std::vector<Axis> space;
  Axis time;

  int spatial_dim() const { return static_cast<int>(space.size()); }
  Eigen::Index size() const;
  SpaceTimePoint point(Eigen::Index k) const;
  /// (spatial_dim + 1) x size() trunk inputs in (x..., t) order.
  Eigen::MatrixXd locations() const;

  bool operator==(const SpaceTimeGrid&) const = default;
};

SpaceTimeGrid make_grid(int spatial_dim, double lo, double hi, int space_count, double t_lo,
                        double t_hi, int time_count);

/// Spatial grid at t = 0.
SpaceTimeGrid make_initial_grid(int spatial_dim, double lo, double hi, int space_count);

}  // namespace oplearn
