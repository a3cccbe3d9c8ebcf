#include "oplearn/grid.hpp"

#include <stdexcept>

namespace oplearn {

std::vector<double> Axis::nodes() const {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = at(i);
  return out;
}

Eigen::Index SpaceTimeGrid::size() const {
  Eigen::Index n = time.count;
  for (const auto& a : space) n *= a.count;
  return n;
}

SpaceTimePoint SpaceTimeGrid::point(Eigen::Index k) const {
  SpaceTimePoint p;
  const int it = static_cast<int>(k % time.count);
  k /= time.count;
  p.t = time.at(it);
  if (space.size() == 2) {
    p.x2 = space[1].at(static_cast<int>(k % space[1].count));
    k /= space[1].count;
  }
  p.x1 = space[0].at(static_cast<int>(k));
  return p;
}

Eigen::MatrixXd SpaceTimeGrid::locations() const {
  const int d = spatial_dim();
  Eigen::MatrixXd y(d + 1, size());
  for (Eigen::Index k = 0; k < size(); ++k) {
    const auto p = point(k);
    y(0, k) = p.x1;
    if (d == 2) y(1, k) = p.x2;
    y(d, k) = p.t;
  }
  return y;
}

SpaceTimeGrid make_grid(int spatial_dim, double lo, double hi, int space_count, double t_lo,
                        double t_hi, int time_count) {
  if (spatial_dim < 1 || spatial_dim > 2) throw std::invalid_argument("grid: 1 or 2 spatial dims");
  if (space_count < 1 || time_count < 1) throw std::invalid_argument("grid: counts must be >= 1");
  SpaceTimeGrid g;
  g.space.assign(static_cast<std::size_t>(spatial_dim), Axis{lo, hi, space_count});
  g.time = Axis{t_lo, t_hi, time_count};
  return g;
}

SpaceTimeGrid make_initial_grid(int spatial_dim, double lo, double hi, int space_count) {
  return make_grid(spatial_dim, lo, hi, space_count, 0.0, 0.0, 1);
}

}  // namespace oplearn
