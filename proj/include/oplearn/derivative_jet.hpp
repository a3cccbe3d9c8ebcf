#pragma once

#include <complex>
#include <algorithm>
#include <stdexcept>
#include <string>

namespace oplearn {

/// Field value and partial derivatives at one space-time point.
/// In 2D the x-entries refer to x1 and the y-entries to x2.
template <typename Scalar>
struct DerivativeJet {
  int spatial_dim = 1;
  int x_order = 0;  // highest spatial derivative carried
  int t_order = 0;  // highest time derivative carried

  Scalar u{};
  Scalar du_dt{};
  Scalar d2u_dt2{};
  Scalar du_dx{};
  Scalar d2u_dx2{};
  Scalar d3u_dx3{};
  Scalar du_dy{};
  Scalar d2u_dy2{};

  /// Throws std::invalid_argument unless the requested orders are carried.
  void require(int need_x, int need_t, const std::string& who) const {
    if (x_order < need_x || t_order < need_t) {
      throw std::invalid_argument(who + ": needs derivative orders (x " + std::to_string(need_x) +
                                  ", t " + std::to_string(need_t) + "), jet carries (x " +
                                  std::to_string(x_order) + ", t " + std::to_string(t_order) + ")");
    }
  }

  DerivativeJet& operator+=(const DerivativeJet& o) {
    u += o.u;
    du_dt += o.du_dt;
    d2u_dt2 += o.d2u_dt2;
    du_dx += o.du_dx;
    d2u_dx2 += o.d2u_dx2;
    d3u_dx3 += o.d3u_dx3;
    du_dy += o.du_dy;
    d2u_dy2 += o.d2u_dy2;
    x_order = std::min(x_order, o.x_order);
    t_order = std::min(t_order, o.t_order);
    return *this;
  }
  DerivativeJet& operator*=(Scalar s) {
    u *= s;
    du_dt *= s;
    d2u_dt2 *= s;
    du_dx *= s;
    d2u_dx2 *= s;
    d3u_dx3 *= s;
    du_dy *= s;
    d2u_dy2 *= s;
    return *this;
  }
  friend DerivativeJet operator+(DerivativeJet a, const DerivativeJet& b) { return a += b; }
  friend DerivativeJet operator*(Scalar s, DerivativeJet a) { return a *= s; }
};

using RealJet = DerivativeJet<double>;
using ComplexJet = DerivativeJet<std::complex<double>>;

}  // namespace oplearn
