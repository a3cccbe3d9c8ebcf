#pragma once

#include <array>
#include <complex>
#include <cstddef>

namespace oplearn {

/// Truncated bivariate Taylor expansion around (x0, t0):
///   u(x0 + dx, t0 + dt) = sum_{i<=NX, j<=NT} c(i, j) dx^i dt^j.
/// Arithmetic and composition with analytic scalar functions propagate exact
/// derivatives up to d^NX/dx^NX d^NT/dt^NT, mixed terms included.
template <typename Scalar, int NX, int NT>
class TaylorJet {
 public:
  static constexpr int kMaxOrder = NX + NT;
  static constexpr std::size_t kSize = static_cast<std::size_t>((NX + 1) * (NT + 1));

  TaylorJet() { c_.fill(Scalar(0)); }
  TaylorJet(Scalar value) {  // NOLINT: implicit constant promotion is intended
    c_.fill(Scalar(0));
    c_[0] = value;
  }

  static TaylorJet variable_x(Scalar x0) {
    TaylorJet j(x0);
    if constexpr (NX > 0) j(1, 0) = Scalar(1);
    return j;
  }
  static TaylorJet variable_t(Scalar t0) {
    TaylorJet j(t0);
    if constexpr (NT > 0) j(0, 1) = Scalar(1);
    return j;
  }

  Scalar& operator()(int i, int j) { return c_[static_cast<std::size_t>(i * (NT + 1) + j)]; }
  const Scalar& operator()(int i, int j) const {
    return c_[static_cast<std::size_t>(i * (NT + 1) + j)];
  }

  Scalar value() const { return c_[0]; }

  /// d^i/dx^i d^j/dt^j u at the expansion point.
  Scalar derivative(int i, int j) const {
    return (*this)(i, j) * static_cast<double>(factorial(i) * factorial(j));
  }

  TaylorJet& operator+=(const TaylorJet& o) {
    for (std::size_t k = 0; k < kSize; ++k) c_[k] += o.c_[k];
    return *this;
  }
  TaylorJet& operator-=(const TaylorJet& o) {
    for (std::size_t k = 0; k < kSize; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  TaylorJet& operator*=(Scalar s) {
    for (auto& v : c_) v *= s;
    return *this;
  }

  friend TaylorJet operator+(TaylorJet a, const TaylorJet& b) { return a += b; }
  friend TaylorJet operator-(TaylorJet a, const TaylorJet& b) { return a -= b; }
  friend TaylorJet operator-(TaylorJet a) { return a *= Scalar(-1); }
  friend TaylorJet operator+(TaylorJet a, Scalar s) {
    a.c_[0] += s;
    return a;
  }
  friend TaylorJet operator+(Scalar s, TaylorJet a) { return a + s; }
  friend TaylorJet operator-(TaylorJet a, Scalar s) { return a + (-s); }
  friend TaylorJet operator*(TaylorJet a, Scalar s) { return a *= s; }
  friend TaylorJet operator*(Scalar s, TaylorJet a) { return a *= s; }

  friend TaylorJet operator*(const TaylorJet& a, const TaylorJet& b) {
    TaylorJet r;
    for (int i = 0; i <= NX; ++i)
      for (int j = 0; j <= NT; ++j) {
        const Scalar av = a(i, j);
        if (av == Scalar(0)) continue;
        for (int p = 0; p + i <= NX; ++p)
          for (int q = 0; q + j <= NT; ++q) r(i + p, j + q) += av * b(p, q);
      }
    return r;
  }

  /// f(a) from the derivatives f^(n)(a0), n = 0..kMaxOrder, a0 = a.value().
  friend TaylorJet compose(const TaylorJet& a, const std::array<Scalar, kMaxOrder + 1>& derivs) {
    TaylorJet delta = a;
    delta(0, 0) = Scalar(0);
    TaylorJet result(derivs[0]);
    TaylorJet power(Scalar(1));
    double inv_fact = 1.0;
    for (int n = 1; n <= kMaxOrder; ++n) {
      power = power * delta;
      inv_fact /= n;
      result += power * (derivs[static_cast<std::size_t>(n)] * inv_fact);
    }
    return result;
  }

 private:
  static constexpr long factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

  std::array<Scalar, kSize> c_;
};

template <typename Scalar, int NX, int NT>
TaylorJet<Scalar, NX, NT> exp(const TaylorJet<Scalar, NX, NT>& a) {
  using std::exp;
  std::array<Scalar, NX + NT + 1> d;
  d.fill(exp(a.value()));
  return compose(a, d);
}

template <typename Scalar, int NX, int NT>
TaylorJet<Scalar, NX, NT> sin(const TaylorJet<Scalar, NX, NT>& a) {
  using std::cos;
  using std::sin;
  const Scalar s = sin(a.value()), c = cos(a.value());
  const std::array<Scalar, 4> cycle{s, c, -s, -c};
  std::array<Scalar, NX + NT + 1> d;
  for (std::size_t n = 0; n < d.size(); ++n) d[n] = cycle[n % 4];
  return compose(a, d);
}

template <typename Scalar, int NX, int NT>
TaylorJet<Scalar, NX, NT> cos(const TaylorJet<Scalar, NX, NT>& a) {
  using std::cos;
  using std::sin;
  const Scalar s = sin(a.value()), c = cos(a.value());
  const std::array<Scalar, 4> cycle{c, -s, -c, s};
  std::array<Scalar, NX + NT + 1> d;
  for (std::size_t n = 0; n < d.size(); ++n) d[n] = cycle[n % 4];
  return compose(a, d);
}

/// a^p on the principal branch.
template <typename Scalar, int NX, int NT>
TaylorJet<Scalar, NX, NT> pow(const TaylorJet<Scalar, NX, NT>& a, double p) {
  using std::pow;
  std::array<Scalar, NX + NT + 1> d;
  double coeff = 1.0;
  for (std::size_t n = 0; n < d.size(); ++n) {
    d[n] = coeff * pow(a.value(), Scalar(p - static_cast<double>(n)));
    coeff *= p - static_cast<double>(n);
  }
  return compose(a, d);
}

}  // namespace oplearn
