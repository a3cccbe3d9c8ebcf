#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>

#include "oplearn/taylor_jet.hpp"

namespace oplearn {

inline constexpr int kMaxHermiteIndex = 10;

/// Normalised Hermite function (2^i i! sqrt(pi))^(-1/2) H_i(x) exp(-x^2/2), via the stable
/// three-term recurrence. Throws for i outside [0, kMaxHermiteIndex].
double hermite_function(int i, double x);

/// Values of H^_0 .. H^_{count-1} at x (no index cap; used for derivative ladders).
void hermite_functions(double x, std::span<double> out);

/// d^k/dx^k H^_i(x) for k = 0..N, using H^_j' = sqrt(j/2) H^_{j-1} - sqrt((j+1)/2) H^_{j+1}.
template <int N>
std::array<double, N + 1> hermite_derivatives(int i, double x) {
  if (i < 0 || i > kMaxHermiteIndex) throw std::out_of_range("hermite index out of range");
  constexpr int kSpan = kMaxHermiteIndex + N + 2;
  std::array<double, kSpan> values{};
  hermite_functions(x, std::span<double>(values.data(), static_cast<std::size_t>(i + N + 1)));
  // coeff[j]: weight of H^_j in the current derivative
  std::array<double, kSpan> coeff{};
  coeff[static_cast<std::size_t>(i)] = 1.0;
  std::array<double, N + 1> out{};
  for (int k = 0; k <= N; ++k) {
    double acc = 0.0;
    for (int j = 0; j <= i + k; ++j) acc += coeff[static_cast<std::size_t>(j)] * values[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(k)] = acc;
    if (k == N) break;
    std::array<double, kSpan> next{};
    for (int j = 0; j <= i + k; ++j) {
      const double c = coeff[static_cast<std::size_t>(j)];
      if (c == 0.0) continue;
      if (j > 0) next[static_cast<std::size_t>(j - 1)] += c * std::sqrt(j / 2.0);
      next[static_cast<std::size_t>(j + 1)] -= c * std::sqrt((j + 1) / 2.0);
    }
    coeff = next;
  }
  return out;
}

template <int NX, int NT>
TaylorJet<double, NX, NT> hermite(int i, const TaylorJet<double, NX, NT>& a) {
  return compose(a, hermite_derivatives<NX + NT>(i, a.value()));
}

}  // namespace oplearn
