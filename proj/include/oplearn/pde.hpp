#pragma once

#include <complex>
#include <string>
#include <vector>

#include "oplearn/derivative_jet.hpp"
#include "oplearn/families.hpp"

namespace oplearn {

enum class Equation { Wave1d, Wave2d, Burgers, Kdv, Schrodinger };

std::string equation_name(Equation e);

/// Differential operator L and initial traces of one evolution equation.
struct PdeSpec {
  Equation equation = Equation::Wave1d;
  double viscosity = 0.2;  // Burgers only
  int time_order = 2;
  bool complex = false;

  static PdeSpec make(Equation e, double viscosity = 0.2);
  int spatial_dim() const { return equation == Equation::Wave2d ? 2 : 1; }
  /// Throws std::invalid_argument if the fields contradict the equation.
  void validate() const;
  bool operator==(const PdeSpec&) const = default;
};

/// Derivative orders apply_operator reads.
JetOrders required_orders(const PdeSpec& spec);

/// L[u] at the jet's point:
///   wave         u_tt - u_xx (- u_yy)
///   Burgers      u_t - u u_x - nu u_xx
///   KdV          u_t + 6 u u_x + u_xxx
///   Schrodinger  i u_t + u_xx
/// Throws if the jet lacks an order, or for the Schrodinger operator on a real jet.
double apply_operator(const PdeSpec& spec, const RealJet& jet);
std::complex<double> apply_operator(const PdeSpec& spec, const ComplexJet& jet);

/// [u] for first-order equations, [u, u_t] for wave equations.
std::vector<double> initial_traces(const PdeSpec& spec, const RealJet& jet_at_t0);
std::vector<std::complex<double>> initial_traces(const PdeSpec& spec, const ComplexJet& jet_at_t0);

double residual(const PdeSpec& spec, const RealJet& jet, double f_value);
std::complex<double> residual(const PdeSpec& spec, const ComplexJet& jet, std::complex<double> f_value);

}  // namespace oplearn
