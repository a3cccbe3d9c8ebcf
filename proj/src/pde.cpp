#include "oplearn/pde.hpp"

#include <stdexcept>

namespace oplearn {

namespace {

template <typename S>
S operator_value(const PdeSpec& spec, const DerivativeJet<S>& j) {
  const auto orders = required_orders(spec);
  j.require(orders.x, orders.t, "apply_operator(" + equation_name(spec.equation) + ")");
  switch (spec.equation) {
    case Equation::Wave1d:
      return j.d2u_dt2 - j.d2u_dx2;
    case Equation::Wave2d:
      if (j.spatial_dim != 2) throw std::invalid_argument("apply_operator(WAVE2D): jet is not 2D");
      return j.d2u_dt2 - j.d2u_dx2 - j.d2u_dy2;
    case Equation::Burgers:
      return j.du_dt - j.u * j.du_dx - S(spec.viscosity) * j.d2u_dx2;
    case Equation::Kdv:
      return j.du_dt + S(6.0) * j.u * j.du_dx + j.d3u_dx3;
    case Equation::Schrodinger:
      break;
  }
  throw std::logic_error("unreachable");
}

template <typename S>
std::vector<S> traces(const PdeSpec& spec, const DerivativeJet<S>& j) {
  if (spec.time_order == 2) {
    j.require(0, 1, "initial_traces");
    return {j.u, j.du_dt};
  }
  return {j.u};
}

}  // namespace

std::string equation_name(Equation e) {
  switch (e) {
    case Equation::Wave1d: return "WAVE1D";
    case Equation::Wave2d: return "WAVE2D";
    case Equation::Burgers: return "BURGERS";
    case Equation::Kdv: return "KDV";
    case Equation::Schrodinger: return "SCHRODINGER";
  }
  throw std::invalid_argument("unknown equation");
}

PdeSpec PdeSpec::make(Equation e, double viscosity) {
  PdeSpec s;
  s.equation = e;
  s.viscosity = viscosity;
  s.time_order = (e == Equation::Wave1d || e == Equation::Wave2d) ? 2 : 1;
  s.complex = e == Equation::Schrodinger;
  s.validate();
  return s;
}

void PdeSpec::validate() const {
  const bool wave = equation == Equation::Wave1d || equation == Equation::Wave2d;
  if (wave != (time_order == 2) || (time_order != 1 && time_order != 2)) {
    throw std::invalid_argument("pde spec: time_order must be 2 exactly for wave equations");
  }
  if (complex != (equation == Equation::Schrodinger)) {
    throw std::invalid_argument("pde spec: complex must be set exactly for Schrodinger");
  }
  if (equation == Equation::Burgers && !(viscosity > 0.0)) {
    throw std::invalid_argument("pde spec: Burgers viscosity must be positive");
  }
}

JetOrders required_orders(const PdeSpec& spec) {
  switch (spec.equation) {
    case Equation::Wave1d:
    case Equation::Wave2d:
      return {2, 2};
    case Equation::Burgers:
    case Equation::Schrodinger:
      return {2, 1};
    case Equation::Kdv:
      return {3, 1};
  }
  throw std::invalid_argument("unknown equation");
}

double apply_operator(const PdeSpec& spec, const RealJet& jet) {
  if (spec.equation == Equation::Schrodinger) {
    throw std::invalid_argument("apply_operator(SCHRODINGER): needs a complex jet");
  }
  return operator_value(spec, jet);
}

std::complex<double> apply_operator(const PdeSpec& spec, const ComplexJet& jet) {
  if (spec.equation == Equation::Schrodinger) {
    jet.require(2, 1, "apply_operator(SCHRODINGER)");
    return std::complex<double>(0.0, 1.0) * jet.du_dt + jet.d2u_dx2;
  }
  return operator_value(spec, jet);
}

std::vector<double> initial_traces(const PdeSpec& spec, const RealJet& jet_at_t0) {
  return traces(spec, jet_at_t0);
}

std::vector<std::complex<double>> initial_traces(const PdeSpec& spec, const ComplexJet& jet_at_t0) {
  return traces(spec, jet_at_t0);
}

double residual(const PdeSpec& spec, const RealJet& jet, double f_value) {
  return apply_operator(spec, jet) - f_value;
}

std::complex<double> residual(const PdeSpec& spec, const ComplexJet& jet, std::complex<double> f_value) {
  return apply_operator(spec, jet) - f_value;
}

}  // namespace oplearn
