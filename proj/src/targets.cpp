#include "oplearn/targets.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "oplearn/taylor_jet.hpp"

namespace oplearn {

namespace {

using C = std::complex<double>;
constexpr double kPi = std::numbers::pi;

struct CaseInfo {
  CaseId id;
  const char* name;
  FamilyId family;
  Equation equation;
};

const std::vector<CaseInfo>& case_table() {
  static const std::vector<CaseInfo> table{
      {CaseId::Wave1d1, "wave1d-1", FamilyId::Wave1dHermite, Equation::Wave1d},
      {CaseId::Wave1d2, "wave1d-2", FamilyId::Wave1dPointSource, Equation::Wave1d},
      {CaseId::Wave1dB, "wave1d-b", FamilyId::Wave1dHermite, Equation::Wave1d},
      {CaseId::Wave2d, "wave2d", FamilyId::Wave2dPacket, Equation::Wave2d},
      {CaseId::Burgers1, "burgers-1", FamilyId::BurgersHermite, Equation::Burgers},
      {CaseId::BurgersMulti, "burgers-multi", FamilyId::BurgersHermite, Equation::Burgers},
      {CaseId::Kdv, "kdv", FamilyId::KdvPacket, Equation::Kdv},
      {CaseId::Schrodinger, "schrodinger", FamilyId::SchrodingerBeam, Equation::Schrodinger},
  };
  return table;
}

const CaseInfo& case_info(CaseId id) {
  for (const auto& c : case_table())
    if (c.id == id) return c;
  throw std::invalid_argument("unknown case id");
}

Field real_field(std::function<double(const SpaceTimePoint&)> f) {
  return [f = std::move(f)](const SpaceTimePoint& p) { return C(f(p)); };
}

// Exact solutions written once for any jet type J (x2 ignored in 1D).
template <class J>
J exact_u(CaseId id, const J& x1, const J& x2, const J& t, double k2d) {
  using std::cos;
  using std::exp;
  switch (id) {
    case CaseId::Wave1d1:
      return exp(x1 * x1 * -1.0) * cos(t - x1);
    case CaseId::Wave1dB:
      return exp(x1 * x1 * -0.25) * cos(t - x1);
    case CaseId::Wave2d: {
      const J d1 = x1 - t, d2 = x2 - t;
      return exp((d1 * d1 + d2 * d2) * -0.5) * cos(t * k2d);
    }
    case CaseId::Kdv: {
      const J d = x1 - t;
      return exp(d * d * -1.0);
    }
    default:
      throw std::invalid_argument("case '" + case_name(id) +
                                  "' has no closed-form solution; use the numerical reference solver");
  }
}

}  // namespace

const std::vector<CaseId>& all_cases() {
  static const std::vector<CaseId> ids = [] {
    std::vector<CaseId> v;
    for (const auto& c : case_table()) v.push_back(c.id);
    return v;
  }();
  return ids;
}

std::string case_name(CaseId id) { return case_info(id).name; }

CaseId case_from_name(std::string_view name) {
  for (const auto& c : case_table())
    if (name == c.name) return c.id;
  throw std::invalid_argument("unknown case '" + std::string(name) + "'");
}

FamilyId case_family(CaseId id) { return case_info(id).family; }
PdeSpec case_pde(CaseId id) { return PdeSpec::make(case_info(id).equation); }

std::vector<double> multi_target_thetas(int count) {
  if (count < 1) throw std::invalid_argument("multi_target_thetas: count must be >= 1");
  if (count == 1) return {0.0};
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] =
        i == count - 1 ? kPi : -kPi + 2.0 * kPi * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

TargetFunctions target_functions(CaseId id, const TargetOptions& options) {
  using std::cos;
  using std::exp;
  using std::sin;
  TargetFunctions tf;
  switch (id) {
    case CaseId::Wave1d1:
      tf.initial = {real_field([](const SpaceTimePoint& p) { return exp(-p.x1 * p.x1) * cos(p.x1); }),
                    real_field([](const SpaceTimePoint& p) { return exp(-p.x1 * p.x1) * sin(p.x1); })};
      tf.sources = {real_field([](const SpaceTimePoint& p) {
        const double x = p.x1, t = p.t;
        return exp(-x * x) * (4.0 * x * sin(t - x) + (2.0 - 4.0 * x * x) * cos(t - x));
      })};
      break;
    case CaseId::Wave1d2:
      tf.initial = {real_field([](const SpaceTimePoint&) { return 0.0; }),
                    real_field([](const SpaceTimePoint&) { return 0.0; })};
      tf.sources = {real_field([](const SpaceTimePoint& p) { return 5.0 * exp(-25.0 * p.x1 * p.x1); })};
      break;
    case CaseId::Wave1dB:
      tf.initial = {real_field([](const SpaceTimePoint& p) { return exp(-p.x1 * p.x1 / 4.0) * cos(p.x1); }),
                    real_field([](const SpaceTimePoint& p) { return exp(-p.x1 * p.x1 / 4.0) * sin(p.x1); })};
      tf.sources = {real_field([](const SpaceTimePoint& p) {
        const double x = p.x1, t = p.t;
        return exp(-x * x / 4.0) * ((-x * x / 4.0 + 0.5) * cos(t - x) + x * sin(t - x));
      })};
      break;
    case CaseId::Wave2d: {
      const double k = options.wave2d_k;
      auto phi0 = [](const SpaceTimePoint& p) { return exp(-(p.x1 * p.x1 + p.x2 * p.x2) / 2.0); };
      tf.initial = {real_field(phi0),
                    real_field([phi0](const SpaceTimePoint& p) { return phi0(p) * (p.x1 + p.x2); })};
      tf.sources = {real_field([k](const SpaceTimePoint& p) {
        const double d1 = p.x1 - p.t, d2 = p.x2 - p.t, s = d1 + d2;
        return exp(-(d1 * d1 + d2 * d2) / 2.0) *
               (s * s * cos(k * p.t) - 2.0 * k * s * sin(k * p.t) - (k * k + d1 * d1 + d2 * d2) * cos(k * p.t));
      })};
      break;
    }
    case CaseId::Burgers1:
      tf.initial = {real_field([](const SpaceTimePoint&) { return 0.0; })};
      tf.sources = {real_field([](const SpaceTimePoint& p) { return cos(kPi * p.t) * exp(-p.x1 * p.x1); })};
      break;
    case CaseId::BurgersMulti:
      tf.initial = {real_field([](const SpaceTimePoint&) { return 0.0; })};
      tf.thetas = multi_target_thetas(options.theta_count);
      for (double theta : tf.thetas) {
        tf.sources.push_back(
            real_field([theta](const SpaceTimePoint& p) { return cos(theta * p.t) * exp(-p.x1 * p.x1); }));
      }
      break;
    case CaseId::Kdv:
      tf.initial = {real_field([](const SpaceTimePoint& p) { return exp(-p.x1 * p.x1); })};
      tf.sources = {real_field([](const SpaceTimePoint& p) {
        const double x = p.x1, t = p.t;
        return exp(-(x - t) * (x - t)) * (12.0 * (t - x) * exp(-(t - x) * (t - x)) + 14.0 * (x - t) +
                                          24.0 * t * x * (x - t) + 8.0 * (t * t * t - x * x * x));
      })};
      break;
    case CaseId::Schrodinger:
      tf.initial = {[](const SpaceTimePoint& p) {
        return std::exp(C(-p.x1 * p.x1, p.x1)) * std::cos(p.x1);
      }};
      tf.sources = {[](const SpaceTimePoint&) { return C(0.0); }};
      break;
  }
  return tf;
}

bool has_exact_solution(CaseId id) {
  return id == CaseId::Wave1d1 || id == CaseId::Wave1dB || id == CaseId::Wave2d || id == CaseId::Kdv;
}

std::complex<double> exact_solution(CaseId id, const SpaceTimePoint& p, const TargetOptions& options) {
  return exact_u(id, p.x1, p.x2, p.t, options.wave2d_k);
}

ComplexJet exact_solution_jet(CaseId id, const SpaceTimePoint& p, const TargetOptions& options) {
  using JX = TaylorJet<double, 3, 2>;
  const double k = options.wave2d_k;
  const JX j = exact_u(id, JX::variable_x(p.x1), JX(p.x2), JX::variable_t(p.t), k);
  ComplexJet out;
  out.spatial_dim = id == CaseId::Wave2d ? 2 : 1;
  out.x_order = 3;
  out.t_order = 2;
  out.u = j.value();
  out.du_dt = j.derivative(0, 1);
  out.d2u_dt2 = j.derivative(0, 2);
  out.du_dx = j.derivative(1, 0);
  out.d2u_dx2 = j.derivative(2, 0);
  out.d3u_dx3 = j.derivative(3, 0);
  if (out.spatial_dim == 2) {
    using JY = TaylorJet<double, 2, 0>;
    const JY y = exact_u(id, JY(p.x1), JY::variable_x(p.x2), JY(p.t), k);
    out.du_dy = y.derivative(1, 0);
    out.d2u_dy2 = y.derivative(2, 0);
    out.x_order = 2;
  }
  return out;
}

}  // namespace oplearn
