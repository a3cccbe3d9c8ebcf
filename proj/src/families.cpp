#include "oplearn/families.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "oplearn/hermite.hpp"
#include "oplearn/taylor_jet.hpp"

namespace oplearn {

namespace {

struct FamilyInfo {
  FamilyId id;
  const char* name;
  int spatial_dim;
  bool complex;
  bool uses_k;
  JetOrders native;
  std::vector<std::string> symbols;
};

const std::vector<FamilyInfo>& family_table() {
  static const std::vector<FamilyInfo> table{
      {FamilyId::Wave1dHermite, "WAVE1D_HERMITE", 1, false, true, {2, 2}, {"A", "k", "a", "w", "b"}},
      {FamilyId::Wave1dPointSource, "WAVE1D_POINTSRC", 1, false, true, {2, 2}, {"A", "a", "b", "sigma"}},
      {FamilyId::Wave2dPacket, "WAVE2D_PACKET", 2, false, false, {2, 2},
       {"A", "a1", "a2", "sigma", "k1", "k2", "w"}},
      {FamilyId::BurgersHermite, "BURGERS_HERMITE", 1, false, true, {2, 1}, {"A", "k1", "k2", "w", "b"}},
      {FamilyId::KdvPacket, "KDV_PACKET", 1, false, false, {3, 1}, {"A", "a", "c1", "c2", "k", "w"}},
      {FamilyId::SchrodingerBeam, "SCHRODINGER_BEAM", 1, true, false, {2, 1}, {"A", "zeta", "k"}},
  };
  return table;
}

const FamilyInfo& info(FamilyId id) {
  for (const auto& f : family_table())
    if (f.id == id) return f;
  throw std::invalid_argument("unknown family id");
}

bool is_per_index(FamilyId id, const std::string& symbol) {
  switch (id) {
    case FamilyId::Wave1dHermite:
      return symbol == "A" || symbol == "k" || symbol == "a";
    case FamilyId::Wave1dPointSource:
    case FamilyId::BurgersHermite:
      return true;
    default:
      return false;
  }
}

constexpr double kPi = std::numbers::pi;

// Closed forms, written once for any jet type J. x2 is ignored by 1D families.

template <class J>
J wave_hermite_u(const WaveHermiteParams& p, const J& x, const J& t) {
  J u(0.0);
  const J arg = x * p.w + p.b;
  for (std::size_t i = 0; i < p.A.size(); ++i)
    u += sin(t * p.k[i] + p.a[i]) * hermite(static_cast<int>(i), arg) * p.A[i];
  return u;
}

template <class J>
J point_source_u(const PointSourceParams& p, const J& x, const J& t) {
  J u(0.0);
  const J t2 = t * t;
  const J x2 = x * x;
  for (std::size_t i = 0; i < p.A.size(); ++i)
    u += t2 * cos(t * p.a[i] + p.b[i]) * exp(x2 * (-1.0 / (p.sigma[i] * p.sigma[i]))) * p.A[i];
  return u;
}

template <class J>
J packet2d_u(const Packet2dParams& p, const J& x1, const J& x2, const J& t) {
  const J d1 = x1 - t * p.a1;
  const J d2 = x2 - t * p.a2;
  const J envelope = exp((d1 * d1 + d2 * d2) * (-1.0 / (p.sigma * p.sigma)));
  return envelope * cos(x1 * p.k1 + x2 * p.k2 - t * p.w) * p.A;
}

template <class J>
J burgers_hermite_u(const BurgersHermiteParams& p, const J& x, const J& t) {
  J u(0.0);
  for (std::size_t i = 0; i < p.A.size(); ++i) {
    const J time = sin(t * (p.k1[i] * kPi)) + t * cos(t * (p.k2[i] * kPi));
    u += time * hermite(static_cast<int>(i), x * p.w[i] + p.b[i]) * p.A[i];
  }
  return u;
}

template <class J>
J kdv_packet_u(const KdvPacketParams& p, const J& x, const J& t) {
  const J s = x + t * p.c1 + p.c2;
  return exp(s * s * p.a) * cos(x * p.k - t * p.w) * p.A;
}

template <class J>
J beam_u(const BeamParams& p, const J& x, const J& t) {
  using S = std::complex<double>;
  const S I(0.0, 1.0);
  const J z = t * I + S(p.zeta);
  const J d = x - t * S(2.0 * p.k);
  const J phase = (x - t * S(p.k)) * (I * p.k);
  return pow(z, -0.5) * exp(phase - d * d * pow(z, -1.0) * S(0.25)) * S(p.A);
}

// No operator reads mixed partials, so one univariate jet per axis is enough.
template <class S, int NX, int NT, class F>
DerivativeJet<S> make_jet(const F& f, const SpaceTimePoint& p, int dim) {
  using JX = TaylorJet<S, NX, 0>;
  const JX jx = f(JX::variable_x(S(p.x1)), JX(S(p.x2)), JX(S(p.t)));
  DerivativeJet<S> out;
  out.spatial_dim = dim;
  out.x_order = NX;
  out.t_order = NT;
  out.u = jx.value();
  if constexpr (NX >= 1) out.du_dx = jx.derivative(1, 0);
  if constexpr (NX >= 2) out.d2u_dx2 = jx.derivative(2, 0);
  if constexpr (NX >= 3) out.d3u_dx3 = jx.derivative(3, 0);
  if constexpr (NT >= 1) {
    using JT = TaylorJet<S, 0, NT>;
    const JT jt = f(JT(S(p.x1)), JT(S(p.x2)), JT::variable_t(S(p.t)));
    out.du_dt = jt.derivative(0, 1);
    if constexpr (NT >= 2) out.d2u_dt2 = jt.derivative(0, 2);
  }
  if constexpr (NX >= 1) {
    if (dim == 2) {
      const JX k = f(JX(S(p.x1)), JX::variable_x(S(p.x2)), JX(S(p.t)));
      out.du_dy = k.derivative(1, 0);
      if constexpr (NX >= 2) out.d2u_dy2 = k.derivative(2, 0);
    }
  }
  return out;
}

template <class S, class F>
DerivativeJet<S> dispatch(const F& f, const SpaceTimePoint& p, int dim, JetOrders o) {
  switch (o.x * 3 + o.t) {
    case 0: return make_jet<S, 0, 0>(f, p, dim);
    case 1: return make_jet<S, 0, 1>(f, p, dim);
    case 2: return make_jet<S, 0, 2>(f, p, dim);
    case 3: return make_jet<S, 1, 0>(f, p, dim);
    case 4: return make_jet<S, 1, 1>(f, p, dim);
    case 5: return make_jet<S, 1, 2>(f, p, dim);
    case 6: return make_jet<S, 2, 0>(f, p, dim);
    case 7: return make_jet<S, 2, 1>(f, p, dim);
    case 8: return make_jet<S, 2, 2>(f, p, dim);
    case 9: return make_jet<S, 3, 0>(f, p, dim);
    case 10: return make_jet<S, 3, 1>(f, p, dim);
    case 11: return make_jet<S, 3, 2>(f, p, dim);
    default: throw std::invalid_argument("unsupported derivative order");
  }
}

void check_orders(FamilyId id, JetOrders o) {
  const auto native = info(id).native;
  if (o.x < 0 || o.t < 0 || o.x > native.x || o.t > native.t) {
    throw std::invalid_argument("eval_jet: " + family_name(id) + " supports derivative orders up to (x " +
                                std::to_string(native.x) + ", t " + std::to_string(native.t) +
                                "), requested (x " + std::to_string(o.x) + ", t " +
                                std::to_string(o.t) + ")");
  }
}

RealJet real_jet(const FamilyParams& params, const SpaceTimePoint& p, JetOrders o) {
  const int dim = family_spatial_dim(params.family);
  return std::visit(
      [&](const auto& v) -> RealJet {
        using T = std::decay_t<decltype(v)>;
        auto f = [&v](const auto& x1, const auto& x2, const auto& t) {
          if constexpr (std::is_same_v<T, WaveHermiteParams>) return wave_hermite_u(v, x1, t);
          else if constexpr (std::is_same_v<T, PointSourceParams>) return point_source_u(v, x1, t);
          else if constexpr (std::is_same_v<T, Packet2dParams>) return packet2d_u(v, x1, x2, t);
          else if constexpr (std::is_same_v<T, BurgersHermiteParams>) return burgers_hermite_u(v, x1, t);
          else if constexpr (std::is_same_v<T, KdvPacketParams>) return kdv_packet_u(v, x1, t);
          else {
            (void)x2;
            return x1;  // unreachable, complex family handled separately
          }
        };
        if constexpr (std::is_same_v<T, BeamParams>) {
          throw std::invalid_argument("eval_jet: SCHRODINGER_BEAM is complex, use eval_complex_jet");
        } else {
          return dispatch<double>(f, p, dim, o);
        }
      },
      params.values);
}

ComplexJet promote(const RealJet& r) {
  ComplexJet c;
  c.spatial_dim = r.spatial_dim;
  c.x_order = r.x_order;
  c.t_order = r.t_order;
  c.u = r.u;
  c.du_dt = r.du_dt;
  c.d2u_dt2 = r.d2u_dt2;
  c.du_dx = r.du_dx;
  c.d2u_dx2 = r.d2u_dx2;
  c.d3u_dx3 = r.d3u_dx3;
  c.du_dy = r.du_dy;
  c.d2u_dy2 = r.d2u_dy2;
  return c;
}

void check_variant(const FamilyParams& params) {
  const std::size_t expected = static_cast<std::size_t>(params.family);
  if (params.values.index() != expected) {
    throw std::invalid_argument("family params do not match family " + family_name(params.family));
  }
}

}  // namespace

std::string family_name(FamilyId id) { return info(id).name; }

FamilyId family_from_name(std::string_view name) {
  for (const auto& f : family_table())
    if (name == f.name) return f.id;
  throw std::invalid_argument("unknown family '" + std::string(name) + "'");
}

int family_spatial_dim(FamilyId id) { return info(id).spatial_dim; }
bool family_is_complex(FamilyId id) { return info(id).complex; }
bool family_uses_k(FamilyId id) { return info(id).uses_k; }
JetOrders family_native_orders(FamilyId id) { return info(id).native; }
std::vector<std::string> family_symbols(FamilyId id) { return info(id).symbols; }

FamilyLaws default_laws(FamilyId id) {
  FamilyLaws l;
  l.K = info(id).uses_k ? 2 : 0;
  switch (id) {
    case FamilyId::Wave1dHermite:
      l.laws = {{"A", {1, 1}}, {"k", {0, 1}}, {"a", {0, 1}}, {"w", {-2, 1}}, {"b", {0, 1}}};
      break;
    case FamilyId::Wave1dPointSource:
      l.laws = {{"A", {0.2, 1}}, {"a", {1, 1}}, {"b", {0, 1}}, {"sigma", {0.2, 0.5}}};
      break;
    case FamilyId::Wave2dPacket:
      l.laws = {{"A", {1, 1}}, {"a1", {2, 1}}, {"a2", {1, 1}}, {"sigma", {1, 1}},
                {"k1", {0, 1}}, {"k2", {0, 1}}, {"w", {3, 1}}};
      break;
    case FamilyId::BurgersHermite:
      l.laws = {{"A", {0.2, 1}}, {"k1", {0.8, 1}}, {"k2", {1, 2}}, {"w", {1, 1}}, {"b", {0, 1}}};
      break;
    case FamilyId::KdvPacket:
      l.laws = {{"A", {1, 1}}, {"a", {-1, 1}}, {"c1", {0, 1}}, {"c2", {-1, 1}}, {"k", {0, 1}}, {"w", {0, 1}}};
      break;
    case FamilyId::SchrodingerBeam:
      l.laws = {{"A", {0.5, 0.5}}, {"zeta", {0.3, 0.5}}, {"k", {1, 0.5}}};
      break;
  }
  return l;
}

std::vector<std::pair<std::string, std::vector<double>>> named_values(const FamilyParams& p) {
  check_variant(p);
  using Named = std::vector<std::pair<std::string, std::vector<double>>>;
  return std::visit(
      [](const auto& v) -> Named {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WaveHermiteParams>)
          return {{"A", v.A}, {"k", v.k}, {"a", v.a}, {"w", {v.w}}, {"b", {v.b}}};
        else if constexpr (std::is_same_v<T, PointSourceParams>)
          return {{"A", v.A}, {"a", v.a}, {"b", v.b}, {"sigma", v.sigma}};
        else if constexpr (std::is_same_v<T, Packet2dParams>)
          return {{"A", {v.A}}, {"a1", {v.a1}}, {"a2", {v.a2}}, {"sigma", {v.sigma}},
                  {"k1", {v.k1}}, {"k2", {v.k2}}, {"w", {v.w}}};
        else if constexpr (std::is_same_v<T, BurgersHermiteParams>)
          return {{"A", v.A}, {"k1", v.k1}, {"k2", v.k2}, {"w", v.w}, {"b", v.b}};
        else if constexpr (std::is_same_v<T, KdvPacketParams>)
          return {{"A", {v.A}}, {"a", {v.a}}, {"c1", {v.c1}}, {"c2", {v.c2}}, {"k", {v.k}}, {"w", {v.w}}};
        else
          return {{"A", {v.A}}, {"zeta", {v.zeta}}, {"k", {v.k}}};
      },
      p.values);
}

FamilyParams params_from_named(FamilyId id, int K,
                               const std::vector<std::pair<std::string, std::vector<double>>>& v) {
  std::map<std::string, std::vector<double>> m(v.begin(), v.end());
  const std::size_t per_index = static_cast<std::size_t>(K + 1);
  auto vec = [&](const std::string& s) {
    auto it = m.find(s);
    if (it == m.end()) throw std::invalid_argument(family_name(id) + ": missing parameter '" + s + "'");
    if (it->second.size() != per_index) {
      throw std::invalid_argument(family_name(id) + ": parameter '" + s + "' needs K+1 values");
    }
    return it->second;
  };
  auto one = [&](const std::string& s) {
    auto it = m.find(s);
    if (it == m.end()) throw std::invalid_argument(family_name(id) + ": missing parameter '" + s + "'");
    if (it->second.size() != 1) {
      throw std::invalid_argument(family_name(id) + ": parameter '" + s + "' is a scalar");
    }
    return it->second[0];
  };
  if (m.size() != info(id).symbols.size()) {
    throw std::invalid_argument(family_name(id) + ": unexpected parameter set");
  }
  FamilyParams p;
  p.family = id;
  p.K = info(id).uses_k ? K : 0;
  switch (id) {
    case FamilyId::Wave1dHermite:
      p.values = WaveHermiteParams{vec("A"), vec("k"), vec("a"), one("w"), one("b")};
      break;
    case FamilyId::Wave1dPointSource:
      p.values = PointSourceParams{vec("A"), vec("a"), vec("b"), vec("sigma")};
      break;
    case FamilyId::Wave2dPacket:
      p.values = Packet2dParams{one("A"), one("a1"), one("a2"), one("sigma"), one("k1"), one("k2"), one("w")};
      break;
    case FamilyId::BurgersHermite:
      p.values = BurgersHermiteParams{vec("A"), vec("k1"), vec("k2"), vec("w"), vec("b")};
      break;
    case FamilyId::KdvPacket:
      p.values = KdvPacketParams{one("A"), one("a"), one("c1"), one("c2"), one("k"), one("w")};
      break;
    case FamilyId::SchrodingerBeam:
      p.values = BeamParams{one("A"), one("zeta"), one("k")};
      break;
  }
  return p;
}

FamilyParams sample_params(FamilyId id, const FamilyLaws& laws, std::mt19937_64& rng) {
  const auto& fi = info(id);
  if (fi.uses_k && (laws.K < 0 || laws.K > kMaxHermiteIndex)) {
    throw std::invalid_argument(family_name(id) + ": K must lie in [0, " +
                                std::to_string(kMaxHermiteIndex) + "]");
  }
  const int K = fi.uses_k ? laws.K : 0;
  std::vector<std::pair<std::string, std::vector<double>>> named;
  for (const auto& symbol : fi.symbols) {
    auto it = laws.laws.find(symbol);
    if (it == laws.laws.end()) {
      throw std::invalid_argument(family_name(id) + ": no sampling law for '" + symbol + "'");
    }
    if (!(it->second.stddev >= 0.0) || !std::isfinite(it->second.mean)) {
      throw std::invalid_argument(family_name(id) + ": invalid law for '" + symbol + "'");
    }
    std::normal_distribution<double> dist(it->second.mean, it->second.stddev);
    auto valid = [&](double x) {
      if (symbol == "sigma") return std::abs(x) >= kSigmaFloor;
      if (id == FamilyId::KdvPacket && symbol == "a") return x < 0.0;
      if (symbol == "zeta") return x > 0.0;
      return true;
    };
    const int count = is_per_index(id, symbol) ? K + 1 : 1;
    std::vector<double> values;
    for (int i = 0; i < count; ++i) {
      double x = dist(rng);
      int redraws = 0;
      while (!valid(x)) {
        if (++redraws > kMaxResamples) {
          throw std::runtime_error(family_name(id) + ": more than " + std::to_string(kMaxResamples) +
                                   " resamples for '" + symbol + "', check its sampling law");
        }
        x = dist(rng);
      }
      values.push_back(x);
    }
    named.emplace_back(symbol, std::move(values));
  }
  return params_from_named(id, K, named);
}

RealJet eval_jet(const FamilyParams& params, const SpaceTimePoint& p, JetOrders orders) {
  check_variant(params);
  check_orders(params.family, orders);
  return real_jet(params, p, orders);
}

RealJet eval_jet(const FamilyParams& params, const SpaceTimePoint& p) {
  return eval_jet(params, p, family_native_orders(params.family));
}

ComplexJet eval_complex_jet(const FamilyParams& params, const SpaceTimePoint& p, JetOrders orders) {
  check_variant(params);
  check_orders(params.family, orders);
  if (const auto* beam = std::get_if<BeamParams>(&params.values)) {
    auto f = [beam](const auto& x1, const auto&, const auto& t) { return beam_u(*beam, x1, t); };
    return dispatch<std::complex<double>>(f, p, 1, orders);
  }
  return promote(real_jet(params, p, orders));
}

ComplexJet eval_complex_jet(const FamilyParams& params, const SpaceTimePoint& p) {
  return eval_complex_jet(params, p, family_native_orders(params.family));
}

std::complex<double> eval_value(const FamilyParams& params, const SpaceTimePoint& p) {
  return eval_complex_jet(params, p, JetOrders{0, 0}).u;
}

}  // namespace oplearn
