#pragma once

#include <complex>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "oplearn/derivative_jet.hpp"
#include "oplearn/grid.hpp"

namespace oplearn {

enum class FamilyId {
  Wave1dHermite,
  Wave1dPointSource,
  Wave2dPacket,
  BurgersHermite,
  KdvPacket,
  SchrodingerBeam,
};

std::string family_name(FamilyId id);
FamilyId family_from_name(std::string_view name);

int family_spatial_dim(FamilyId id);
bool family_is_complex(FamilyId id);
/// Whether per-index symbols carry K+1 entries.
bool family_uses_k(FamilyId id);

/// Highest (x, t) derivative orders of a jet.
struct JetOrders {
  int x = 0;
  int t = 0;
  bool operator==(const JetOrders&) const = default;
};

/// Orders the family's equation needs; eval_jet rejects anything higher.
JetOrders family_native_orders(FamilyId id);

/// Normal law N(mean, stddev).
struct NormalLaw {
  double mean = 0.0;
  double stddev = 1.0;
  bool operator==(const NormalLaw&) const = default;
};

/// Sampling rule for one family: truncation K and a normal law per symbol.
struct FamilyLaws {
  int K = 2;
  std::map<std::string, NormalLaw> laws;
  bool operator==(const FamilyLaws&) const = default;
};

FamilyLaws default_laws(FamilyId id);
/// Symbols in draw order.
std::vector<std::string> family_symbols(FamilyId id);

/// sum_i A_i sin(k_i t + a_i) H_i(w x + b)
struct WaveHermiteParams {
  std::vector<double> A, k, a;
  double w = 0.0, b = 0.0;
};
/// sum_i A_i t^2 cos(a_i t + b_i) exp(-x^2 / sigma_i^2)
struct PointSourceParams {
  std::vector<double> A, a, b, sigma;
};
/// A exp(-((x1 - a1 t)^2 + (x2 - a2 t)^2) / sigma^2) cos(k1 x1 + k2 x2 - w t)
struct Packet2dParams {
  double A = 0.0, a1 = 0.0, a2 = 0.0, sigma = 1.0, k1 = 0.0, k2 = 0.0, w = 0.0;
};
/// sum_i A_i (sin(k1_i pi t) + t cos(k2_i pi t)) H_i(w_i x + b_i)
struct BurgersHermiteParams {
  std::vector<double> A, k1, k2, w, b;
};
/// A exp(a (x + c1 t + c2)^2) cos(k x - w t)
struct KdvPacketParams {
  double A = 0.0, a = -1.0, c1 = 0.0, c2 = 0.0, k = 0.0, w = 0.0;
};
/// A / sqrt(zeta + i t) exp[i k (x - k t) - (x - 2 k t)^2 / (4 (zeta + i t))]
struct BeamParams {
  double A = 0.0, zeta = 1.0, k = 0.0;
};

struct FamilyParams {
  FamilyId family = FamilyId::Wave1dHermite;
  int K = 0;
  std::variant<WaveHermiteParams, PointSourceParams, Packet2dParams, BurgersHermiteParams,
               KdvPacketParams, BeamParams>
      values;
};

/// Symbol -> values (length K+1 for per-index symbols, 1 otherwise), in draw order.
std::vector<std::pair<std::string, std::vector<double>>> named_values(const FamilyParams& p);
FamilyParams params_from_named(FamilyId id, int K,
                               const std::vector<std::pair<std::string, std::vector<double>>>& v);

/// Lower bound on |sigma| for families that divide by it.
inline constexpr double kSigmaFloor = 0.05;
/// Maximum redraws of a constrained symbol before giving up.
inline constexpr int kMaxResamples = 1000;

/// Draws every symbol from its law, symbol-major then index. Constrained symbols
/// (|sigma| >= kSigmaFloor, KdV a < 0, zeta > 0) are redrawn; more than kMaxResamples
/// redraws throws std::runtime_error.
FamilyParams sample_params(FamilyId id, const FamilyLaws& laws, std::mt19937_64& rng);

/// Exact derivatives of a real family up to `orders` (default: the family's native orders).
/// Throws for the complex family and for orders above the native ones.
RealJet eval_jet(const FamilyParams& params, const SpaceTimePoint& p, JetOrders orders);
RealJet eval_jet(const FamilyParams& params, const SpaceTimePoint& p);

/// Same for any family; real families are promoted.
ComplexJet eval_complex_jet(const FamilyParams& params, const SpaceTimePoint& p, JetOrders orders);
ComplexJet eval_complex_jet(const FamilyParams& params, const SpaceTimePoint& p);

/// u alone.
std::complex<double> eval_value(const FamilyParams& params, const SpaceTimePoint& p);

}  // namespace oplearn
