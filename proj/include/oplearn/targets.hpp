#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "oplearn/cases.hpp"
#include "oplearn/derivative_jet.hpp"
#include "oplearn/grid.hpp"

namespace oplearn {

using Field = std::function<std::complex<double>(const SpaceTimePoint&)>;

struct TargetOptions {
  double wave2d_k = 2.0;  // wavenumber of the 2D wave target, not fixed by the source problem
  int theta_count = 20;   // burgers-multi targets
};

/// The target problem's input functions.
struct TargetFunctions {
  std::vector<Field> initial;  // phi_0 (and phi_1 for wave cases), read at t = 0
  std::vector<Field> sources;  // one per target; several only for burgers-multi
  std::vector<double> thetas;  // burgers-multi frequency per source
};

TargetFunctions target_functions(CaseId id, const TargetOptions& options = {});

/// `count` values uniformly spaced on [-pi, pi], both endpoints included.
std::vector<double> multi_target_thetas(int count);

bool has_exact_solution(CaseId id);
/// Throws std::invalid_argument for cases without a closed-form solution.
std::complex<double> exact_solution(CaseId id, const SpaceTimePoint& p, const TargetOptions& options = {});
ComplexJet exact_solution_jet(CaseId id, const SpaceTimePoint& p, const TargetOptions& options = {});

}  // namespace oplearn
