#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "oplearn/cases.hpp"
#include "oplearn/families.hpp"
#include "oplearn/grid.hpp"
#include "oplearn/targets.hpp"

namespace oplearn {

enum class Scale { Desk, Paper };

std::string scale_name(Scale s);
Scale scale_from_name(const std::string& name);

inline constexpr int kConfigSchemaVersion = 1;

/// Everything one experiment needs. Counts are stored as totals (as tabulated); per-axis
/// factors are derived by the helpers below.
struct ExperimentConfig {
  CaseId case_id = CaseId::Wave1d1;
  Scale scale = Scale::Desk;
  std::uint64_t seed = 0;

  // target problem
  std::array<double, 2> domain_of_interest{-1.0, 1.0};  // per spatial axis
  double time_horizon = 1.0;
  double viscosity = 0.2;
  double wave2d_k = 2.0;
  int theta_count = 20;

  // data generation
  std::array<double, 2> generation_domain{-3.0, 3.0};
  int accept_initial_points = 51;                  // per spatial axis
  std::array<int, 2> accept_source_points{101, 101};  // (per spatial axis, time)
  std::vector<double> tolerances{0.5, 1.0, 1.0};
  FamilyLaws laws;

  // training data
  int N = 5000;
  int m_initial = 51;   // total initial sensors
  int m_source = 225;   // total source sensors
  int p_initial = 101;  // random initial locations
  int p_interior = 51 * 51;

  // architecture
  std::string trunk = "2-400*4-100";
  std::string branch_initial = "51-100*3-100";
  std::string branch_source = "225-225*3-100";
  bool use_source_branch = true;

  // optimisation
  double lr = 1e-3;
  int lr_step = 500;
  double lr_decay = 0.96;
  int batch_size = 8192;
  int iterations = 80000;
  int eval_every = 1000;

  // evaluation grid (per spatial axis, time)
  std::array<int, 2> eval_points{201, 101};

  // reference solvers
  double wave_dx = 0.01;
  double wave_dt = 0.005;
  double wave_half_width = 4.0;
  double burgers_dx = 0.01;
  double burgers_dt = 0.01;
  double burgers_half_width = 8.0;
  double schrodinger_half_width = 20.0;
  int schrodinger_modes = 2048;

  // physics-informed residual term; weight 0 disables it
  double physics_weight = 0.0;
  int physics_points = 1000;
  double physics_fd_step = 1e-3;

  int spatial_dim() const;
  int initial_function_count() const;  // phi_0 (, phi_1)
  int sensors_initial_per_axis() const;
  std::array<int, 2> sensors_source_per_axis() const;  // (space per axis, time)
  int interior_per_axis() const;  // same count on every spatial axis and time
  std::vector<int> branch_dims_initial() const;
  std::vector<int> branch_dims_source() const;
  std::vector<int> trunk_dims() const;
  TargetOptions target_options() const;

  /// Throws std::invalid_argument describing the first inconsistency.
  void validate() const;
};

ExperimentConfig registry_config(CaseId id, Scale scale);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Strict: unknown keys, missing keys and type errors are reported with the key path.
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

/// FNV-1a of the canonical JSON dump.
std::string config_hash(const ExperimentConfig& cfg);

/// Evaluation grid over the domain of interest and [0, T].
SpaceTimeGrid eval_grid(const ExperimentConfig& cfg);

/// Whole-number d-th root of n, or throws.
int exact_root(int n, int d, const std::string& what);

}  // namespace oplearn
