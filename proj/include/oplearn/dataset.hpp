#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oplearn/config.hpp"
#include "oplearn/families.hpp"
#include "oplearn/grid.hpp"
#include "oplearn/mionet.hpp"
#include "oplearn/targets.hpp"

namespace oplearn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Seed of the index-th independent stream derived from `seed` (SplitMix64 finaliser).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Sensor grids and output locations shared by every sample.
struct SensorLayout {
  SpaceTimeGrid initial;     // spatial grid at t = 0 on the generation domain
  SpaceTimeGrid source;      // space-time grid on the generation domain x [0, T]
  Eigen::MatrixXd outputs;   // (spatial_dim + 1) x P; the first p_initial columns have t = 0
  int p_initial = 0;

  Eigen::Index P() const { return outputs.cols(); }
  bool operator==(const SensorLayout& o) const;
};

SensorLayout make_sensor_layout(const ExperimentConfig& cfg);

/// One scalar component checked by the acceptance rule, e.g. phi_0, or Im f.
struct Component {
  std::string name;
  bool source = false;  // false: initial trace `index`, true: source term
  int index = 0;        // initial trace index
  bool imag = false;    // imaginary part (complex cases)
};

/// (phi_0, [phi_1,] f) for real cases; (Re phi, Im phi, Re f, Im f) for the complex case.
std::vector<Component> case_components(CaseId id);

/// Grids and target values of every component on the acceptance grids.
struct AcceptanceProblem {
  PdeSpec pde;
  FamilyId family;
  std::vector<Component> components;
  std::vector<double> tolerances;
  SpaceTimeGrid initial_grid;
  SpaceTimeGrid source_grid;
  std::vector<std::vector<Eigen::VectorXd>> targets;  // per component, one vector per target
};

AcceptanceProblem make_acceptance_problem(const ExperimentConfig& cfg);

/// Values of one component on the problem's grid for a family sample.
Eigen::VectorXd component_values(const AcceptanceProblem& problem, const FamilyParams& params,
                                 std::size_t component);

/// Metric-1 unless the target is identically zero, then metric-2.
/// For tolerance 0 the value is the max absolute deviation, compared against 1e-12.
double component_error(const Eigen::VectorXd& candidate, const Eigen::VectorXd& target, double tolerance);
bool within_tolerance(double error, double tolerance);

inline constexpr double kExactTolerance = 1e-12;

struct AcceptanceResult {
  bool accepted = false;
  std::vector<double> errors;  // components checked, in order; stops at the first failure
};

/// Checks components in order; several targets for one component pass if any one does.
AcceptanceResult accept_sample(const AcceptanceProblem& problem, const FamilyParams& params);

/// True iff the candidate source error is within tolerance for at least one target.
bool multi_target_accept(const Eigen::VectorXd& candidate, const std::vector<Eigen::VectorXd>& targets,
                         double tolerance);

struct GenerationStats {
  std::int64_t candidates = 0;
  std::int64_t accepted = 0;
  std::vector<std::int64_t> rejections;  // per component
  double acceptance_rate() const {
    return candidates > 0 ? static_cast<double>(accepted) / static_cast<double>(candidates) : 0.0;
  }
  bool operator==(const GenerationStats&) const = default;
};

/// Accepted samples with their sensor and output values, all row-major [sample x entry].
/// Complex values are interleaved (re, im).
struct OperatorDataset {
  ExperimentConfig config;
  SensorLayout layout;
  std::vector<FamilyParams> params;
  std::vector<std::int64_t> candidate_index;
  RowMatrix phi;  // per initial function, the initial sensors
  RowMatrix f;    // source sensors
  RowMatrix u;    // output locations
  RowMatrix acceptance_errors;  // per component
  GenerationStats stats;

  Eigen::Index size() const { return u.rows(); }
  bool is_complex() const;
};

struct BuildOptions {
  int threads = 1;
  std::ostream* report = nullptr;  // gen_report.csv rows
  std::int64_t draw_budget = 1'000'000;
  double min_acceptance_rate = 1e-4;
};

/// Draws candidates with per-index streams until N are accepted (in candidate order, so any
/// thread count gives the same dataset). Throws std::runtime_error when the acceptance rate
/// stays below min_acceptance_rate at a multiple of draw_budget draws.
OperatorDataset build_dataset(const ExperimentConfig& cfg, const BuildOptions& options = {});

/// Branch inputs (sensors x N per channel) in model channel order.
ChannelInputs channel_inputs(const OperatorDataset& ds);

/// Target sensor values for the trained operator, one vector per channel.
/// `source` selects the target source for multi-target cases.
std::vector<Eigen::VectorXd> target_sensor_inputs(const ExperimentConfig& cfg, const SensorLayout& layout,
                                                  std::size_t source = 0);

/// Branch sensor counts per channel implied by the config.
std::vector<int> channel_sensor_counts(const ExperimentConfig& cfg);

inline constexpr int kDatasetSchemaVersion = 1;

void save_dataset(const OperatorDataset& ds, const std::filesystem::path& dir);
OperatorDataset load_dataset(const std::filesystem::path& dir);

}  // namespace oplearn
