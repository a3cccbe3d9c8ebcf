#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "oplearn/config.hpp"
#include "oplearn/dataset.hpp"
#include "oplearn/evaluation.hpp"
#include "oplearn/trainer.hpp"

namespace oplearn {

/// "oplearn <version> (<git describe>)"
std::string version_string();

/// Output tree under `out`: dataset/, ckpt/, reports/.
struct RunOptions {
  std::filesystem::path out;
  int threads = 1;
  std::ostream* log = nullptr;
};

struct RunPaths {
  std::filesystem::path dataset, ckpt, reports;
  explicit RunPaths(const std::filesystem::path& out)
      : dataset(out / "dataset"), ckpt(out / "ckpt"), reports(out / "reports") {}
};

/// Writes run_manifest.json: command, full config, config hash, seed, version. No timestamps.
void write_run_manifest(const std::filesystem::path& out, const std::string& command, const ExperimentConfig& cfg,
                        const nlohmann::json& extra = nlohmann::json::object());

struct RunManifest {
  std::string command;
  ExperimentConfig config;
  nlohmann::json extra;
};

/// Reads a manifest and checks its config hash.
RunManifest read_run_manifest(const std::filesystem::path& path);

/// Builds the dataset into dataset/ and writes reports/gen_report.csv.
OperatorDataset run_gen(const ExperimentConfig& cfg, const RunOptions& options);

/// Trains on dataset/ (which must match the config), writes ckpt/latest, ckpt/best and
/// reports/history.csv plus reports/train_summary.json.
TrainResult run_train(const ExperimentConfig& cfg, const RunOptions& options);

/// Scores ckpt/latest against the case reference; writes reports/eval.json and eval.csv, and
/// multi_target_report.csv for several targets. Throws "no model" without a checkpoint.
ErrorReport run_eval(const ExperimentConfig& cfg, const RunOptions& options);

/// gen, train and eval in sequence.
ErrorReport run_reproduce(const ExperimentConfig& cfg, const RunOptions& options);

enum class SweepAxis { GenDomain, NInput };
std::string sweep_axis_name(SweepAxis axis);
SweepAxis sweep_axis_from_name(const std::string& name);

/// Generation-domain sweeps use the half width as value and a fixed acceptance grid step.
inline constexpr double kSweepGridStep = 0.02;

/// The base config with one axis value applied.
ExperimentConfig sweep_config(const ExperimentConfig& base, SweepAxis axis, double value);

struct SweepRow {
  double axis_value = 0.0;
  bool ok = false;
  ErrorReport report;
  double wall_seconds = 0.0;
  std::string error;
};

/// One full reproduce per value under out/sweep/<axis>_<value>/; failures are recorded and the
/// sweep moves on. Writes reports/sweep_report.csv.
std::vector<SweepRow> run_sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<double>& values,
                                const RunOptions& options);

void write_sweep_report(const std::vector<SweepRow>& rows, std::ostream& out);
void write_multi_target_report(const MultiTargetReport& report, std::ostream& out);

}  // namespace oplearn
