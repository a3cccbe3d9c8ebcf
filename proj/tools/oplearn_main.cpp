#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oplearn/pipeline.hpp"

namespace fs = std::filesystem;
using namespace oplearn;

namespace {

struct CommonArgs {
  std::string case_name;
  std::string scale = "desk";
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string config;
  std::string from_manifest;
  int threads = 1;
  std::optional<int> iterations;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--case", a.case_name, "Case id (wave1d-1, wave1d-2, wave1d-b, wave2d, burgers-1, burgers-multi, kdv, schrodinger)");
  cmd->add_option("--scale", a.scale, "Registry scale: desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--seed", a.seed, "Seed (falls back to OPLEARN_SEED, then the config)");
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--config", a.config, "JSON config file instead of the registry entry");
  cmd->add_option("--from-manifest", a.from_manifest, "Re-run with the config recorded in a run_manifest.json");
  cmd->add_option("--threads", a.threads, "Worker threads for data generation")->check(CLI::PositiveNumber);
  cmd->add_option("--iterations", a.iterations, "Override the number of training iterations")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--quiet", a.quiet, "No progress output");
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("OPLEARN_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != std::string(s).size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("OPLEARN_SEED is not an unsigned integer: '") + s + "'");
  }
}

ExperimentConfig resolve_config(const CommonArgs& a) {
  ExperimentConfig cfg;
  const int sources = !a.config.empty() + !a.from_manifest.empty();
  if (sources > 1) throw std::invalid_argument("--config and --from-manifest are mutually exclusive");
  if (!a.from_manifest.empty()) {
    cfg = read_run_manifest(a.from_manifest).config;
  } else if (!a.config.empty()) {
    cfg = load_config(a.config);
  } else {
    if (a.case_name.empty()) {
      // fall back to the manifest of the run being continued
      const fs::path m = fs::path(a.out) / "run_manifest.json";
      if (!fs::exists(m)) throw std::invalid_argument("--case is required without --config or --from-manifest");
      return read_run_manifest(m).config;
    }
    cfg = registry_config(case_from_name(a.case_name), scale_from_name(a.scale));
  }
  if (!a.case_name.empty() && case_from_name(a.case_name) != cfg.case_id) {
    throw std::invalid_argument("--case " + a.case_name + " contradicts the config's case " + case_name(cfg.case_id));
  }
  if (a.from_manifest.empty()) {
    if (a.seed) {
      cfg.seed = *a.seed;
    } else if (auto s = env_seed()) {
      cfg.seed = *s;
    }
    if (a.iterations) cfg.iterations = *a.iterations;
  } else if (a.seed || a.iterations) {
    throw std::invalid_argument("--seed and --iterations cannot override a manifest");
  }
  cfg.validate();
  return cfg;
}

RunOptions run_options(const CommonArgs& a) {
  RunOptions o;
  o.out = a.out;
  o.threads = a.threads;
  o.log = a.quiet ? nullptr : &std::cerr;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator learning with manufactured data: generate, train, evaluate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  CommonArgs gen_a, train_a, eval_a, repro_a, sweep_a;
  auto* gen = app.add_subcommand("gen", "Generate the training dataset");
  add_common(gen, gen_a);
  auto* train_cmd = app.add_subcommand("train", "Train on a generated dataset");
  add_common(train_cmd, train_a);
  auto* eval = app.add_subcommand("eval", "Score the latest checkpoint against the reference");
  add_common(eval, eval_a);
  auto* repro = app.add_subcommand("reproduce", "gen, train and eval in one go");
  add_common(repro, repro_a);

  auto* sweep = app.add_subcommand("sweep", "Generation-domain or input-count ablation");
  add_common(sweep, sweep_a);
  std::string axis;
  std::vector<double> values;
  sweep->add_option("--axis", axis, "gen-domain (half widths) or n-input (N values)")
      ->required()
      ->check(CLI::IsMember({"gen-domain", "n-input"}));
  sweep->add_option("--values", values, "Comma-separated axis values")->required()->delimiter(',');

  auto* config = app.add_subcommand("config", "Registry configs");
  config->require_subcommand(1);
  auto* exp = config->add_subcommand("export", "Write registry configs as JSON");
  std::string exp_case, exp_scale = "desk", exp_dir;
  exp->add_option("--case", exp_case, "Case id; omit with --dir to export every case");
  exp->add_option("--scale", exp_scale, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  exp->add_option("--dir", exp_dir, "Directory for <case>.json files (stdout when absent)");

  CLI11_PARSE(app, argc, argv);

  try {
    auto run = [](const CommonArgs& a, const std::string& command, auto&& body) {
      const ExperimentConfig cfg = resolve_config(a);
      const RunOptions o = run_options(a);
      write_run_manifest(o.out, command, cfg);
      body(cfg, o);
    };
    if (gen->parsed()) run(gen_a, "gen", [](auto& c, auto& o) { run_gen(c, o); });
    if (train_cmd->parsed()) run(train_a, "train", [](auto& c, auto& o) { run_train(c, o); });
    if (eval->parsed()) {
      // eval does not rewrite the manifest of the run it scores
      run_eval(resolve_config(eval_a), run_options(eval_a));
    }
    if (repro->parsed()) run(repro_a, "reproduce", [](auto& c, auto& o) { run_reproduce(c, o); });
    if (sweep->parsed()) {
      const SweepAxis ax = sweep_axis_from_name(axis);
      run(sweep_a, "sweep", [&](auto& c, auto& o) {
        const auto rows = run_sweep(c, ax, values, o);
        write_sweep_report(rows, std::cout);
      });
    }
    if (exp->parsed()) {
      const Scale scale = scale_from_name(exp_scale);
      if (!exp_dir.empty()) {
        fs::create_directories(exp_dir);
        for (CaseId id : all_cases()) {
          if (!exp_case.empty() && case_from_name(exp_case) != id) continue;
          save_config(registry_config(id, scale), fs::path(exp_dir) / (case_name(id) + ".json"));
        }
      } else {
        if (exp_case.empty()) throw std::invalid_argument("config export: --case is required without --dir");
        std::cout << config_to_json(registry_config(case_from_name(exp_case), scale)).dump(2) << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "oplearn: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
