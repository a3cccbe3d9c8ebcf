#include "oplearn/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "oplearn/reference.hpp"

namespace oplearn {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json report_json(const ErrorReport& r) {
  return {{"case", r.case_id}, {"grid", r.grid}, {"rel_l2", r.rel_l2}, {"rel_l1", r.rel_l1}, {"max_err", r.max_err}};
}

std::string format_value(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

std::string version_string() { return std::string("oplearn ") + OPLEARN_VERSION + " (" + OPLEARN_GIT_DESCRIBE + ")"; }

void write_run_manifest(const fs::path& out, const std::string& command, const ExperimentConfig& cfg,
                        const nlohmann::json& extra) {
  nlohmann::json j;
  j["format"] = "oplearn-run";
  j["command"] = command;
  j["config"] = config_to_json(cfg);
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["version"] = version_string();
  j["extra"] = extra;
  write_json(out / "run_manifest.json", j);
}

RunManifest read_run_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read run manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("run manifest " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "oplearn-run") throw std::runtime_error(path.string() + " is not a run manifest");
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config = config_from_json(j.at("config"));
  if (config_hash(m.config) != j.at("config_hash").get<std::string>()) {
    throw std::runtime_error("run manifest " + path.string() + ": config hash does not match its config");
  }
  m.extra = j.value("extra", nlohmann::json::object());
  return m;
}

OperatorDataset run_gen(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const RunPaths paths(options.out);
  auto report = open_out(paths.reports / "gen_report.csv");
  BuildOptions b;
  b.threads = options.threads;
  b.report = &report;
  if (options.log) *options.log << "gen: " << case_name(cfg.case_id) << ", N = " << cfg.N << std::endl;
  OperatorDataset ds = build_dataset(cfg, b);
  save_dataset(ds, paths.dataset);
  if (options.log) {
    *options.log << "gen: accepted " << ds.stats.accepted << " of " << ds.stats.candidates << " candidates (rate "
                 << ds.stats.acceptance_rate() << ")" << std::endl;
  }
  return ds;
}

TrainResult run_train(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const RunPaths paths(options.out);
  if (!fs::exists(paths.dataset / "manifest.json")) {
    throw std::runtime_error("no dataset in " + paths.dataset.string() + "; run gen first");
  }
  const OperatorDataset ds = load_dataset(paths.dataset);
  if (ds.config.case_id != cfg.case_id || ds.config.seed != cfg.seed || ds.size() != cfg.N ||
      !(ds.layout == make_sensor_layout(cfg))) {
    throw std::runtime_error("dataset in " + paths.dataset.string() + " was generated for a different config");
  }
  const auto references = case_references(cfg);
  // Several targets: the training history follows the first one; eval reports all of them.
  const auto sensors = target_sensor_inputs(cfg, ds.layout, 0);
  TrainOptions topt;
  topt.checkpoint_dir = paths.ckpt;
  topt.log = options.log;
  TrainResult result = train(make_model(cfg), ds, references.at(0), sensors, TrainConfig::from(cfg), topt);
  {
    auto out = open_out(paths.reports / "history.csv");
    write_history_csv(result.history, out);
  }
  if (!result.history.records.empty()) {
    const ErrorAverages a = last20_average(result.history);
    write_json(paths.reports / "train_summary.json",
               {{"case", case_name(cfg.case_id)},
                {"iterations", cfg.iterations},
                {"last20", {{"rel_l2", a.rel_l2}, {"rel_l1", a.rel_l1}, {"max_err", a.max_err}}},
                {"records_averaged", a.count},
                {"partial", a.partial}});
  }
  return result;
}

ErrorReport run_eval(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const RunPaths paths(options.out);
  const fs::path model_dir = paths.ckpt / "latest";
  if (!fs::exists(model_dir)) throw std::runtime_error("no model: no checkpoint in " + model_dir.string());
  const OperatorModel model = load_model(model_dir);
  if (channel_count(model) != static_cast<int>(channel_sensor_counts(cfg).size())) {
    throw std::runtime_error("checkpoint in " + model_dir.string() + " does not match the case");
  }
  const SensorLayout layout = make_sensor_layout(cfg);
  const auto references = case_references(cfg);
  ErrorReport report;
  nlohmann::json j;
  if (references.size() > 1) {
    const MultiTargetReport m = multi_target_report(model, cfg, layout, references);
    auto out = open_out(paths.reports / "multi_target_report.csv");
    write_multi_target_report(m, out);
    report = m.mean;
    j = report_json(report);
    j["targets"] = m.reports.size();
    j["aggregate"] = "mean over targets";
  } else {
    report = score(model, target_sensor_inputs(cfg, layout, 0), references[0]);
    report.case_id = case_name(cfg.case_id);
    j = report_json(report);
  }
  j["reference"] = reference_source_name(references[0].source);
  write_json(paths.reports / "eval.json", j);
  auto csv = open_out(paths.reports / "eval.csv");
  csv << "case,grid,rel_l2,rel_l1,max_err\n"
      << std::setprecision(17) << report.case_id << ',' << report.grid << ',' << report.rel_l2 << ','
      << report.rel_l1 << ',' << report.max_err << '\n';
  if (options.log) {
    *options.log << "eval: " << report.case_id << " on " << report.grid << ": rel_l2 " << report.rel_l2
                 << ", rel_l1 " << report.rel_l1 << ", max " << report.max_err << std::endl;
  }
  return report;
}

ErrorReport run_reproduce(const ExperimentConfig& cfg, const RunOptions& options) {
  run_gen(cfg, options);
  run_train(cfg, options);
  return run_eval(cfg, options);
}

std::string sweep_axis_name(SweepAxis axis) { return axis == SweepAxis::GenDomain ? "gen-domain" : "n-input"; }

SweepAxis sweep_axis_from_name(const std::string& name) {
  if (name == "gen-domain") return SweepAxis::GenDomain;
  if (name == "n-input") return SweepAxis::NInput;
  throw std::invalid_argument("unknown sweep axis '" + name + "' (expected gen-domain or n-input)");
}

ExperimentConfig sweep_config(const ExperimentConfig& base, SweepAxis axis, double value) {
  ExperimentConfig c = base;
  if (axis == SweepAxis::NInput) {
    if (value < 1 || value != std::floor(value)) throw std::invalid_argument("sweep: N must be a positive integer");
    c.N = static_cast<int>(value);
  } else {
    if (!(value > 0.0)) throw std::invalid_argument("sweep: generation half width must be positive");
    const double steps = 2.0 * value / kSweepGridStep;
    if (std::abs(steps - std::round(steps)) > 1e-9) {
      throw std::invalid_argument("sweep: generation domain is not a whole number of grid steps");
    }
    const int points = static_cast<int>(std::lround(steps)) + 1;
    c.generation_domain = {-value, value};
    c.accept_initial_points = points;
    c.accept_source_points[0] = points;
  }
  c.validate();
  return c;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<double>& values,
                                const RunOptions& options) {
  if (values.empty()) throw std::invalid_argument("sweep: no values given");
  std::vector<SweepRow> rows;
  for (double v : values) {
    SweepRow row;
    row.axis_value = v;
    const auto start = std::chrono::steady_clock::now();
    try {
      const ExperimentConfig cfg = sweep_config(base, axis, v);
      RunOptions sub = options;
      sub.out = options.out / "sweep" / (sweep_axis_name(axis) + "_" + format_value(v));
      write_run_manifest(sub.out, "reproduce", cfg);
      row.report = run_reproduce(cfg, sub);
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
      if (options.log) *options.log << "sweep: value " << v << " failed: " << e.what() << std::endl;
    }
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(row);
  }
  auto out = open_out(RunPaths(options.out).reports / "sweep_report.csv");
  write_sweep_report(rows, out);
  return rows;
}

void write_sweep_report(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "axis_value,rel_l2,rel_l1,max_err,wall_seconds\n" << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.axis_value << ',';
    if (r.ok) {
      out << r.report.rel_l2 << ',' << r.report.rel_l1 << ',' << r.report.max_err;
    } else {
      out << "nan,nan,nan";
    }
    out << ',' << r.wall_seconds << '\n';
  }
}

void write_multi_target_report(const MultiTargetReport& report, std::ostream& out) {
  out << "theta,rel_l2,rel_l1,max_err\n" << std::setprecision(17);
  for (std::size_t i = 0; i < report.reports.size(); ++i) {
    const auto& r = report.reports[i];
    out << report.thetas.at(i) << ',' << r.rel_l2 << ',' << r.rel_l1 << ',' << r.max_err << '\n';
  }
}

}  // namespace oplearn
