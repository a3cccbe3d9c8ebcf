#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oplearn/cases.hpp"
#include "oplearn/config.hpp"
#include "oplearn/dataset.hpp"
#include "oplearn/families.hpp"
#include "oplearn/metrics.hpp"
#include "oplearn/mionet.hpp"
#include "oplearn/nn/adam.hpp"
#include "oplearn/pde.hpp"
#include "oplearn/pipeline.hpp"
#include "oplearn/reference.hpp"
#include "oplearn/targets.hpp"
#include "oplearn/taylor_jet.hpp"
#include "oplearn/trainer.hpp"
#include "oracles.hpp"

using namespace oplearn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  double wall_seconds = 0.0;  // time spent outside this process, if any
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
  double budget_seconds = 0.0;  // 0: no runtime bound
  int budget_cores = 1;         // core count the budget is stated for
};

struct Settings {
  fs::path work;
  fs::path golden;
  std::uint64_t seed = 1;
};

Settings settings;

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(3) << std::scientific << v;
  return s.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

int hardware_threads() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

// ---------------------------------------------------------------------------------------------
// 1. manufactured pairs

const std::vector<CaseId> kFamilyCases{CaseId::Wave1d1, CaseId::Wave1d2, CaseId::Wave2d,
                                       CaseId::Burgers1, CaseId::Kdv, CaseId::Schrodinger};

/// L[u] written out from the equations, independent of apply_operator.
std::complex<double> operator_by_hand(Equation e, const ComplexJet& j, double nu) {
  const std::complex<double> I(0, 1);
  switch (e) {
    case Equation::Wave1d: return j.d2u_dt2 - j.d2u_dx2;
    case Equation::Wave2d: return j.d2u_dt2 - j.d2u_dx2 - j.d2u_dy2;
    case Equation::Burgers: return j.du_dt - j.u * j.du_dx - nu * j.d2u_dx2;
    case Equation::Kdv: return j.du_dt + 6.0 * j.u * j.du_dx + j.d3u_dx3;
    case Equation::Schrodinger: return I * j.du_dt + j.d2u_dx2;
  }
  throw std::logic_error("unknown equation");
}

Outcome manufactured_pairs() {
  std::mt19937_64 rng(settings.seed);
  double worst_residual = 0.0, worst_fd = 0.0, worst_fd3 = 0.0;
  std::ostringstream per_family;
  for (CaseId id : kFamilyCases) {
    ExperimentConfig cfg = registry_config(id, Scale::Desk);
    cfg.N = 100;
    cfg.seed = settings.seed;
    const OperatorDataset ds = build_dataset(cfg, {.threads = hardware_threads()});
    const PdeSpec pde = case_pde(id);
    const bool complex = ds.is_complex();
    const SpaceTimeGrid& grid = ds.layout.source;
    std::uniform_int_distribution<Eigen::Index> pick(0, grid.size() - 1);
    std::uniform_real_distribution<double> x(cfg.generation_domain[0], cfg.generation_domain[1]);
    std::uniform_real_distribution<double> t(0.0, cfg.time_horizon);
    double fam_residual = 0.0;
    for (Eigen::Index n = 0; n < ds.size(); ++n) {
      const FamilyParams& params = ds.params[static_cast<std::size_t>(n)];
      for (int q = 0; q < 100; ++q) {
        // the stored source sensor against the operator applied by hand
        const Eigen::Index k = pick(rng);
        const ComplexJet j = eval_complex_jet(params, grid.point(k));
        const std::complex<double> stored =
            complex ? std::complex<double>(ds.f(n, 2 * k), ds.f(n, 2 * k + 1)) : std::complex<double>(ds.f(n, k));
        fam_residual = std::max(fam_residual, std::abs(operator_by_hand(pde.equation, j, pde.viscosity) - stored));
        // and at an off-grid point against the library operator
        SpaceTimePoint p{x(rng), cfg.spatial_dim() == 2 ? x(rng) : 0.0, t(rng)};
        const ComplexJet jp = eval_complex_jet(params, p);
        fam_residual = std::max(fam_residual, std::abs(operator_by_hand(pde.equation, jp, pde.viscosity) -
                                                       apply_operator(pde, jp)));
      }
    }
    worst_residual = std::max(worst_residual, fam_residual);

    // analytic jets against long-double finite differences with h = 1e-4
    const FamilyId fam = case_family(id);
    const JetOrders native = family_native_orders(fam);
    const int dim = family_spatial_dim(fam);
    std::uniform_real_distribution<double> xo(-2.5, 2.5), to(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const FamilyParams& params = ds.params[static_cast<std::size_t>(trial % ds.size())];
      const SpaceTimePoint p{xo(rng), dim == 2 ? xo(rng) : 0.0, to(rng)};
      const ComplexJet j = eval_complex_jet(params, p);
      auto check = [&](std::complex<double> v, int axis, int order) {
        const double e = oracle::rel_err(v, oracle::fd_derivative(params, p, axis, order, 1e-4));
        double& w = order == 3 ? worst_fd3 : worst_fd;
        w = std::max(w, e);
      };
      check(j.du_dx, 0, 1);
      if (native.x >= 2) check(j.d2u_dx2, 0, 2);
      if (native.x >= 3) check(j.d3u_dx3, 0, 3);
      check(j.du_dt, 2, 1);
      if (native.t >= 2) check(j.d2u_dt2, 2, 2);
      if (dim == 2) {
        check(j.du_dy, 1, 1);
        check(j.d2u_dy2, 1, 2);
      }
    }
    per_family << ' ' << family_name(fam) << '=' << fmt(fam_residual);
  }
  return {worst_residual < 1e-10 && worst_fd < 1e-5 && worst_fd3 < 1e-4,
          "max |L[u]-f| " + fmt(worst_residual) + " (<1e-10), jet vs FD " + fmt(worst_fd) + " (<1e-5), u_xxx " +
              fmt(worst_fd3) + " (<1e-4);" + per_family.str()};
}

// ---------------------------------------------------------------------------------------------
// 2. printed formulas

using Jet32 = TaylorJet<double, 3, 2>;

RealJet to_real_jet(const Jet32& u) {
  RealJet j;
  j.x_order = 3;
  j.t_order = 2;
  j.u = u.derivative(0, 0);
  j.du_dx = u.derivative(1, 0);
  j.d2u_dx2 = u.derivative(2, 0);
  j.d3u_dx3 = u.derivative(3, 0);
  j.du_dt = u.derivative(0, 1);
  j.d2u_dt2 = u.derivative(0, 2);
  return j;
}

Outcome printed_formulas() {
  std::mt19937_64 rng(settings.seed + 2);
  std::uniform_real_distribution<double> xs(-1.0, 1.0), ts(0.0, 1.0);
  const PdeSpec wave = PdeSpec::make(Equation::Wave1d), kdv = PdeSpec::make(Equation::Kdv);
  const TargetFunctions wave_targets = target_functions(CaseId::Wave1d1);
  const TargetFunctions kdv_targets = target_functions(CaseId::Kdv);
  double worst_wave = 0.0, worst_kdv = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = xs(rng), t = ts(rng);
    const Jet32 X = Jet32::variable_x(x), T = Jet32::variable_t(t);

    const Jet32 uw = exp(-(X * X)) * cos(T - X);
    const double printed_w =
        std::exp(-x * x) * (4 * x * std::sin(t - x) + (2 - 4 * x * x) * std::cos(t - x));
    worst_wave = std::max(worst_wave, std::abs(apply_operator(wave, to_real_jet(uw)) - printed_w));
    worst_wave = std::max(worst_wave, std::abs(wave_targets.sources[0]({x, 0.0, t}) - printed_w));

    const Jet32 d = X - T;
    const Jet32 uk = exp(-(d * d));
    const double printed_k = std::exp(-(x - t) * (x - t)) *
                             (12 * (t - x) * std::exp(-(t - x) * (t - x)) + 14 * (x - t) + 24 * t * x * (x - t) +
                              8 * (t * t * t - x * x * x));
    worst_kdv = std::max(worst_kdv, std::abs(apply_operator(kdv, to_real_jet(uk)) - printed_k));
    worst_kdv = std::max(worst_kdv, std::abs(kdv_targets.sources[0]({x, 0.0, t}) - printed_k));
  }
  return {worst_wave < 1e-10 && worst_kdv < 1e-10,
          "wave |df| " + fmt(worst_wave) + ", kdv |df| " + fmt(worst_kdv) + " (<1e-10)"};
}

// ---------------------------------------------------------------------------------------------
// 3. gradients

template <typename Model>
double loss_with(Model m, const Eigen::VectorXd& params, const ChannelInputs& in, const Batch& b) {
  m.unpack(params);
  return model_gradients(OperatorModel(m), in, b).loss;
}

template <typename Model>
double worst_gradient_error(const Model& model, const ChannelInputs& in, const Batch& b) {
  const Eigen::VectorXd g = model_gradients(OperatorModel(model), in, b).gradient;
  const Eigen::VectorXd p = model.pack();
  const double h = 1e-3;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    auto at = [&](double s) {
      Eigen::VectorXd q = p;
      q(k) += s;
      return loss_with(model, q, in, b);
    };
    const double fd = (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
    worst = std::max(worst, std::abs(fd - g(k)) / std::max(std::abs(fd), 1e-6));
  }
  return worst;
}

Outcome gradients() {
  std::mt19937_64 rng(settings.seed + 3);
  std::uniform_int_distribution<int> count(1, 3), width(2, 6), latent(1, 5), sensors(1, 5);
  std::normal_distribution<double> normal(0.0, 0.5);
  auto jiggle = [&](auto& model) {
    Eigen::VectorXd p = model.pack();
    for (Eigen::Index k = 0; k < p.size(); ++k) p(k) += 0.1 * normal(rng);
    model.unpack(p);
  };
  auto inputs = [&](const std::vector<int>& counts) {
    ChannelInputs in;
    for (int c : counts) {
      Eigen::MatrixXd m(c, 4);
      for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = normal(rng);
      in.push_back(m);
    }
    return in;
  };
  auto batch = [&](int heads) {
    Batch b;
    std::uniform_int_distribution<int> s(0, 3);
    for (int k = 0; k < 6; ++k) b.sample.push_back(s(rng));
    b.locations.resize(2, 6);
    b.targets.resize(heads, 6);
    for (Eigen::Index i = 0; i < b.locations.size(); ++i) b.locations(i) = normal(rng);
    for (Eigen::Index i = 0; i < b.targets.size(); ++i) b.targets(i) = normal(rng);
    return b;
  };
  double worst_real = 0.0, worst_complex = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int p = latent(rng);
    std::vector<std::vector<int>> dims;
    for (int i = 0, n = count(rng); i < n; ++i) dims.push_back({sensors(rng), width(rng), p});
    MIONetModel m = MIONetModel::glorot(dims, {2, width(rng), width(rng), p}, rng);
    jiggle(m);
    worst_real = std::max(worst_real, worst_gradient_error(m, inputs(m.sensor_counts()), batch(1)));

    ComplexMIONetModel c = ComplexMIONetModel::glorot(dims, {2, width(rng), p}, rng);
    jiggle(c);
    worst_complex = std::max(worst_complex, worst_gradient_error(c, inputs(c.sensor_counts()), batch(2)));
  }
  return {worst_real < 1e-6 && worst_complex < 1e-6,
          "real " + fmt(worst_real) + ", complex-split " + fmt(worst_complex) + " (<1e-6)"};
}

// ---------------------------------------------------------------------------------------------
// 4. metrics and schedules

Outcome metrics_and_schedules() {
  std::vector<std::string> failures;
  auto expect = [&](const std::string& what, double got, double want) {
    if (!(std::abs(got - want) <= 1e-12)) failures.push_back(what + " = " + fmt(got));
  };
  expect("rel_l2([0,0],[3,4])", metric_rel_l2(Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4)), 1.0);
  expect("rel_l2([1,0],[1,1])", metric_rel_l2(Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1)), 1.0 / std::sqrt(2.0));
  expect("rel_l2(g,g)", metric_rel_l2(Eigen::Vector3d(1, -2, 5), Eigen::Vector3d(1, -2, 5)), 0.0);
  expect("mse([1,1,1,1],0)", metric_mse(Eigen::Vector4d(1, 1, 1, 1), Eigen::Vector4d::Zero()), 1.0);
  expect("mse([3,4],0)", metric_mse(Eigen::Vector2d(3, 4), Eigen::Vector2d::Zero()), std::sqrt(12.5));
  expect("mse(g,g)", metric_mse(Eigen::Vector2d(3, 4), Eigen::Vector2d(3, 4)), 0.0);
  try {
    metric_rel_l2(Eigen::Vector2d(1, 1), Eigen::Vector2d::Zero());
    failures.push_back("rel_l2 accepted a zero target");
  } catch (const std::invalid_argument& e) {
    if (std::string(e.what()).find("metric_mse") == std::string::npos) failures.push_back("zero-target message");
  }

  const nn::LrSchedule wave{0.001, 500, 0.96}, burgers{0.0005, 1000, 0.95};
  expect("lr_at(0)", lr_at(wave, 0), 0.001);
  expect("lr_at(1000)", lr_at(wave, 1000), 9.216e-4);
  expect("lr_at(999)", lr_at(burgers, 999), 0.0005);
  for (std::int64_t it = 1; it < 5000; ++it) {
    const double a = lr_at(wave, it - 1), b = lr_at(wave, it);
    if (b > a || ((it % 500 == 0) != (b != a))) {
      failures.push_back("lr_at not piecewise constant at " + std::to_string(it));
      break;
    }
  }

  auto history = [](int n, int first) {
    TrainHistory h;
    for (int i = 0; i < n; ++i) h.records.push_back({i + 1, 0.0, double(first + i), 0.5, 0.5});
    return h;
  };
  expect("last20(1..20)", last20_average(history(20, 1)).rel_l2, 10.5);
  expect("last20(1..25)", last20_average(history(25, 1)).rel_l2, 15.5);
  expect("last20(const)", last20_average(history(30, 1)).rel_l1, 0.5);
  try {
    last20_average(TrainHistory{});
    failures.push_back("last20 accepted an empty history");
  } catch (const std::invalid_argument&) {
  }

  std::string detail = failures.empty() ? "all examples within 1e-12" : "";
  for (const auto& f : failures) detail += f + "; ";
  return {failures.empty(), detail};
}

// ---------------------------------------------------------------------------------------------
// 5-7. reference solvers

double wave_error(double dx) {
  const auto sol = solve_wave1d_fd([](double x) { return std::exp(-x * x) * std::cos(x); },
                                   [](double x) { return std::exp(-x * x) * std::sin(x); },
                                   [](double x, double t) {
                                     return std::exp(-x * x) *
                                            (4 * x * std::sin(t - x) + (2 - 4 * x * x) * std::cos(t - x));
                                   },
                                   4.0, dx, dx / 2, 1.0);
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i)
    for (int n = 0; n <= 100; ++n) {
      const double x = -1.0 + 0.01 * i, t = 0.01 * n;
      worst = std::max(worst, std::abs(sol.at(x, t) - std::exp(-x * x) * std::cos(t - x)));
    }
  return worst;
}

Outcome wave_solver() {
  const double coarse = wave_error(0.02), fine = wave_error(0.01);
  const double ratio = coarse / fine;
  // wave1d-2 has no closed-form solution, so its reference comes from the FD solver
  ExperimentConfig c = registry_config(CaseId::Wave1d2, Scale::Paper);
  const auto a = case_references(c);
  c.wave_half_width *= 2;
  const auto b = case_references(c);
  if (a[0].source != ReferenceSource::FdWave) throw std::logic_error("wave1d-2 reference is not FD");
  const double shift = (a[0].values - b[0].values).cwiseAbs().maxCoeff();
  return {ratio >= 3.5 && ratio <= 4.5 && shift < 1e-8,
          "errors " + fmt(coarse) + " -> " + fmt(fine) + ", ratio " + fmt(ratio) + " (in [3.5,4.5]); width doubling " +
              fmt(shift) + " (<1e-8)"};
}

double burgers_error(const FamilyParams& p, double h) {
  const double nu = 0.2;
  const PdeSpec s = PdeSpec::make(Equation::Burgers, nu);
  auto u = [&](double x, double t) { return static_cast<double>(oracle::family_u(p, x, 0.0, t).real()); };
  const auto sol = solve_burgers_fd([&](double x) { return u(x, 0.0); },
                                    [&](double x, double t) { return apply_operator(s, eval_jet(p, {x, 0.0, t})); },
                                    nu, 8.0, h, h, 1.0, u);
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i)
    for (int n = 0; n <= 100; ++n) {
      const double x = -1.0 + 0.01 * i, t = 0.01 * n;
      worst = std::max(worst, std::abs(sol.at(x, t) - u(x, t)));
    }
  return worst;
}

Outcome burgers_solver() {
  // a manufactured solution from the Burgers family; its boundary values are supplied exactly
  std::mt19937_64 rng(settings.seed + 6);
  const FamilyParams p = sample_params(FamilyId::BurgersHermite, default_laws(FamilyId::BurgersHermite), rng);
  const double coarse = burgers_error(p, 0.01), fine = burgers_error(p, 0.005);
  const double factor = coarse / fine;
  return {coarse < 5e-3 && factor >= 1.8,
          "max error " + fmt(coarse) + " at dx=dt=0.01 (<5e-3), refined " + fmt(fine) + ", factor " + fmt(factor) +
              " (>=1.8)"};
}

Outcome schrodinger_solver() {
  std::mt19937_64 rng(settings.seed + 7);
  const FamilyParams p = sample_params(FamilyId::SchrodingerBeam, default_laws(FamilyId::SchrodingerBeam), rng);
  std::vector<double> xs;
  for (int i = 0; i <= 200; ++i) xs.push_back(-1.0 + 0.01 * i);
  const ExperimentConfig c = registry_config(CaseId::Schrodinger, Scale::Desk);
  const auto sol = solve_schrodinger_spectral([&](double x) { return eval_value(p, {x, 0.0, 0.0}); },
                                              c.schrodinger_half_width, c.schrodinger_modes, {0.0, 0.5, 1.0}, xs);
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto e = oracle::family_u(p, xs[i], 0.0, 1.0);
    worst = std::max(worst, std::abs(sol.values(2, static_cast<Eigen::Index>(i)) -
                                     std::complex<double>(double(e.real()), double(e.imag()))));
  }
  double drift = 0.0;
  for (double m : sol.mass) drift = std::max(drift, std::abs(m - sol.mass[0]) / sol.mass[0]);
  return {worst < 1e-8 && drift < 1e-10, "max |u-u*| at t=1 " + fmt(worst) + " (<1e-8), mass drift " + fmt(drift) +
                                             " (<1e-10)"};
}

// ---------------------------------------------------------------------------------------------
// 8-11. desk-scale end-to-end runs through the command-line tool

/// Runs `oplearn reproduce` for a desk case unless a finished run with the same config sits in dir.
fs::path desk_run(CaseId id, const std::string& tag, bool reuse) {
  const fs::path dir = settings.work / (case_name(id) + "_" + tag);
  ExperimentConfig cfg = registry_config(id, Scale::Desk);
  cfg.seed = settings.seed;
  if (reuse && fs::exists(dir / "reports" / "eval.json") && fs::exists(dir / "run_manifest.json")) {
    try {
      if (config_hash(read_run_manifest(dir / "run_manifest.json").config) == config_hash(cfg)) return dir;
    } catch (const std::exception&) {
    }
  }
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cmd = std::string(OPLEARN_CLI) + " reproduce --case " + case_name(id) + " --scale desk --seed " +
                          std::to_string(settings.seed) + " --threads " + std::to_string(hardware_threads()) +
                          " --out " + dir.string() + " > " +
                          (dir / "log.txt").string() + " 2>&1";
  std::cerr << "running " << case_name(id) << " (" << tag << ") into " << dir << '\n';
  const auto start = std::chrono::steady_clock::now();
  if (std::system(cmd.c_str()) != 0) throw std::runtime_error("reproduce failed, see " + (dir / "log.txt").string());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream(dir / "wall_seconds.txt") << secs << '\n';
  return dir;
}

Outcome desk_accuracy(CaseId id, double threshold) {
  const fs::path dir = desk_run(id, "a", true);
  const auto summary = read_json(dir / "reports" / "train_summary.json");
  const double l2 = summary.at("last20").at("rel_l2");
  const auto eval = read_json(dir / "reports" / "eval.json");
  const double wall = std::stod(slurp(dir / "wall_seconds.txt"));
  return {l2 < threshold && !summary.at("partial").get<bool>(),
          "last20 rel L2 " + fmt(l2) + " (<" + fmt(threshold) + ") over " +
              std::to_string(summary.at("records_averaged").get<int>()) + " records, final " +
              fmt(eval.at("rel_l2").get<double>()),
          wall};
}

std::string tree_bytes(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += fs::relative(f, dir).string() + '\n' + slurp(f);
  return all;
}

Outcome determinism() {
  const fs::path a = desk_run(CaseId::Wave1d1, "a", true);
  const fs::path b = desk_run(CaseId::Wave1d1, "b", false);
  const bool history = slurp(a / "reports" / "history.csv") == slurp(b / "reports" / "history.csv");
  const bool latest = tree_bytes(a / "ckpt" / "latest") == tree_bytes(b / "ckpt" / "latest");
  const bool best = tree_bytes(a / "ckpt" / "best") == tree_bytes(b / "ckpt" / "best");
  return {history && latest && best, std::string("history.csv ") + (history ? "identical" : "DIFFERS") +
                                         ", ckpt/latest " + (latest ? "identical" : "DIFFERS") + ", ckpt/best " +
                                         (best ? "identical" : "DIFFERS")};
}

// ---------------------------------------------------------------------------------------------
// 12. physics-residual smoke run

Outcome physics_smoke() {
  ExperimentConfig cfg = registry_config(CaseId::Burgers1, Scale::Desk);
  cfg.seed = settings.seed;
  cfg.iterations = 2000;
  const fs::path dir = settings.work / "physics_smoke";
  fs::create_directories(dir);
  const OperatorDataset ds = build_dataset(cfg);
  const ReferenceField ref = case_references(cfg)[0];
  const auto sensors = target_sensor_inputs(cfg, ds.layout);

  TrainConfig data_only = TrainConfig::from(cfg);
  data_only.physics = PhysicsConfig{};
  TrainConfig physics = data_only;
  physics.physics = {1.0, cfg.physics_points, cfg.physics_fd_step};
  TrainConfig zero_weight = data_only;
  zero_weight.physics = {0.0, 37, 5e-3};

  const TrainResult pure = train(make_model(cfg), ds, ref, sensors, data_only);
  const TrainResult zero = train(make_model(cfg), ds, ref, sensors, zero_weight);
  const TrainResult with = train(make_model(cfg), ds, ref, sensors, physics);
  std::ofstream(dir / "history_data.csv") << [&] {
    std::ostringstream s;
    write_history_csv(pure.history, s);
    return s.str();
  }();
  std::ofstream(dir / "history_physics.csv") << [&] {
    std::ostringstream s;
    write_history_csv(with.history, s);
    return s.str();
  }();

  bool finite = !with.history.records.empty();
  for (const auto& r : with.history.records) finite = finite && std::isfinite(r.loss) && std::isfinite(r.rel_l2);
  const bool identical = pure.model == zero.model && pure.history == zero.history;
  const auto& last_with = with.history.records.back();
  const auto& last_pure = pure.history.records.back();
  return {finite && identical,
          std::string("physics run ") + (finite ? "finished" : "FAILED") + " with " +
              std::to_string(with.history.records.size()) + " records (rel L2 " + fmt(last_with.rel_l2) +
              " vs data-only " + fmt(last_pure.rel_l2) + "); weight 0 " + (identical ? "bitwise identical" : "DIFFERS")};
}

// ---------------------------------------------------------------------------------------------
// 13. registry against the appendix tables

Outcome registry_fidelity() {
  const auto golden = read_json(settings.golden);
  std::vector<std::string> mismatches;
  std::size_t checked = 0;
  auto same = [&](const std::string& where, const nlohmann::json& got, const nlohmann::json& want) {
    ++checked;
    bool ok = got == want;
    if (!ok && got.is_array() && want.is_array() && got.size() == want.size()) {
      ok = true;
      for (std::size_t i = 0; i < got.size(); ++i) ok = ok && got[i].get<double>() == want[i].get<double>();
    } else if (!ok && got.is_number() && want.is_number()) {
      ok = got.get<double>() == want.get<double>();
    }
    if (!ok) mismatches.push_back(where + ": " + got.dump() + " != " + want.dump());
  };
  // every table row must have a registry entry; extra registry entries are not table rows
  for (const auto& [name, g] : golden.items()) {
    CaseId id;
    try {
      id = case_from_name(name);
    } catch (const std::exception&) {
      mismatches.push_back(name + ": not in the registry");
      continue;
    }
    // serialise and reload, then compare the reloaded config
    const nlohmann::json c = config_to_json(config_from_json(config_to_json(registry_config(id, Scale::Paper))));
    same(name + ".N", c.at("N"), g.at("N"));
    same(name + ".m", nlohmann::json::array({c.at("m_initial"), c.at("m_source")}), g.at("m"));
    same(name + ".P", nlohmann::json::array({c.at("p_initial"), c.at("p_interior")}), g.at("P"));
    same(name + ".trunk", c.at("trunk"), g.at("trunk"));
    same(name + ".branch1", c.at("branch_initial"), g.at("branch1"));
    same(name + ".branch2", c.at("branch_source"), g.at("branch2"));
    same(name + ".lr", c.at("lr"), g.at("lr"));
    same(name + ".M", c.at("lr_step"), g.at("M"));
    same(name + ".gamma", c.at("lr_decay"), g.at("gamma"));
    same(name + ".spatial_domain", c.at("generation_domain"), g.at("spatial_domain"));
    same(name + ".grid_initial", c.at("accept_initial_points"), g.at("grid_initial"));
    same(name + ".grid_source", c.at("accept_source_points"), g.at("grid_source"));
    same(name + ".tolerance", c.at("tolerances"), g.at("tolerance"));
    const auto& laws = c.at("laws");
    for (const auto& [symbol, law] : g.at("laws").items()) {
      if (!laws.contains(symbol)) {
        mismatches.push_back(name + ".laws." + symbol + ": missing");
        continue;
      }
      same(name + ".laws." + symbol, laws.at(symbol), law);
    }
    for (const auto& [symbol, law] : laws.items())
      if (!g.at("laws").contains(symbol)) mismatches.push_back(name + ".laws." + symbol + ": not in the tables");
  }
  std::string detail = std::to_string(golden.size()) + " cases, " + std::to_string(checked) + " values compared, " + std::to_string(mismatches.size()) +
                       " mismatches";
  for (std::size_t i = 0; i < std::min<std::size_t>(mismatches.size(), 5); ++i) detail += "; " + mismatches[i];
  return {mismatches.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oplearn acceptance checks"};
  std::vector<int> only;
  std::string work = "acceptance_runs";
  std::string golden = OPLEARN_TEST_DATA "/paper_registry.json";
  bool clean = false;
  app.add_option("--only", only, "criterion numbers to run (default: all)")->check(CLI::Range(1, 13));
  app.add_option("--work", work, "directory for desk-scale runs");
  app.add_option("--golden", golden, "golden registry file");
  app.add_option("--seed", settings.seed, "seed for the desk runs and random draws");
  app.add_flag("--clean", clean, "remove the work directory and exit");
  CLI11_PARSE(app, argc, argv);
  settings.work = fs::absolute(work);
  settings.golden = golden;
  if (clean) {
    fs::remove_all(settings.work);
    std::cout << "cleaned " << settings.work << '\n';
    return 0;
  }

  const std::vector<Criterion> criteria{
      {1, "manufactured-pair exactness", manufactured_pairs, 60},
      {2, "printed-formula cross-checks", printed_formulas, 10},
      {3, "gradient correctness", gradients, 60},
      {4, "metrics and schedules exact", metrics_and_schedules},
      {5, "FD wave solver", wave_solver, 120},
      {6, "Burgers FD solver", burgers_solver, 120},
      {7, "Schrodinger spectral reference", schrodinger_solver, 60},
      {8, "desk end-to-end wave1d-1", [] { return desk_accuracy(CaseId::Wave1d1, 5e-2); }, 30 * 60, 4},
      {9, "desk end-to-end kdv", [] { return desk_accuracy(CaseId::Kdv, 5e-2); }, 30 * 60, 4},
      {10, "desk end-to-end burgers-1", [] { return desk_accuracy(CaseId::Burgers1, 8e-2); }, 40 * 60, 4},
      {11, "determinism of reproduce", determinism},
      {12, "physics-residual smoke", physics_smoke},
      {13, "paper-scale config fidelity", registry_fidelity},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.wall_seconds > secs) secs = o.wall_seconds;  // a desk run reused from earlier in the session
    if (c.budget_seconds > 0.0) {
      // budgets stated for several cores are stretched when fewer are available
      const double budget = c.budget_seconds * std::max(1.0, double(c.budget_cores) / hardware_threads());
      if (secs > budget) {
        o.pass = false;
        o.detail += "; over the runtime budget of " + std::to_string(static_cast<int>(budget)) + " s";
      }
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << o.detail << "  ("
              << std::fixed << std::setprecision(1) << secs << " s)" << std::defaultfloat << std::endl;
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
