#include "oplearn/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "oplearn/binary_io.hpp"
#include "oplearn/nn/mlp.hpp"

namespace oplearn {

using nlohmann::json;

std::string scale_name(Scale s) { return s == Scale::Desk ? "desk" : "paper"; }

Scale scale_from_name(const std::string& name) {
  if (name == "desk") return Scale::Desk;
  if (name == "paper") return Scale::Paper;
  throw std::invalid_argument("unknown scale '" + name + "' (expected desk or paper)");
}

int exact_root(int n, int d, const std::string& what) {
  const int r = static_cast<int>(std::lround(std::pow(static_cast<double>(n), 1.0 / d)));
  int p = 1;
  for (int i = 0; i < d; ++i) p *= r;
  if (p != n) {
    throw std::invalid_argument(what + ": " + std::to_string(n) + " is not a perfect power " +
                                std::to_string(d));
  }
  return r;
}

int ExperimentConfig::spatial_dim() const { return case_pde(case_id).spatial_dim(); }

int ExperimentConfig::initial_function_count() const { return case_pde(case_id).time_order; }

int ExperimentConfig::sensors_initial_per_axis() const {
  return exact_root(m_initial, spatial_dim(), "m_initial");
}

std::array<int, 2> ExperimentConfig::sensors_source_per_axis() const {
  const int r = exact_root(m_source, spatial_dim() + 1, "m_source");
  return {r, r};
}

int ExperimentConfig::interior_per_axis() const {
  return exact_root(p_interior, spatial_dim() + 1, "p_interior");
}

std::vector<int> ExperimentConfig::branch_dims_initial() const { return nn::parse_architecture(branch_initial); }
std::vector<int> ExperimentConfig::branch_dims_source() const { return nn::parse_architecture(branch_source); }
std::vector<int> ExperimentConfig::trunk_dims() const { return nn::parse_architecture(trunk); }

TargetOptions ExperimentConfig::target_options() const {
  TargetOptions o;
  o.wave2d_k = wave2d_k;
  o.theta_count = theta_count;
  return o;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
  const int d = spatial_dim();
  const bool complex = case_pde(case_id).complex;
  const std::size_t components =
      complex ? 2 * (static_cast<std::size_t>(initial_function_count()) + 1)
              : static_cast<std::size_t>(initial_function_count()) + 1;
  if (tolerances.size() != components) {
    fail("tolerances needs " + std::to_string(components) + " entries for case " + case_name(case_id));
  }
  for (double e : tolerances)
    if (!(e >= 0.0)) fail("tolerances must be >= 0");
  if (!(domain_of_interest[0] < domain_of_interest[1])) fail("domain_of_interest must be increasing");
  if (!(generation_domain[0] < generation_domain[1])) fail("generation_domain must be increasing");
  if (!(time_horizon > 0.0)) fail("time_horizon must be positive");
  if (N < 0) fail("N must be >= 0");
  if (accept_initial_points < 2 || accept_source_points[0] < 2 || accept_source_points[1] < 2) {
    fail("acceptance grids need at least 2 points per axis");
  }
  if (eval_points[0] < 2 || eval_points[1] < 2) fail("eval_points need at least 2 points per axis");
  if (p_initial < 0) fail("p_initial must be >= 0");
  (void)sensors_initial_per_axis();
  (void)sensors_source_per_axis();
  (void)interior_per_axis();
  const auto t = trunk_dims();
  const auto bi = branch_dims_initial();
  const auto bs = branch_dims_source();
  if (t.front() != d + 1) fail("trunk input must be spatial_dim + 1 = " + std::to_string(d + 1));
  if (bi.front() != m_initial) fail("branch_initial input must equal m_initial");
  if (use_source_branch && bs.front() != m_source) fail("branch_source input must equal m_source");
  if (bi.back() != t.back() || (use_source_branch && bs.back() != t.back())) {
    fail("branch and trunk outputs must share one latent width");
  }
  if (!use_source_branch && !complex) fail("use_source_branch=false is only supported for the complex case");
  if (!(lr > 0.0) || lr_step <= 0 || !(lr_decay > 0.0)) fail("learning-rate schedule must be positive");
  if (batch_size <= 0) fail("batch_size must be positive");
  if (iterations < 0) fail("iterations must be >= 0");
  if (eval_every <= 0) fail("eval_every must be positive");
  if (!(physics_weight >= 0.0)) fail("physics_weight must be >= 0");
  if (physics_points < 1 || !(physics_fd_step > 0.0)) fail("physics_points >= 1 and physics_fd_step > 0 required");
  if (theta_count < 1) fail("theta_count must be >= 1");
  for (const auto& s : family_symbols(case_family(case_id))) {
    if (!laws.laws.contains(s)) fail("laws missing symbol '" + s + "'");
  }
  if (laws.laws.size() != family_symbols(case_family(case_id)).size()) fail("laws has unknown symbols");
}

namespace {

struct PaperRow {
  CaseId id;
  double doi;
  double gen;
  int accept_init;
  std::array<int, 2> accept_src;
  std::vector<double> eps;
  int N, m_init, m_src, p_init, p_int;
  const char* trunk;
  const char* br1;
  const char* br2;
  double lr;
  int M;
  double gamma;
  int iterations;
  std::array<int, 2> eval;
};

const std::vector<PaperRow>& paper_rows() {
  static const std::vector<PaperRow> rows{
      {CaseId::Wave1d1, 1, 3, 51, {101, 101}, {0.5, 1, 1}, 5000, 51, 225, 101, 51 * 51, "2-400*4-100",
       "51-100*3-100", "225-225*3-100", 0.001, 500, 0.96, 80000, {201, 101}},
      {CaseId::Wave1d2, 1, 2, 51, {101, 101}, {0, 0, 0.6}, 5000, 51, 225, 101, 51 * 51, "2-400*3-100",
       "51-100*3-100", "225-225*3-100", 0.001, 500, 0.97, 150000, {201, 101}},
      // Modified wave target: case-1 settings, acceptance grid step 0.02 on the generation domain.
      {CaseId::Wave1dB, 1, 3, 301, {301, 101}, {0.5, 1, 1}, 5000, 51, 225, 101, 51 * 51, "2-400*4-100",
       "51-100*3-100", "225-225*3-100", 0.001, 500, 0.96, 150000, {201, 101}},
      {CaseId::Wave2d, 1, 5, 41, {41, 41}, {0.8, 0.8, 0.8}, 2000, 100, 1000, 21, 21 * 21 * 21,
       "3-200*4-200", "100-200*3-200", "1000-200*3-200", 0.0005, 1000, 0.96, 150000, {21, 51}},
      {CaseId::Burgers1, 2, 2, 51, {51, 41}, {0, 1}, 5000, 51, 225, 101, 51 * 51, "2-400*3-100",
       "51-100*3-100", "225-225*3-100", 0.0005, 1000, 0.95, 100000, {101, 101}},
      {CaseId::BurgersMulti, 2, 4, 51, {51, 51}, {0, 1}, 5000, 51, 225, 51, 51 * 51, "2-400*3-100",
       "51-100*3-100", "225-225*3-100", 0.0005, 1000, 0.96, 150000, {101, 101}},
      {CaseId::Kdv, 1, 5, 51, {51, 51}, {0.8, 0.8}, 1000, 51, 225, 51, 51 * 51, "2-400*4-100",
       "51-100*3-100", "225-225*3-100", 0.001, 1000, 0.96, 150000, {101, 101}},
      {CaseId::Schrodinger, 2, 5, 51, {101, 101}, {0.4, 0.4, 0, 0}, 5000, 51, 225, 101, 51 * 51,
       "2-400*3-100", "51-51*3-100", "225-225*3-100", 0.001, 500, 0.96, 100000, {101, 101}},
  };
  return rows;
}

// Desk scale shrinks hidden widths and the latent width, keeping depths and input dims.
std::string shrink(const std::string& arch, int hidden, int latent) {
  auto dims = nn::parse_architecture(arch);
  for (std::size_t i = 1; i + 1 < dims.size(); ++i) dims[i] = std::min(dims[i], hidden);
  dims.back() = std::min(dims.back(), latent);
  return nn::format_architecture(dims);
}

}  // namespace

ExperimentConfig registry_config(CaseId id, Scale scale) {
  const PaperRow* row = nullptr;
  for (const auto& r : paper_rows())
    if (r.id == id) row = &r;
  if (row == nullptr) throw std::invalid_argument("no registry entry for case");
  ExperimentConfig c;
  c.case_id = id;
  c.scale = scale;
  c.domain_of_interest = {-row->doi, row->doi};
  c.generation_domain = {-row->gen, row->gen};
  c.accept_initial_points = row->accept_init;
  c.accept_source_points = row->accept_src;
  c.tolerances = row->eps;
  c.laws = default_laws(case_family(id));
  c.N = row->N;
  c.m_initial = row->m_init;
  c.m_source = row->m_src;
  c.p_initial = row->p_init;
  c.p_interior = row->p_int;
  c.trunk = row->trunk;
  c.branch_initial = row->br1;
  c.branch_source = row->br2;
  c.use_source_branch = id != CaseId::Schrodinger;
  c.lr = row->lr;
  c.lr_step = row->M;
  c.lr_decay = row->gamma;
  c.batch_size = 8192;
  c.iterations = row->iterations;
  c.eval_every = 1000;
  c.eval_points = row->eval;
  if (scale == Scale::Desk) {
    c.N = 500;
    c.trunk = shrink(c.trunk, 128, 64);
    c.branch_initial = shrink(c.branch_initial, 64, 64);
    c.branch_source = shrink(c.branch_source, 64, 64);
    c.iterations = 20000;
    c.batch_size = 2048;
    c.eval_every = 500;
  }
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json laws = json::object();
  for (const auto& [k, v] : c.laws.laws) laws[k] = {v.mean, v.stddev};
  return json{
      {"schema_version", kConfigSchemaVersion},
      {"case", case_name(c.case_id)},
      {"scale", scale_name(c.scale)},
      {"seed", c.seed},
      {"domain_of_interest", c.domain_of_interest},
      {"time_horizon", c.time_horizon},
      {"viscosity", c.viscosity},
      {"wave2d_k", c.wave2d_k},
      {"theta_count", c.theta_count},
      {"generation_domain", c.generation_domain},
      {"accept_initial_points", c.accept_initial_points},
      {"accept_source_points", c.accept_source_points},
      {"tolerances", c.tolerances},
      {"K", c.laws.K},
      {"laws", laws},
      {"N", c.N},
      {"m_initial", c.m_initial},
      {"m_source", c.m_source},
      {"p_initial", c.p_initial},
      {"p_interior", c.p_interior},
      {"trunk", c.trunk},
      {"branch_initial", c.branch_initial},
      {"branch_source", c.branch_source},
      {"use_source_branch", c.use_source_branch},
      {"lr", c.lr},
      {"lr_step", c.lr_step},
      {"lr_decay", c.lr_decay},
      {"batch_size", c.batch_size},
      {"iterations", c.iterations},
      {"eval_every", c.eval_every},
      {"eval_points", c.eval_points},
      {"wave_dx", c.wave_dx},
      {"wave_dt", c.wave_dt},
      {"wave_half_width", c.wave_half_width},
      {"burgers_dx", c.burgers_dx},
      {"burgers_dt", c.burgers_dt},
      {"burgers_half_width", c.burgers_half_width},
      {"schrodinger_half_width", c.schrodinger_half_width},
      {"schrodinger_modes", c.schrodinger_modes},
      {"physics_weight", c.physics_weight},
      {"physics_points", c.physics_points},
      {"physics_fd_step", c.physics_fd_step},
  };
}

namespace {

class StrictReader {
 public:
  explicit StrictReader(const json& j) : j_(j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  }

  template <typename T>
  T get(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw std::invalid_argument("config: missing key '" + key + "'");
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument("config: key '" + key + "' has the wrong type (" + e.what() + ")");
    }
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw std::invalid_argument("config: missing key '" + key + "'");
    return j_.at(key);
  }

  void reject_unknown() const {
    for (const auto& item : j_.items()) {
      if (!seen_.contains(item.key())) {
        throw std::invalid_argument("config: unknown key '" + item.key() + "'");
      }
    }
  }

 private:
  const json& j_;
  std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  StrictReader r(j);
  const int version = r.get<int>("schema_version");
  if (version != kConfigSchemaVersion) {
    throw std::invalid_argument("config: schema_version " + std::to_string(version) + " not supported (expected " +
                                std::to_string(kConfigSchemaVersion) + ")");
  }
  ExperimentConfig c;
  c.case_id = case_from_name(r.get<std::string>("case"));
  c.scale = scale_from_name(r.get<std::string>("scale"));
  c.seed = r.get<std::uint64_t>("seed");
  c.domain_of_interest = r.get<std::array<double, 2>>("domain_of_interest");
  c.time_horizon = r.get<double>("time_horizon");
  c.viscosity = r.get<double>("viscosity");
  c.wave2d_k = r.get<double>("wave2d_k");
  c.theta_count = r.get<int>("theta_count");
  c.generation_domain = r.get<std::array<double, 2>>("generation_domain");
  c.accept_initial_points = r.get<int>("accept_initial_points");
  c.accept_source_points = r.get<std::array<int, 2>>("accept_source_points");
  c.tolerances = r.get<std::vector<double>>("tolerances");
  c.laws.K = r.get<int>("K");
  const json& laws = r.raw("laws");
  if (!laws.is_object()) throw std::invalid_argument("config: key 'laws' must be an object");
  for (const auto& item : laws.items()) {
    const auto& v = item.value();
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw std::invalid_argument("config: key 'laws." + item.key() + "' must be [mean, stddev]");
    }
    c.laws.laws[item.key()] = NormalLaw{v[0].get<double>(), v[1].get<double>()};
  }
  c.N = r.get<int>("N");
  c.m_initial = r.get<int>("m_initial");
  c.m_source = r.get<int>("m_source");
  c.p_initial = r.get<int>("p_initial");
  c.p_interior = r.get<int>("p_interior");
  c.trunk = r.get<std::string>("trunk");
  c.branch_initial = r.get<std::string>("branch_initial");
  c.branch_source = r.get<std::string>("branch_source");
  c.use_source_branch = r.get<bool>("use_source_branch");
  c.lr = r.get<double>("lr");
  c.lr_step = r.get<int>("lr_step");
  c.lr_decay = r.get<double>("lr_decay");
  c.batch_size = r.get<int>("batch_size");
  c.iterations = r.get<int>("iterations");
  c.eval_every = r.get<int>("eval_every");
  c.eval_points = r.get<std::array<int, 2>>("eval_points");
  c.wave_dx = r.get<double>("wave_dx");
  c.wave_dt = r.get<double>("wave_dt");
  c.wave_half_width = r.get<double>("wave_half_width");
  c.burgers_dx = r.get<double>("burgers_dx");
  c.burgers_dt = r.get<double>("burgers_dt");
  c.burgers_half_width = r.get<double>("burgers_half_width");
  c.schrodinger_half_width = r.get<double>("schrodinger_half_width");
  c.schrodinger_modes = r.get<int>("schrodinger_modes");
  c.physics_weight = r.get<double>("physics_weight");
  c.physics_points = r.get<int>("physics_points");
  c.physics_fd_step = r.get<double>("physics_fd_step");
  r.reject_unknown();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  write_text(path, config_to_json(cfg).dump(2) + "\n");
}

std::string config_hash(const ExperimentConfig& cfg) { return fnv1a_hex(config_to_json(cfg).dump()); }

SpaceTimeGrid eval_grid(const ExperimentConfig& cfg) {
  return make_grid(cfg.spatial_dim(), cfg.domain_of_interest[0], cfg.domain_of_interest[1], cfg.eval_points[0],
                   0.0, cfg.time_horizon, cfg.eval_points[1]);
}

}  // namespace oplearn
