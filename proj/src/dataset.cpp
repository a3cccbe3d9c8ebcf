#include "oplearn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "oplearn/metrics.hpp"
#include "oplearn/pde.hpp"

namespace oplearn {

namespace {

constexpr std::uint64_t kCandidateStream = 1;
constexpr std::uint64_t kLocationStream = 2;

using VectorXc = Eigen::VectorXcd;

// Initial trace `index` (or the source term) of a family sample on a grid.
VectorXc trace_values(const PdeSpec& pde, const FamilyParams& params, const SpaceTimeGrid& grid, int index) {
  VectorXc out(grid.size());
  const JetOrders orders{0, pde.time_order - 1};
  const bool complex = family_is_complex(params.family);
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    SpaceTimePoint p = grid.point(k);
    p.t = 0.0;
    if (complex) {
      out(k) = initial_traces(pde, eval_complex_jet(params, p, orders))[static_cast<std::size_t>(index)];
    } else {
      out(k) = initial_traces(pde, eval_jet(params, p, orders))[static_cast<std::size_t>(index)];
    }
  }
  return out;
}

VectorXc source_values(const PdeSpec& pde, const FamilyParams& params, const SpaceTimeGrid& grid) {
  VectorXc out(grid.size());
  const JetOrders orders = required_orders(pde);
  const bool complex = family_is_complex(params.family) || pde.complex;
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const SpaceTimePoint p = grid.point(k);
    if (complex) {
      out(k) = apply_operator(pde, eval_complex_jet(params, p, orders));
    } else {
      out(k) = apply_operator(pde, eval_jet(params, p, orders));
    }
  }
  return out;
}

VectorXc field_on_grid(const Field& field, const SpaceTimeGrid& grid) {
  VectorXc out(grid.size());
  for (Eigen::Index k = 0; k < grid.size(); ++k) out(k) = field(grid.point(k));
  return out;
}

Eigen::VectorXd part(const VectorXc& v, bool imag) { return imag ? v.imag().eval() : v.real().eval(); }

// Appends values to a row, interleaving (re, im) for complex cases.
void put(RowMatrix& m, Eigen::Index row, Eigen::Index& col, const VectorXc& v, bool complex) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    m(row, col++) = v(k).real();
    if (complex) m(row, col++) = v(k).imag();
  }
}

struct Outcome {
  FamilyParams params;
  AcceptanceResult result;
  VectorXc phi, f, u;
};

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

bool SensorLayout::operator==(const SensorLayout& o) const {
  return initial == o.initial && source == o.source && p_initial == o.p_initial &&
         outputs.rows() == o.outputs.rows() && outputs.cols() == o.outputs.cols() && outputs == o.outputs;
}

SensorLayout make_sensor_layout(const ExperimentConfig& cfg) {
  const int d = cfg.spatial_dim();
  const auto [glo, ghi] = cfg.generation_domain;
  const auto [dlo, dhi] = cfg.domain_of_interest;
  SensorLayout l;
  l.initial = make_initial_grid(d, glo, ghi, cfg.sensors_initial_per_axis());
  const auto src = cfg.sensors_source_per_axis();
  l.source = make_grid(d, glo, ghi, src[0], 0.0, cfg.time_horizon, src[1]);
  const int n = cfg.interior_per_axis();
  const SpaceTimeGrid interior = make_grid(d, dlo, dhi, n, 0.0, cfg.time_horizon, n);
  l.p_initial = cfg.p_initial;
  l.outputs.resize(d + 1, cfg.p_initial + interior.size());
  std::mt19937_64 rng(derive_seed(cfg.seed, kLocationStream));
  std::uniform_real_distribution<double> uni(dlo, dhi);
  for (int j = 0; j < cfg.p_initial; ++j) {
    for (int a = 0; a < d; ++a) l.outputs(a, j) = uni(rng);
    l.outputs(d, j) = 0.0;
  }
  l.outputs.rightCols(interior.size()) = interior.locations();
  return l;
}

std::vector<Component> case_components(CaseId id) {
  const PdeSpec pde = case_pde(id);
  std::vector<Component> out;
  if (pde.complex) {
    out.push_back({"Re(phi)", false, 0, false});
    out.push_back({"Im(phi)", false, 0, true});
    out.push_back({"Re(f)", true, 0, false});
    out.push_back({"Im(f)", true, 0, true});
    return out;
  }
  if (pde.time_order == 2) {
    out.push_back({"phi0", false, 0, false});
    out.push_back({"phi1", false, 1, false});
  } else {
    out.push_back({"phi", false, 0, false});
  }
  out.push_back({"f", true, 0, false});
  return out;
}

AcceptanceProblem make_acceptance_problem(const ExperimentConfig& cfg) {
  cfg.validate();
  AcceptanceProblem p;
  p.pde = PdeSpec::make(case_pde(cfg.case_id).equation, cfg.viscosity);
  p.family = case_family(cfg.case_id);
  p.components = case_components(cfg.case_id);
  p.tolerances = cfg.tolerances;
  const int d = cfg.spatial_dim();
  const auto [glo, ghi] = cfg.generation_domain;
  p.initial_grid = make_initial_grid(d, glo, ghi, cfg.accept_initial_points);
  p.source_grid = make_grid(d, glo, ghi, cfg.accept_source_points[0], 0.0, cfg.time_horizon,
                            cfg.accept_source_points[1]);
  const TargetFunctions tf = target_functions(cfg.case_id, cfg.target_options());
  for (const auto& c : p.components) {
    std::vector<Eigen::VectorXd> targets;
    if (c.source) {
      for (const auto& s : tf.sources) targets.push_back(part(field_on_grid(s, p.source_grid), c.imag));
    } else {
      targets.push_back(part(field_on_grid(tf.initial[static_cast<std::size_t>(c.index)], p.initial_grid), c.imag));
    }
    p.targets.push_back(std::move(targets));
  }
  return p;
}

Eigen::VectorXd component_values(const AcceptanceProblem& problem, const FamilyParams& params,
                                 std::size_t component) {
  const Component& c = problem.components.at(component);
  if (c.source) return part(source_values(problem.pde, params, problem.source_grid), c.imag);
  return part(trace_values(problem.pde, params, problem.initial_grid, c.index), c.imag);
}

double component_error(const Eigen::VectorXd& candidate, const Eigen::VectorXd& target, double tolerance) {
  if (tolerance == 0.0) {
    if (candidate.size() != target.size()) throw std::invalid_argument("component_error: length mismatch");
    return (candidate - target).cwiseAbs().maxCoeff();
  }
  if (target.cwiseAbs().maxCoeff() == 0.0) return metric_mse(candidate, target);
  return metric_rel_l2(candidate, target);
}

bool within_tolerance(double error, double tolerance) {
  if (tolerance == 0.0) return error <= kExactTolerance;
  return error <= tolerance;
}

bool multi_target_accept(const Eigen::VectorXd& candidate, const std::vector<Eigen::VectorXd>& targets,
                         double tolerance) {
  if (targets.empty()) throw std::invalid_argument("multi_target_accept: needs at least one target");
  for (const auto& t : targets)
    if (within_tolerance(component_error(candidate, t, tolerance), tolerance)) return true;
  return false;
}

namespace {

// Component values on a grid, evaluated on demand in grid order.
class LazyComponent {
 public:
  LazyComponent(const AcceptanceProblem& problem, const FamilyParams& params, const Component& c)
      : problem_(problem), params_(params), c_(c),
        grid_(c.source ? problem.source_grid : problem.initial_grid), values_(grid_.size()) {
    complex_ = family_is_complex(params.family) || problem.pde.complex;
    const Eigen::Index n = values_.size();
    stride_ = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(0.618 * static_cast<double>(n)));
    while (n > 0 && std::gcd(stride_, n) != 1) ++stride_;
  }

  Eigen::Index size() const { return values_.size(); }

  /// Evaluates the first n grid points of the visiting order.
  void ensure(Eigen::Index n) {
    const JetOrders orders = c_.source ? required_orders(problem_.pde) : JetOrders{0, problem_.pde.time_order - 1};
    for (; done_ < n; ++done_) {
      const Eigen::Index k = visit(done_);
      SpaceTimePoint p = grid_.point(k);
      if (!c_.source) p.t = 0.0;
      values_(k) = complex_ ? value(eval_complex_jet(params_, p, orders)) : value(eval_jet(params_, p, orders));
    }
  }

  /// Grid index of the i-th visited point. A stride coprime to the size spreads early points over
  /// the whole grid, so a prefix already sees every region of space and time.
  Eigen::Index visit(Eigen::Index i) const { return (i * stride_) % values_.size(); }

  const VectorXc& values() const { return values_; }

 private:
  template <class J>
  std::complex<double> value(const J& jet) const {
    if (c_.source) return apply_operator(problem_.pde, jet);
    return initial_traces(problem_.pde, jet)[static_cast<std::size_t>(c_.index)];
  }

  const AcceptanceProblem& problem_;
  const FamilyParams& params_;
  const Component& c_;
  const SpaceTimeGrid& grid_;
  VectorXc values_;
  Eigen::Index done_ = 0;
  Eigen::Index stride_ = 1;
  bool complex_ = false;
};

constexpr Eigen::Index kAcceptChunk = 64;

// Streams one component against its targets. Returns the exact error when the whole grid had to
// be evaluated, or a lower bound above the tolerance when every target was already out of reach
// on a prefix of the grid.
double streamed_error(LazyComponent& lazy, bool imag, const std::vector<Eigen::VectorXd>& targets, double eps) {
  const Eigen::Index n = lazy.size();
  const std::size_t nt = targets.size();
  std::vector<double> acc(nt, 0.0), norm(nt, 0.0);
  std::vector<bool> mse(nt, false);
  for (std::size_t t = 0; t < nt; ++t) {
    mse[t] = targets[t].cwiseAbs().maxCoeff() == 0.0;
    norm[t] = targets[t].norm();
  }
  // The margin keeps early rejection strictly inside the exact rule despite summation order.
  constexpr double kMargin = 1.0 + 1e-9;
  auto out_of_reach = [&](std::size_t t) {
    if (eps == 0.0) return acc[t] > kExactTolerance;
    if (mse[t]) return acc[t] > eps * eps * static_cast<double>(n) * kMargin;
    return acc[t] > (eps * norm[t]) * (eps * norm[t]) * kMargin;
  };
  auto lower_bound = [&](std::size_t t) {
    if (eps == 0.0) return acc[t];
    if (mse[t]) return std::sqrt(acc[t] / static_cast<double>(n));
    return std::sqrt(acc[t]) / norm[t];
  };
  for (Eigen::Index start = 0; start < n; start += kAcceptChunk) {
    const Eigen::Index end = std::min(n, start + kAcceptChunk);
    lazy.ensure(end);
    bool all_out = true;
    for (std::size_t t = 0; t < nt; ++t) {
      for (Eigen::Index i = start; i < end; ++i) {
        const Eigen::Index k = lazy.visit(i);
        const double v = imag ? lazy.values()(k).imag() : lazy.values()(k).real();
        const double d = std::abs(v - targets[t](k));
        acc[t] = eps == 0.0 ? std::max(acc[t], d) : acc[t] + d * d;
      }
      all_out = all_out && out_of_reach(t);
    }
    if (all_out && end < n) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < nt; ++t) best = std::min(best, lower_bound(t));
      return best;
    }
  }
  const Eigen::VectorXd values = part(lazy.values(), imag);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : targets) best = std::min(best, component_error(values, t, eps));
  return best;
}

}  // namespace

AcceptanceResult accept_sample(const AcceptanceProblem& problem, const FamilyParams& params) {
  AcceptanceResult r;
  r.accepted = true;
  // Real and imaginary components of the same function share one lazy evaluation.
  std::vector<std::unique_ptr<LazyComponent>> lazies;
  std::vector<std::pair<bool, int>> keys;
  for (std::size_t i = 0; i < problem.components.size(); ++i) {
    const Component& c = problem.components[i];
    const double eps = problem.tolerances[i];
    const std::pair<bool, int> key{c.source, c.source ? -1 : c.index};
    auto found = std::find(keys.begin(), keys.end(), key);
    LazyComponent* lazy = nullptr;
    if (found == keys.end()) {
      keys.push_back(key);
      lazies.push_back(std::make_unique<LazyComponent>(problem, params, c));
      lazy = lazies.back().get();
    } else {
      lazy = lazies[static_cast<std::size_t>(found - keys.begin())].get();
    }
    const double error = streamed_error(*lazy, c.imag, problem.targets[i], eps);
    r.errors.push_back(error);
    if (!within_tolerance(error, eps)) {
      r.accepted = false;
      break;
    }
  }
  return r;
}

bool OperatorDataset::is_complex() const { return case_pde(config.case_id).complex; }

OperatorDataset build_dataset(const ExperimentConfig& cfg, const BuildOptions& options) {
  const AcceptanceProblem problem = make_acceptance_problem(cfg);
  OperatorDataset ds;
  ds.config = cfg;
  ds.layout = make_sensor_layout(cfg);
  const bool complex = case_pde(cfg.case_id).complex;
  const int width = complex ? 2 : 1;
  const int n_init = cfg.initial_function_count();
  const Eigen::Index m1 = ds.layout.initial.size(), m2 = ds.layout.source.size(), P = ds.layout.P();
  const std::size_t n_comp = problem.components.size();
  ds.phi.resize(cfg.N, n_init * m1 * width);
  ds.f.resize(cfg.N, m2 * width);
  ds.u.resize(cfg.N, P * width);
  ds.acceptance_errors.resize(cfg.N, static_cast<Eigen::Index>(n_comp));
  ds.stats.rejections.assign(n_comp, 0);

  const std::uint64_t candidate_seed = derive_seed(cfg.seed, kCandidateStream);
  const int threads = std::max(1, options.threads);
  const std::int64_t block = 64 * threads;

  auto evaluate = [&](std::int64_t index, Outcome& out) {
    std::mt19937_64 rng(derive_seed(candidate_seed, static_cast<std::uint64_t>(index)));
    out.params = sample_params(problem.family, cfg.laws, rng);
    out.result = accept_sample(problem, out.params);
    if (!out.result.accepted) return;
    out.phi.resize(n_init * m1);
    for (int i = 0; i < n_init; ++i)
      out.phi.segment(i * m1, m1) = trace_values(problem.pde, out.params, ds.layout.initial, i);
    out.f = source_values(problem.pde, out.params, ds.layout.source);
    out.u.resize(P);
    for (Eigen::Index j = 0; j < P; ++j) {
      SpaceTimePoint p;
      p.x1 = ds.layout.outputs(0, j);
      if (cfg.spatial_dim() == 2) p.x2 = ds.layout.outputs(1, j);
      p.t = ds.layout.outputs(cfg.spatial_dim(), j);
      out.u(j) = eval_value(out.params, p);
    }
  };

  if (options.report) *options.report << "candidate_index,component,error,accepted\n";
  Eigen::Index filled = 0;
  std::int64_t next = 0;
  std::vector<Outcome> outcomes(static_cast<std::size_t>(block));
  while (filled < cfg.N) {
    const std::int64_t count = block;
    auto work = [&](int tid) {
      for (std::int64_t k = tid; k < count; k += threads) evaluate(next + k, outcomes[static_cast<std::size_t>(k)]);
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
      for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            work(t);
          } catch (...) {
            errors[static_cast<std::size_t>(t)] = std::current_exception();
          }
        });
      }
      pool.clear();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
    for (std::int64_t k = 0; k < count && filled < cfg.N; ++k) {
      const Outcome& o = outcomes[static_cast<std::size_t>(k)];
      const std::int64_t index = next + k;
      ++ds.stats.candidates;
      if (options.report) {
        for (std::size_t c = 0; c < o.result.errors.size(); ++c) {
          *options.report << index << ',' << problem.components[c].name << ',' << std::setprecision(17)
                          << o.result.errors[c] << ',' << (o.result.accepted ? 1 : 0) << '\n';
        }
      }
      if (o.result.accepted) {
        ++ds.stats.accepted;
        ds.params.push_back(o.params);
        ds.candidate_index.push_back(index);
        Eigen::Index col = 0;
        put(ds.phi, filled, col, o.phi, complex);
        col = 0;
        put(ds.f, filled, col, o.f, complex);
        col = 0;
        put(ds.u, filled, col, o.u, complex);
        for (std::size_t c = 0; c < n_comp; ++c) ds.acceptance_errors(filled, static_cast<Eigen::Index>(c)) = o.result.errors[c];
        ++filled;
      } else {
        ++ds.stats.rejections[o.result.errors.size() - 1];
      }
      if (ds.stats.candidates % options.draw_budget == 0 &&
          ds.stats.acceptance_rate() < options.min_acceptance_rate) {
        const auto worst = std::max_element(ds.stats.rejections.begin(), ds.stats.rejections.end()) -
                           ds.stats.rejections.begin();
        std::ostringstream msg;
        msg << "build_dataset(" << case_name(cfg.case_id) << "): acceptance rate " << ds.stats.acceptance_rate()
            << " after " << ds.stats.candidates << " draws is below " << options.min_acceptance_rate
            << "; most rejections at component " << problem.components[static_cast<std::size_t>(worst)].name
            << " (tolerance " << problem.tolerances[static_cast<std::size_t>(worst)]
            << "), check the tolerances and sampling laws";
        throw std::runtime_error(msg.str());
      }
    }
    next += count;
  }
  return ds;
}

std::vector<int> channel_sensor_counts(const ExperimentConfig& cfg) {
  std::vector<int> counts;
  const bool complex = case_pde(cfg.case_id).complex;
  const int reps = complex ? 2 : 1;
  for (int i = 0; i < cfg.initial_function_count(); ++i)
    for (int r = 0; r < reps; ++r) counts.push_back(cfg.m_initial);
  if (cfg.use_source_branch)
    for (int r = 0; r < reps; ++r) counts.push_back(cfg.m_source);
  return counts;
}

ChannelInputs channel_inputs(const OperatorDataset& ds) {
  const auto& cfg = ds.config;
  const bool complex = ds.is_complex();
  const Eigen::Index N = ds.size();
  const Eigen::Index m1 = cfg.m_initial, m2 = cfg.m_source;
  ChannelInputs out;
  auto take = [&](const RowMatrix& src, Eigen::Index offset, Eigen::Index m, int stride, int shift) {
    Eigen::MatrixXd c(m, N);
    for (Eigen::Index n = 0; n < N; ++n)
      for (Eigen::Index s = 0; s < m; ++s) c(s, n) = src(n, offset + s * stride + shift);
    out.push_back(std::move(c));
  };
  const int w = complex ? 2 : 1;
  for (int i = 0; i < cfg.initial_function_count(); ++i)
    for (int r = 0; r < w; ++r) take(ds.phi, i * m1 * w, m1, w, r);
  if (cfg.use_source_branch)
    for (int r = 0; r < w; ++r) take(ds.f, 0, m2, w, r);
  return out;
}

std::vector<Eigen::VectorXd> target_sensor_inputs(const ExperimentConfig& cfg, const SensorLayout& layout,
                                                  std::size_t source) {
  const TargetFunctions tf = target_functions(cfg.case_id, cfg.target_options());
  const bool complex = case_pde(cfg.case_id).complex;
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < cfg.initial_function_count(); ++i) {
    const VectorXc v = field_on_grid(tf.initial[static_cast<std::size_t>(i)], layout.initial);
    out.push_back(v.real());
    if (complex) out.push_back(v.imag());
  }
  if (cfg.use_source_branch) {
    const VectorXc v = field_on_grid(tf.sources.at(source), layout.source);
    out.push_back(v.real());
    if (complex) out.push_back(v.imag());
  }
  return out;
}

}  // namespace oplearn
