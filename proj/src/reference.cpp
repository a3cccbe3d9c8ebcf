#include "oplearn/reference.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

#include "oplearn/targets.hpp"

namespace oplearn {

namespace {

Eigen::Index node_count(double half_width, double dx, const char* who) {
  if (!(dx > 0.0) || !(half_width > 0.0)) throw std::invalid_argument(std::string(who) + ": dx and width must be positive");
  const double cells = 2.0 * half_width / dx;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > 1e-9 * cells) {
    throw std::invalid_argument(std::string(who) + ": 2 * half_width must be a multiple of dx");
  }
  return static_cast<Eigen::Index>(rounded) + 1;
}

Eigen::Index step_count(double T, double dt, const char* who) {
  if (!(dt > 0.0) || !(T >= 0.0)) throw std::invalid_argument(std::string(who) + ": dt must be positive");
  const double steps = T / dt;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
    throw std::invalid_argument(std::string(who) + ": T must be a multiple of dt");
  }
  return static_cast<Eigen::Index>(rounded);
}

// Thomas algorithm for a constant-coefficient tridiagonal system (sub = sup = off).
void solve_tridiagonal(double diag, double off, Eigen::VectorXd& rhs, Eigen::VectorXd& scratch) {
  const Eigen::Index n = rhs.size();
  scratch.resize(n);
  double denom = diag;
  scratch(0) = off / denom;
  rhs(0) /= denom;
  for (Eigen::Index i = 1; i < n; ++i) {
    denom = diag - off * scratch(i - 1);
    scratch(i) = off / denom;
    rhs(i) = (rhs(i) - off * rhs(i - 1)) / denom;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) rhs(i) -= scratch(i) * rhs(i + 1);
}

}  // namespace

std::string reference_source_name(ReferenceSource s) {
  switch (s) {
    case ReferenceSource::Analytic: return "analytic";
    case ReferenceSource::FdWave: return "fd_wave";
    case ReferenceSource::FdBurgers: return "fd_burgers";
    case ReferenceSource::SpectralSchrodinger: return "spectral_schrodinger";
  }
  return "unknown";
}

double LineSolution::at(double x, double t) const {
  const double fx = (x + half_width) / dx;
  const double ft = t / dt;
  const Eigen::Index nx = values.cols(), nt = values.rows();
  const double tol = 1e-9;
  if (fx < -tol || fx > static_cast<double>(nx - 1) + tol || ft < -tol || ft > static_cast<double>(nt - 1) + tol) {
    throw std::out_of_range("line solution: point outside the solved region");
  }
  auto split = [](double f, Eigen::Index n, Eigen::Index& i, double& w) {
    const double r = std::round(f);
    if (std::abs(f - r) < 1e-9) {
      i = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(r), 0, n - 1);
      w = 0.0;
      if (i == n - 1 && n > 1) {
        i = n - 2;
        w = 1.0;
      }
      return;
    }
    i = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(f)), 0, std::max<Eigen::Index>(n - 2, 0));
    w = f - static_cast<double>(i);
  };
  Eigen::Index i = 0, n = 0;
  double wx = 0.0, wt = 0.0;
  split(fx, nx, i, wx);
  split(ft, nt, n, wt);
  auto v = [&](Eigen::Index tn, Eigen::Index xj) {
    return values(std::min(tn, nt - 1), std::min(xj, nx - 1));
  };
  const double a = wx == 0.0 ? v(n, i) : (1.0 - wx) * v(n, i) + wx * v(n, i + 1);
  if (wt == 0.0) return a;
  const double b = wx == 0.0 ? v(n + 1, i) : (1.0 - wx) * v(n + 1, i) + wx * v(n + 1, i + 1);
  if (wt == 1.0) return b;
  return (1.0 - wt) * a + wt * b;
}

LineSolution solve_wave1d_fd(const LineFunction& phi0, const LineFunction& phi1, const LineSourceFunction& f,
                             double half_width, double dx, double dt, double T) {
  const double r = dt / dx;
  if (r > 0.9) throw std::invalid_argument("solve_wave1d_fd: CFL violated, dt/dx = " + std::to_string(r) + " > 0.9");
  const Eigen::Index nx = node_count(half_width, dx, "solve_wave1d_fd");
  const Eigen::Index nt = step_count(T, dt, "solve_wave1d_fd");
  LineSolution s{half_width, dx, dt, Eigen::MatrixXd::Zero(nt + 1, nx)};
  Eigen::VectorXd prev(nx), cur(nx), next(nx), src(nx);
  for (Eigen::Index j = 0; j < nx; ++j) prev(j) = phi0(s.x(j));
  prev(0) = prev(nx - 1) = 0.0;
  s.values.row(0) = prev.transpose();
  if (nt == 0) return s;
  const double r2 = r * r;
  cur.setZero();
  for (Eigen::Index j = 1; j + 1 < nx; ++j) {
    const double lap = (prev(j + 1) - 2.0 * prev(j) + prev(j - 1)) / (dx * dx);
    cur(j) = prev(j) + dt * phi1(s.x(j)) + 0.5 * dt * dt * (lap + f(s.x(j), 0.0));
  }
  s.values.row(1) = cur.transpose();
  for (Eigen::Index n = 1; n < nt; ++n) {
    const double t = static_cast<double>(n) * dt;
    next(0) = next(nx - 1) = 0.0;
    for (Eigen::Index j = 1; j + 1 < nx; ++j) {
      next(j) = 2.0 * cur(j) - prev(j) + r2 * (cur(j + 1) - 2.0 * cur(j) + cur(j - 1)) + dt * dt * f(s.x(j), t);
    }
    std::swap(prev, cur);
    std::swap(cur, next);
    s.values.row(n + 1) = cur.transpose();
  }
  return s;
}

LineSolution solve_burgers_fd(const LineFunction& phi, const LineSourceFunction& f, double nu, double half_width,
                              double dx, double dt, double T, const LineSourceFunction& boundary) {
  if (!(nu > 0.0)) throw std::invalid_argument("solve_burgers_fd: viscosity must be positive");
  const Eigen::Index nx = node_count(half_width, dx, "solve_burgers_fd");
  const Eigen::Index nt = step_count(T, dt, "solve_burgers_fd");
  if (nx < 3) throw std::invalid_argument("solve_burgers_fd: need at least one interior node");
  LineSolution s{half_width, dx, dt, Eigen::MatrixXd::Zero(nt + 1, nx)};
  const Eigen::Index m = nx - 2;  // interior unknowns
  auto edge = [&](double x, double t) { return boundary ? boundary(x, t) : 0.0; };

  Eigen::VectorXd u(nx), conv(m), conv_prev(m), f_now(m), f_next(m), rhs(m), scratch;
  for (Eigen::Index j = 0; j < nx; ++j) u(j) = phi(s.x(j));
  u(0) = edge(s.x(0), 0.0);
  u(nx - 1) = edge(s.x(nx - 1), 0.0);
  s.values.row(0) = u.transpose();

  const double mu = nu * dt / (dx * dx);
  auto convection = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    for (Eigen::Index i = 0; i < m; ++i) out(i) = v(i + 1) * (v(i + 2) - v(i)) / (2.0 * dx);
  };
  for (Eigen::Index i = 0; i < m; ++i) f_now(i) = f(s.x(i + 1), 0.0);
  convection(u, conv);
  for (Eigen::Index n = 0; n < nt; ++n) {
    const double t_next = static_cast<double>(n + 1) * dt;
    for (Eigen::Index i = 0; i < m; ++i) f_next(i) = f(s.x(i + 1), t_next);
    const double left_next = edge(s.x(0), t_next), right_next = edge(s.x(nx - 1), t_next);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index j = i + 1;
      const double explicit_conv = n == 0 ? conv(i) : 1.5 * conv(i) - 0.5 * conv_prev(i);
      rhs(i) = u(j) + 0.5 * mu * (u(j + 1) - 2.0 * u(j) + u(j - 1)) + dt * explicit_conv +
               0.5 * dt * (f_now(i) + f_next(i));
    }
    rhs(0) += 0.5 * mu * left_next;
    rhs(m - 1) += 0.5 * mu * right_next;
    solve_tridiagonal(1.0 + mu, -0.5 * mu, rhs, scratch);
    u(0) = left_next;
    u(nx - 1) = right_next;
    u.segment(1, m) = rhs;
    if (!u.allFinite() || u.cwiseAbs().maxCoeff() > 1e6) {
      throw std::runtime_error("solve_burgers_fd: solution diverged at t = " + std::to_string(t_next));
    }
    s.values.row(n + 1) = u.transpose();
    std::swap(conv_prev, conv);
    convection(u, conv);
    std::swap(f_now, f_next);
  }
  return s;
}

SpectralSolution solve_schrodinger_spectral(const std::function<std::complex<double>(double)>& phi,
                                            double half_width, int modes, const std::vector<double>& times,
                                            const std::vector<double>& xs) {
  using C = std::complex<double>;
  if (modes < 4 || modes % 2 != 0) throw std::invalid_argument("solve_schrodinger_spectral: modes must be even");
  const double L = 2.0 * half_width;
  const double dx = L / modes;
  const double edge = std::max(std::abs(phi(-half_width)), std::abs(phi(half_width - dx)));
  if (edge > 1e-12) {
    throw std::invalid_argument("solve_schrodinger_spectral: initial state not decayed at the box edge (|phi| = " +
                                std::to_string(edge) + ")");
  }
  std::vector<C> u0(static_cast<std::size_t>(modes)), hat;
  for (int j = 0; j < modes; ++j) u0[static_cast<std::size_t>(j)] = phi(-half_width + j * dx);
  Eigen::FFT<double> fft;
  fft.fwd(hat, u0);
  // Angular wavenumber of FFT bin q; the Nyquist bin is split evenly between +-k.
  std::vector<double> k(static_cast<std::size_t>(modes));
  for (int q = 0; q < modes; ++q) {
    const int s = q <= modes / 2 ? q : q - modes;
    k[static_cast<std::size_t>(q)] = 2.0 * std::numbers::pi * s / L;
  }
  SpectralSolution out;
  out.values.resize(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(xs.size()));
  std::vector<C> evolved(static_cast<std::size_t>(modes));
  const C I(0.0, 1.0);
  for (std::size_t n = 0; n < times.size(); ++n) {
    const double t = times[n];
    double mass = 0.0;
    for (int q = 0; q < modes; ++q) {
      const auto qq = static_cast<std::size_t>(q);
      evolved[qq] = hat[qq] * std::exp(-I * (k[qq] * k[qq] * t));
      mass += std::norm(evolved[qq]);
    }
    // Parseval: sum |u_j|^2 dx = dx / modes * sum |u_hat_q|^2
    out.mass.push_back(std::sqrt(mass * dx / modes));
    for (std::size_t p = 0; p < xs.size(); ++p) {
      const double y = xs[p] + half_width;
      C acc = 0.0;
      for (int q = 0; q < modes; ++q) {
        const auto qq = static_cast<std::size_t>(q);
        if (q == modes / 2) {
          acc += evolved[qq] * std::cos(k[qq] * y);
        } else {
          acc += evolved[qq] * std::exp(I * (k[qq] * y));
        }
      }
      out.values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p)) = acc / static_cast<double>(modes);
    }
  }
  return out;
}

ReferenceField analytic_reference(CaseId id, const SpaceTimeGrid& grid, const TargetOptions& options) {
  if (!has_exact_solution(id)) {
    throw std::invalid_argument("case '" + case_name(id) +
                                "' has no closed-form solution; use the numerical reference solver");
  }
  ReferenceField r{grid, Eigen::MatrixXd(1, grid.size()), ReferenceSource::Analytic};
  for (Eigen::Index k = 0; k < grid.size(); ++k) r.values(0, k) = exact_solution(id, grid.point(k), options).real();
  return r;
}

ReferenceField restrict_to_grid(const LineSolution& solution, const SpaceTimeGrid& grid, ReferenceSource source) {
  if (grid.spatial_dim() != 1) throw std::invalid_argument("restrict_to_grid: 1D grids only");
  ReferenceField r{grid, Eigen::MatrixXd(1, grid.size()), source};
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const auto p = grid.point(k);
    r.values(0, k) = solution.at(p.x1, p.t);
  }
  return r;
}

std::vector<ReferenceField> case_references(const ExperimentConfig& cfg) {
  const SpaceTimeGrid grid = eval_grid(cfg);
  const TargetOptions options = cfg.target_options();
  if (has_exact_solution(cfg.case_id)) return {analytic_reference(cfg.case_id, grid, options)};
  const TargetFunctions tf = target_functions(cfg.case_id, options);
  const double T = cfg.time_horizon;
  auto line = [](const Field& g) { return [g](double x) { return g(SpaceTimePoint{x, 0.0, 0.0}).real(); }; };
  auto line_src = [](const Field& g) {
    return [g](double x, double t) { return g(SpaceTimePoint{x, 0.0, t}).real(); };
  };
  std::vector<ReferenceField> out;
  switch (case_pde(cfg.case_id).equation) {
    case Equation::Wave1d: {
      const double need = cfg.domain_of_interest[1] + T + 1.0;
      if (cfg.wave_half_width < need || -cfg.wave_half_width > cfg.domain_of_interest[0] - T - 1.0) {
        throw std::invalid_argument("wave reference: half width must cover the domain of interest plus T + 1");
      }
      const auto sol = solve_wave1d_fd(line(tf.initial[0]), line(tf.initial[1]), line_src(tf.sources[0]),
                                       cfg.wave_half_width, cfg.wave_dx, cfg.wave_dt, T);
      out.push_back(restrict_to_grid(sol, grid, ReferenceSource::FdWave));
      break;
    }
    case Equation::Burgers:
      for (const auto& src : tf.sources) {
        const auto sol = solve_burgers_fd(line(tf.initial[0]), line_src(src), cfg.viscosity, cfg.burgers_half_width,
                                          cfg.burgers_dx, cfg.burgers_dt, T);
        out.push_back(restrict_to_grid(sol, grid, ReferenceSource::FdBurgers));
      }
      break;
    case Equation::Schrodinger: {
      const auto& phi = tf.initial[0];
      const auto times = grid.time.nodes();
      const auto xs = grid.space[0].nodes();
      const auto sol = solve_schrodinger_spectral([&phi](double x) { return phi(SpaceTimePoint{x, 0.0, 0.0}); },
                                                  cfg.schrodinger_half_width, cfg.schrodinger_modes, times, xs);
      ReferenceField r{grid, Eigen::MatrixXd(2, grid.size()), ReferenceSource::SpectralSchrodinger};
      // grid order: space major, time fastest
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(xs.size()); ++i)
        for (Eigen::Index n = 0; n < static_cast<Eigen::Index>(times.size()); ++n) {
          const Eigen::Index k = i * static_cast<Eigen::Index>(times.size()) + n;
          r.values(0, k) = sol.values(n, i).real();
          r.values(1, k) = sol.values(n, i).imag();
        }
      out.push_back(std::move(r));
      break;
    }
    default:
      throw std::invalid_argument("no numerical reference solver for case '" + case_name(cfg.case_id) + "'");
  }
  return out;
}

}  // namespace oplearn
