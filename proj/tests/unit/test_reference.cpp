#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oplearn/config.hpp"
#include "oplearn/families.hpp"
#include "oplearn/pde.hpp"
#include "oplearn/reference.hpp"
#include "oracles.hpp"

using namespace oplearn;

namespace {

double wave_exact(double x, double t) { return std::exp(-x * x) * std::cos(t - x); }

double wave_max_error(double dx) {
  const auto sol = solve_wave1d_fd([](double x) { return std::exp(-x * x) * std::cos(x); },
                                   [](double x) { return -std::exp(-x * x) * std::sin(-x); },
                                   [](double x, double t) {
                                     return std::exp(-x * x) * (4 * x * std::sin(t - x) + (2 - 4 * x * x) * std::cos(t - x));
                                   },
                                   4.0, dx, dx / 2, 1.0);
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i)
    for (int n = 0; n <= 10; ++n) {
      const double x = -1.0 + 0.1 * i, t = 0.1 * n;
      worst = std::max(worst, std::abs(sol.at(x, t) - wave_exact(x, t)));
    }
  return worst;
}

// Manufactured Burgers solution: the family member u*, its operator as source, exact boundary values.
double burgers_max_error(const FamilyParams& p, double h) {
  const PdeSpec s = PdeSpec::make(Equation::Burgers, 0.2);
  auto u = [&](double x, double t) { return eval_value(p, {x, 0.0, t}).real(); };
  const auto sol = solve_burgers_fd([&](double x) { return u(x, 0.0); },
                                    [&](double x, double t) { return apply_operator(s, eval_jet(p, {x, 0.0, t})); },
                                    0.2, 8.0, h, h, 1.0, u);
  double worst = 0.0;
  for (int i = 0; i <= 40; ++i)
    for (int n = 0; n <= 10; ++n) {
      const double x = -2.0 + 0.1 * i, t = 0.1 * n;
      worst = std::max(worst, std::abs(sol.at(x, t) - u(x, t)));
    }
  return worst;
}

}  // namespace

TEST_CASE("zero data gives zero fields") {
  auto zero1 = [](double) { return 0.0; };
  auto zero2 = [](double, double) { return 0.0; };
  CHECK(solve_wave1d_fd(zero1, zero1, zero2, 4.0, 0.01, 0.005, 1.0).values.isZero(0.0));
  CHECK(solve_burgers_fd(zero1, zero2, 0.2, 8.0, 0.01, 0.01, 1.0).values.isZero(0.0));
  const auto s = solve_schrodinger_spectral([](double) { return std::complex<double>(0.0); }, 20.0, 256, {0.0, 1.0},
                                            {0.0, 0.5});
  CHECK(s.values.isZero(0.0));
}

TEST_CASE("wave solver rejects CFL violations") {
  auto zero1 = [](double) { return 0.0; };
  auto zero2 = [](double, double) { return 0.0; };
  CHECK_THROWS_AS(solve_wave1d_fd(zero1, zero1, zero2, 4.0, 0.01, 0.0095, 1.0), std::invalid_argument);
}

TEST_CASE("wave solver converges at second order") {
  const double e1 = wave_max_error(0.02), e2 = wave_max_error(0.01);
  INFO("errors " << e1 << " " << e2);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e1 / e2 <= 4.5);
}

TEST_CASE("leapfrog energy is conserved without forcing") {
  const double dx = 0.02, dt = 0.01;
  const auto sol = solve_wave1d_fd([](double x) { return std::exp(-4 * x * x); }, [](double) { return 0.0; },
                                   [](double, double) { return 0.0; }, 6.0, dx, dt, 1.0);
  // E^{n+1/2} = 1/2 |(u^{n+1} - u^n)/dt|^2 + 1/2 <D+ u^{n+1}, D+ u^n>
  std::vector<double> energy;
  for (Eigen::Index n = 0; n + 1 < sol.values.rows(); ++n) {
    const Eigen::VectorXd a = sol.values.row(n), b = sol.values.row(n + 1);
    const Eigen::VectorXd da = (a.tail(a.size() - 1) - a.head(a.size() - 1)) / dx;
    const Eigen::VectorXd db = (b.tail(b.size() - 1) - b.head(b.size() - 1)) / dx;
    energy.push_back(0.5 * ((b - a) / dt).squaredNorm() * dx + 0.5 * da.dot(db) * dx);
  }
  const auto [lo, hi] = std::minmax_element(energy.begin() + 1, energy.end());
  CHECK((*hi - *lo) / *hi < 1e-10);
}

TEST_CASE("wave reference does not feel the truncation") {
  ExperimentConfig c = registry_config(CaseId::Wave1d2, Scale::Desk);
  const auto a = case_references(c);
  c.wave_half_width *= 2;
  const auto b = case_references(c);
  CHECK((a[0].values - b[0].values).cwiseAbs().maxCoeff() < 1e-8);
  c.wave_half_width = 2.0;
  CHECK_THROWS_AS(case_references(c), std::invalid_argument);
}

TEST_CASE("burgers solver matches a manufactured solution and refines") {
  std::mt19937_64 rng(5);
  const FamilyParams p = sample_params(FamilyId::BurgersHermite, default_laws(FamilyId::BurgersHermite), rng);
  const double coarse = burgers_max_error(p, 0.01), fine = burgers_max_error(p, 0.005);
  INFO("errors " << coarse << " " << fine);
  CHECK(coarse < 5e-3);
  CHECK(coarse / fine >= 1.8);
}

TEST_CASE("burgers solver reports divergence") {
  CHECK_THROWS_AS(solve_burgers_fd([](double x) { return 1e7 * std::exp(-x * x); }, [](double, double) { return 0.0; },
                                   0.2, 8.0, 0.01, 0.01, 1.0),
                  std::runtime_error);
}

TEST_CASE("spectral schrodinger matches the beam family") {
  BeamParams b{0.8, 0.5, 0.7};
  FamilyParams p{FamilyId::SchrodingerBeam, 0, b};
  std::vector<double> xs;
  for (int i = 0; i <= 40; ++i) xs.push_back(-2.0 + 0.1 * i);
  const std::vector<double> times{0.0, 0.25, 0.5, 1.0};
  const auto sol = solve_schrodinger_spectral([&](double x) { return eval_value(p, {x, 0.0, 0.0}); }, 20.0, 2048,
                                              times, xs);
  double worst = 0.0;
  for (std::size_t n = 0; n < times.size(); ++n)
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto exact = oracle::family_u(p, xs[i], 0.0, times[n]);
      const std::complex<double> e(static_cast<double>(exact.real()), static_cast<double>(exact.imag()));
      worst = std::max(worst, std::abs(sol.values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) - e));
    }
  CHECK(worst < 1e-8);
  for (double m : sol.mass) CHECK(std::abs(m - sol.mass[0]) < 1e-10 * sol.mass[0]);
  CHECK_THROWS_AS(solve_schrodinger_spectral([](double) { return std::complex<double>(1.0); }, 20.0, 256, times, xs),
                  std::invalid_argument);
}

TEST_CASE("analytic references") {
  const SpaceTimeGrid g = make_grid(1, -1, 1, 3, 0, 1, 2);
  const ReferenceField w = analytic_reference(CaseId::Wave1d1, g);
  CHECK(w.values(0, 2) == 1.0);  // (x, t) = (0, 0)
  const ReferenceField k = analytic_reference(CaseId::Kdv, g);
  CHECK(k.values(0, 5) == 1.0);  // (1, 1)
  const ReferenceField w2 = analytic_reference(CaseId::Wave2d, make_grid(2, -1, 1, 3, 0, 1, 2));
  CHECK(w2.values(0, (1 * 3 + 1) * 2) == 1.0);
  CHECK_THROWS_AS(analytic_reference(CaseId::Burgers1, g), std::invalid_argument);
}

TEST_CASE("case references cover the evaluation grids") {
  for (CaseId id : all_cases()) {
    const ExperimentConfig c = registry_config(id, Scale::Desk);
    const auto refs = case_references(c);
    CHECK(refs.size() == (id == CaseId::BurgersMulti ? 20u : 1u));
    const SpaceTimeGrid grid = eval_grid(c);
    for (const auto& r : refs) {
      CHECK(r.grid == grid);
      CHECK(r.values.cols() == grid.size());
      CHECK(r.values.rows() == (id == CaseId::Schrodinger ? 2 : 1));
      CHECK(r.values.allFinite());
    }
  }
  CHECK(eval_grid(registry_config(CaseId::Wave1d1, Scale::Paper)).size() == 201 * 101);
  CHECK(eval_grid(registry_config(CaseId::Wave2d, Scale::Paper)).size() == 21 * 21 * 51);
}
