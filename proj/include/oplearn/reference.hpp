#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oplearn/config.hpp"
#include "oplearn/grid.hpp"

namespace oplearn {

enum class ReferenceSource { Analytic, FdWave, FdBurgers, SpectralSchrodinger };

std::string reference_source_name(ReferenceSource s);

/// Reference solution on an evaluation grid; one row per head (real, or real and imaginary).
struct ReferenceField {
  SpaceTimeGrid grid;
  Eigen::MatrixXd values;  // heads x grid.size()
  ReferenceSource source = ReferenceSource::Analytic;
};

using LineFunction = std::function<double(double x)>;
using LineSourceFunction = std::function<double(double x, double t)>;

/// History of a 1D solve on x_j = -half_width + j dx, t_n = n dt. values(n, j).
struct LineSolution {
  double half_width = 0.0;
  double dx = 0.0;
  double dt = 0.0;
  Eigen::MatrixXd values;

  double x(Eigen::Index j) const { return -half_width + static_cast<double>(j) * dx; }
  /// Bilinear interpolation; throws outside the solved region.
  double at(double x, double t) const;
};

/// Leapfrog for u_tt - u_xx = f on [-half_width, half_width] with zero Dirichlet ends.
/// First step from the Taylor expansion u^1 = u^0 + dt phi1 + dt^2/2 (D2 u^0 + f(., 0)).
/// Throws if dt/dx > 0.9.
LineSolution solve_wave1d_fd(const LineFunction& phi0, const LineFunction& phi1, const LineSourceFunction& f,
                             double half_width, double dx, double dt, double T);

/// u_t - u u_x - nu u_xx = f. Crank-Nicolson diffusion (tridiagonal solve), second-order
/// Adams-Bashforth convection with centred differences, trapezoidal source.
/// Dirichlet values from `boundary` (zero when empty). Throws if |u| exceeds 1e6.
LineSolution solve_burgers_fd(const LineFunction& phi, const LineSourceFunction& f, double nu, double half_width,
                              double dx, double dt, double T, const LineSourceFunction& boundary = {});

struct SpectralSolution {
  Eigen::MatrixXcd values;   // times x xs
  std::vector<double> mass;  // discrete L2 mass per requested time
};

/// Free Schrodinger equation i u_t = -u_xx on the periodic box [-half_width, half_width)
/// with `modes` Fourier modes; each mode evolves exactly by exp(-i k^2 t). Values at the
/// requested points come from the Fourier series. Throws if |phi| > 1e-12 at the box edge.
SpectralSolution solve_schrodinger_spectral(const std::function<std::complex<double>(double)>& phi,
                                            double half_width, int modes, const std::vector<double>& times,
                                            const std::vector<double>& xs);

/// Pointwise evaluation of the printed exact solution; throws for cases without one.
ReferenceField analytic_reference(CaseId id, const SpaceTimeGrid& grid, const TargetOptions& options = {});

/// Samples a line solution on a 1D evaluation grid.
ReferenceField restrict_to_grid(const LineSolution& solution, const SpaceTimeGrid& grid, ReferenceSource source);

/// The case's reference on its evaluation grid; one entry per target source.
std::vector<ReferenceField> case_references(const ExperimentConfig& cfg);

}  // namespace oplearn
