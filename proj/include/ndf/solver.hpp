#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ndf/energy.hpp"

namespace ndf {

enum class SolverMethod { Newton, Gradient };

struct ProxConfig {
  double residual_tolerance = 1e-10;
  std::size_t max_iterations = 500;
  double shrink = 0.5;
  double armijo = 1e-4;
  SolverMethod method = SolverMethod::Newton;

  /// Throws ParameterError on out-of-range settings.
  void validate() const;
};

struct SolveReport {
  std::size_t iterations = 0;
  double residual = 0.0;
  /// Tolerance actually enforced: the requested one, raised to the
  /// floating-point resolution of the residual at the returned point.
  double tolerance = 0.0;
  bool converged = false;
  bool diverged = false;
};

/// Minimize F(x) = E(x) + (c/2) |x|_mu^2 - <b, x>_mu subject to
/// x = fixed_value on `fixed`, x >= lower on `bounded`, and x = 0 on the
/// boundary of the spec. Directions in `kernel` (point-set indicators,
/// only meaningful for unconstrained problems with c = 0) are projected out
/// of every step.
struct ConvexProblem {
  const EnergySpec* spec = nullptr;
  double c = 0.0;
  Field b;
  PointSet fixed;
  Field fixed_value;
  PointSet bounded;
  Field lower;
  std::vector<PointSet> kernel;
  double divergence_threshold = std::numeric_limits<double>::infinity();
};

struct SolveOutcome {
  Field x;
  SolveReport report;
};

/// Projected, damped Newton (or projected gradient) with Armijo search.
/// Stops early with report.diverged when |x|_inf exceeds the divergence
/// threshold. Throws NonConvergenceError when the iteration budget runs out.
SolveOutcome minimize(const ConvexProblem& problem, const Field& x0, const ProxConfig& cfg);

/// Value of the objective F at x.
double objective(const ConvexProblem& problem, const Field& x);

/// mu-norm of the projected mu-gradient of F at x.
double stationarity_residual(const ConvexProblem& problem, const Field& x);

}  // namespace ndf
