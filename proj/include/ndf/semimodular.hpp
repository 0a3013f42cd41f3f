#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ndf/energy.hpp"
#include "ndf/solver.hpp"

namespace ndf {

struct LuxemburgQuery {
  double r = 1.0;
  double lambda_tolerance = 1e-13;  ///< relative width of the final bracket
  double kernel_probe_cap = 1e12;   ///< f counts as kernel if E(cap * f) <= r

  void validate() const;
};

/// |f|_{L,r} = inf { lambda > 0 : E(f / lambda) <= r }, +inf off the
/// domain. The returned value is the upper end of the final bracket, so
/// E(f / value) <= r always holds.
double luxemburg_norm(const EnergySpec& spec, const Field& f, const LuxemburgQuery& q = {});

struct FamilyCheck {
  bool level_set = true;  ///< E(f) <= r  <=>  |f|_{L,r} <= 1
  bool sandwich = true;   ///< |f|_{L,r} <= |f|_{L,s} <= (r/s) |f|_{L,r}
  double norm_r = 0.0;
  double norm_s = 0.0;
  bool pass() const { return level_set && sandwich; }
};

/// Checks the Luxemburg family relations for 0 < s <= r.
FamilyCheck luxemburg_family_check(const EnergySpec& spec, const Field& f, double r, double s,
                                   double tol = 1e-9);

/// 2^{max exponent}: E(2f) <= K E(f) for every f.
double delta2_constant(const EnergySpec& spec);

struct Delta2Report {
  double constant = 0.0;
  std::size_t samples = 0;
  std::size_t violations = 0;
  bool pass() const { return violations == 0; }
};

/// Evaluates E(2f) <= K E(f) on `samples` random feasible fields.
Delta2Report delta2_battery(const EnergySpec& spec, std::uint64_t seed, std::size_t samples = 100);

/// One-sided derivative d+E(f, g), analytic. +inf when g leaves the
/// domain (nonzero on the boundary). Throws DomainError if f is infeasible.
double directional_derivative(const EnergySpec& spec, const Field& f, const Field& g);

struct ConjugateResult {
  double value = 0.0;
  std::optional<Field> maximizer;
  bool diverged = false;
  SolveReport report;
};

/// E*(phi) = sup_x <phi, x>_mu - E(x). A component of phi along the
/// analytic kernel larger than 1e-9 (relative) makes the supremum infinite
/// and is reported as divergence without iterating.
ConjugateResult convex_conjugate(const EnergySpec& spec, const Field& phi, std::size_t budget = 500,
                                 const ProxConfig& cfg = {}, double divergence_threshold = 1e8);

struct DualityStep {
  double lambda = 0.0;
  double value = 0.0;         ///< <g_l, f> - E*(g_l)
  double gap_residual = 0.0;  ///< |<g_l, J_l f> - E(J_l f) - E*(g_l)|
  Field resolvent;            ///< J_l f
  Field slope;                ///< g_l = (f - J_l f) / l
};

/// Recovers E(f) as the limit of <g_l, f> - E*(g_l) along the schedule.
std::vector<DualityStep> duality_recover(const EnergySpec& spec, const Field& f,
                                         const std::vector<double>& lambdas, const ProxConfig& cfg = {});

}  // namespace ndf
