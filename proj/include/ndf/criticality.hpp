#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ndf/energy.hpp"
#include "ndf/resolvent.hpp"

namespace ndf {

/// Test fields: the feasible constant, single-point indicators, random
/// Gaussians and random plateaus (indicators of random subsets), all
/// vanishing on the boundary.
std::vector<Field> field_battery(const EnergySpec& spec, std::uint64_t seed, std::size_t random_count = 24);

/// K(w) = int w Gw dmu with 0 * inf = 0. Throws InconclusiveError if a
/// coordinate with w > 0 has an undecided Green value.
double K_of(const EnergySpec& spec, const Field& w, const GreenOptions& opts = {});

struct HardyCheck {
  bool pass = true;
  std::size_t checked = 0;
  double K = 0.0;
  double worst_margin = 0.0;  ///< min over the battery of (1 + K)|f|_L - int |f| w
};

/// int |f| w dmu <= (1 + K(w)) |f|_L over the battery. Throws
/// PreconditionError when K(w) is infinite.
HardyCheck hardy_upper_check(const EnergySpec& spec, const Field& w, const std::vector<Field>& battery,
                             const GreenOptions& opts = {});

struct OptimalConstant {
  double mu_hat = 0.0;       ///< certified lower bound on sup int |f| w / |f|_L
  double K_tilde = 0.0;      ///< inf { C : K(w / C) <= 1 }
  double K_at_mu_hat = 0.0;  ///< K(w / mu_hat)
  Field certificate;         ///< field attaining mu_hat
  bool pass = false;         ///< K(w / mu_hat) <= 1 + tol and mu_hat <= 2 K_tilde + tol
};

/// Estimates the optimal Hardy constant of w. `search_budget` bounds the
/// number of ratio evaluations spent in refinement.
OptimalConstant hardy_optimal_constant(const EnergySpec& spec, const Field& w, std::size_t search_budget = 200,
                                       std::uint64_t seed = 1, const GreenOptions& opts = {}, double tol = 1e-6);

struct HardyWeight {
  Field weight;
  double K = 0.0;
  bool positive = false;
  /// The construction's own inequality: K(w) <= |g|_1 for the Green
  /// quotient, int |f| W <= 2 |f|_L on the battery for the series.
  bool proof_bound = true;
  /// 0 <= G^{w_n} w_n <= 1 held for every series term.
  bool term_bounds = true;
  std::size_t terms = 0;
  std::string method;
};

/// w = g / (Gg v 1); requires Gg finite (PreconditionError otherwise).
HardyWeight hardy_from_green(const EnergySpec& spec, const Field& g, const GreenOptions& opts = {});

/// Partial sum of sum_n 2^-n w_n (1 - G^{w_n} w_n), w_n = seed / n, with
/// early exit once it is positive everywhere.
HardyWeight synthesize_hardy_weight(const EnergySpec& spec, const Field& seed_w, std::size_t n_terms = 20,
                                    const GreenOptions& opts = {}, std::uint64_t battery_seed = 7);

struct InvarianceCheck {
  bool pass = true;      ///< numeric verdict from the battery and resolvents
  bool analytic = true;  ///< graph ground truth
  double worst_energy_margin = 0.0;
  double worst_resolvent_residual = 0.0;
  bool agrees() const { return pass == analytic; }
};

InvarianceCheck invariant_set_check(const EnergySpec& spec, const PointSet& a, const std::vector<Field>& battery,
                                    const ProxConfig& cfg = {});

enum class Verdict { Critical, Subcritical, Reducible };
const char* verdict_name(Verdict v);

struct ClassifyOptions {
  GreenOptions green;
  std::size_t terms = 20;
  std::uint64_t seed = 7;
};

struct CriticalityReport {
  Verdict verdict = Verdict::Subcritical;
  PointSet invariant_set;              ///< Reducible witness
  std::vector<double> kernel_probes;   ///< Critical witness: E(l 1) = 0 at each l
  HardyWeight hardy;                   ///< Subcritical witness
  bool witness_pending = false;
  std::vector<std::string> diagnostics;
};

CriticalityReport classify(const EnergySpec& spec, const ClassifyOptions& opts = {});

struct HardyProfile {
  std::vector<double> r_grid;
  std::vector<double> alpha_of_r;
  std::vector<Field> certificates;  ///< field attaining each value (empty when the value is 0)
  std::string method;
};

/// Lower bounds on the best alpha(r) in
///   |f|_{L^p(w)} <= alpha(r) |f|_L + r |f|_inf.
/// Requires a trivial kernel.
HardyProfile weak_hardy_profile(const EnergySpec& spec, const Field& w, double p, const std::vector<double>& r_grid,
                                std::size_t search_budget = 200, std::uint64_t seed = 1);

/// Lower bounds on the best alpha(r) in
///   |f - mean_w f|_{L^p(w)} <= alpha(r) |f|_L + r (max f - min f).
/// Requires the kernel to be exactly the constants.
HardyProfile weak_poincare_profile(const EnergySpec& spec, const Field& w, double p,
                                   const std::vector<double>& r_grid, std::size_t search_budget = 200,
                                   std::uint64_t seed = 1);

}  // namespace ndf
