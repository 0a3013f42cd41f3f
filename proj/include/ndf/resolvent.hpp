#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "ndf/energy.hpp"
#include "ndf/solver.hpp"

namespace ndf {

struct ProxResult {
  Field value;
  SolveReport report;
};

/// G_alpha f: the minimizer of E(g) + (alpha/2) |g - f/alpha|^2.
/// `warm_start` defaults to f/alpha.
ProxResult prox(const EnergySpec& spec, double alpha, const Field& f, const ProxConfig& cfg = {},
                const std::optional<Field>& warm_start = std::nullopt);

/// Bound on |x - G_alpha f|_mu implied by the residual tolerance enforced
/// for x (strong convexity of the prox objective).
double prox_error_bound(const SolveReport& report, double alpha);

struct IdentityCheck {
  bool pass = false;
  double residual = 0.0;
  double threshold = 0.0;
};

/// |G_a f - G_b(f + (b - a) G_a f)|_mu against 10 times the tolerance.
IdentityCheck resolvent_identity_check(const EnergySpec& spec, double alpha, double beta, const Field& f,
                                       const ProxConfig& cfg = {});

struct MarkovReport {
  std::size_t pairs = 0;
  std::size_t order_violations = 0;
  std::size_t sup_violations = 0;
  std::size_t l1_violations = 0;
  std::size_t lipschitz_violations = 0;
  double worst_order_margin = 0.0;  ///< min over ordered pairs of min(G f - G g)
  bool pass() const {
    return order_violations == 0 && sup_violations == 0 && l1_violations == 0 && lipschitz_violations == 0;
  }
};

/// For each pair (f, g): L-infinity and L1 contraction of alpha G_alpha and
/// the 1/alpha-Lipschitz bound in L2; for pairs with f >= g also order
/// preservation G f >= G g.
MarkovReport markov_property_checks(const EnergySpec& spec, double alpha,
                                    const std::vector<std::pair<Field, Field>>& pairs,
                                    const ProxConfig& cfg = {});

struct PerturbedProxResult {
  Field value;
  SolveReport report;
  /// |G^w f - G(f - w G^w f)|_mu
  double fixed_point_residual = 0.0;
  /// |G^w f - G^v(f + (v - w) G^w f)|_mu for the second weight v
  double exchange_residual = 0.0;
  double threshold = 0.0;
  bool pass() const { return fixed_point_residual <= threshold && exchange_residual <= threshold; }
};

/// Prox of the perturbed form E_w, post-checked against the fixed-point
/// relations with the unperturbed resolvent and with a second weight
/// (default w + 1).
PerturbedProxResult perturbed_prox(const EnergySpec& spec, const Field& w, double alpha, const Field& f,
                                   const ProxConfig& cfg = {},
                                   const std::optional<Field>& second_weight = std::nullopt);

struct GreenOptions {
  double alpha0 = 1.0;
  std::size_t depth = 40;
  double divergence_threshold = 1e8;
  ProxConfig prox;
  /// Finish geometrically converging schedules with a direct solve of the
  /// alpha = 0 problem.
  bool limit_solve = true;
};

enum class GreenStatus { Finite, Divergent };

struct GreenResult {
  GreenStatus status = GreenStatus::Finite;
  Field field;               ///< the limit when Finite, the last iterate otherwise
  double scale_at_exit = 0;  ///< sup-norm of the last iterate
  std::vector<std::pair<double, double>> alpha_trace;  ///< (alpha, |G_alpha f|_inf)
  bool monotone = true;      ///< the trace increased as alpha decreased
  bool limit_solved = false;
};

/// Gf = lim G_alpha f along alpha0 2^-k, k = 0..depth, for f >= 0.
/// Throws InconclusiveError when neither verdict is reached.
GreenResult green(const EnergySpec& spec, const Field& f, const GreenOptions& opts = {});

struct ExtendedField {
  Field value;                 ///< +inf where the Green trace diverges
  std::vector<bool> pending;   ///< coordinates whose limit was inconclusive
  bool any_pending() const;
};

/// Coordinatewise extended Green value, computed per interior component.
ExtendedField green_on_nonneg(const EnergySpec& spec, const Field& f, const GreenOptions& opts = {});

}  // namespace ndf
