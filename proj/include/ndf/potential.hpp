#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ndf/energy.hpp"
#include "ndf/resolvent.hpp"
#include "ndf/solver.hpp"

namespace ndf {

struct PotentialTolerances {
  double constraint = 1e-8;
  double value = 1e-6;
  double derivative = 1e-7;
};

struct ExcessiveCheck {
  bool resolvent = true;   ///< G_a(a h) <= h for each alpha
  bool lattice = true;     ///< E(f ^ h) <= E(f) on the battery
  bool derivative = true;  ///< d+E(h, e_x) >= 0 (only when E(h) < inf)
  bool derivative_tested = false;
  double worst_resolvent = 0.0;  ///< max of G_a(a h) - h
  double worst_lattice = 0.0;    ///< max of E(f ^ h) - E(f)
  double worst_derivative = 0.0; ///< min of d+E(h, e_x)
  bool pass() const { return resolvent && lattice && derivative; }
};

ExcessiveCheck is_excessive(const EnergySpec& spec, const Field& h, const std::vector<Field>& battery,
                            const std::vector<double>& alphas = {0.5, 1.0, 2.0}, const ProxConfig& cfg = {},
                            const PotentialTolerances& tol = {});

/// Minimizer of E over { f >= g on A }, with Tikhonov continuation through
/// eps = 1e-4, 1e-6, 0.
ProxResult excessive_envelope(const EnergySpec& spec, const Field& g, const PointSet& a, const ProxConfig& cfg = {});

struct CapacityResult {
  double value = 0.0;
  Field equilibrium;
  SolveReport report;
  Field h_ref;
  bool bounds_ok = true;      ///< 0 <= e <= h, e = h on the target
  bool derivative_ok = true;  ///< d+E(e, +-e_x) >= 0 off the target, d+E(e, e_x) >= 0 on it
  double worst_derivative = 0.0;
  /// Alternative formula inf { E(h - g) : g = 0 on A }; filled by capacity().
  double alternative = 0.0;
  bool formulas_agree = true;
};

/// e_O = (envelope of h on O) ^ h and cap_h(O) = E(e_O).
CapacityResult equilibrium_potential(const EnergySpec& spec, const PointSet& o, const Field& h,
                                     const ProxConfig& cfg = {}, const PotentialTolerances& tol = {});

/// cap_h(A) under the discrete topology, cross-checked against the
/// alternative formula.
CapacityResult capacity(const EnergySpec& spec, const PointSet& a, const Field& h, const ProxConfig& cfg = {},
                        const PotentialTolerances& tol = {});

struct ChoquetReport {
  std::size_t sets = 0;
  std::size_t pairs = 0;
  std::size_t monotone_violations = 0;
  std::size_t subadditivity_violations = 0;
  std::size_t continuity_violations = 0;
  std::size_t solver_failures = 0;
  double worst_subadditivity_margin = 0.0;
  bool pass() const {
    return monotone_violations == 0 && subadditivity_violations == 0 && continuity_violations == 0 &&
           solver_failures == 0;
  }
};

/// Monotonicity and strong subadditivity over all pairs of the family (and
/// their unions and intersections), and continuity from below along the
/// chain of point-by-point unions of each set.
ChoquetReport choquet_suite(const EnergySpec& spec, const Field& h, const std::vector<PointSet>& family,
                            const ProxConfig& cfg = {}, const PotentialTolerances& tol = {});

/// Every subset of the space.
std::vector<PointSet> all_subsets(std::size_t n);

struct CapacityZeroReport {
  bool pass = true;
  double empty = 0.0;
  std::vector<double> singletons;  ///< +inf for infeasible singletons
};

/// On a finite space with positive weights only the empty set has zero
/// capacity. Requires a trivial kernel and h > 0.
CapacityZeroReport capacity_zero_property(const EnergySpec& spec, const Field& h, const ProxConfig& cfg = {},
                                          double tol = 1e-8);

struct Ball {
  double radius = 0.0;
  EnergySpec spec;
  PointSet inner;
};

struct ExhaustionPoint {
  double radius = 0.0;
  double capacity = 0.0;
  bool ok = true;
  std::string error;
};

/// Capacity of each ball's inner set with h = h_level * 1.
std::vector<ExhaustionPoint> exhaustion_capacity_profile(const std::vector<Ball>& family, double h_level = 1.0,
                                                         const ProxConfig& cfg = {});

/// Path 0 - 1 - ... - n with unit data, Dirichlet at n, inner set {0}.
Ball path_ball(std::size_t n, double exponent = 2.0);

/// Binary tree of the given depth, Dirichlet leaves, inner set the root.
Ball binary_tree_ball(std::size_t depth, double exponent = 2.0);

}  // namespace ndf
