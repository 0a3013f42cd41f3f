#include "ndf/semimodular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ndf/errors.hpp"
#include "ndf/random.hpp"
#include "ndf/resolvent.hpp"
#include "ndf/topology.hpp"

namespace ndf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void LuxemburgQuery::validate() const {
  if (!(r > 0.0)) throw ParameterError("Luxemburg level r must be positive");
  if (!(lambda_tolerance > 0.0)) throw ParameterError("Luxemburg tolerance must be positive");
  if (!(kernel_probe_cap > 0.0)) throw ParameterError("kernel probe cap must be positive");
}

double luxemburg_norm(const EnergySpec& spec, const Field& f, const LuxemburgQuery& q) {
  q.validate();
  spec.space().require_field(f);
  if (!spec.feasible(f)) return kInf;
  const double scale = sup_norm(f);
  if (scale == 0.0 || in_analytic_kernel(spec, f)) return 0.0;
  if (energy(spec, q.kernel_probe_cap * f) <= q.r) return 0.0;

  auto fits = [&](double lambda) { return energy(spec, f / lambda) <= q.r; };
  double hi = 2.0 * std::max(1.0, energy(spec, f) / q.r);
  while (!fits(hi)) hi *= 2.0;
  double lo = 1e-12 * scale;
  while (fits(lo)) {
    lo *= 1e-3;
    if (lo < 1.0 / q.kernel_probe_cap) return 0.0;
  }
  for (int it = 0; it < 200 && hi > lo * (1.0 + q.lambda_tolerance); ++it) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    (fits(mid) ? hi : lo) = mid;
  }
  return hi;
}

FamilyCheck luxemburg_family_check(const EnergySpec& spec, const Field& f, double r, double s, double tol) {
  if (!(s > 0.0) || !(s <= r)) throw ParameterError("Luxemburg family check needs 0 < s <= r");
  FamilyCheck out;
  LuxemburgQuery qr, qs;
  qr.r = r;
  qs.r = s;
  out.norm_r = luxemburg_norm(spec, f, qr);
  out.norm_s = luxemburg_norm(spec, f, qs);

  const double e = energy(spec, f);
  const bool below = e <= r;
  const bool unit_ball = out.norm_r <= 1.0 + tol;
  // Borderline energies are decided by rounding; skip them.
  if (std::abs(e - r) > tol * r) out.level_set = below == unit_ball;

  if (std::isinf(out.norm_r) || std::isinf(out.norm_s)) {
    out.sandwich = std::isinf(out.norm_r) && std::isinf(out.norm_s);
  } else {
    const double slack = tol * std::max(out.norm_r, out.norm_s);
    out.sandwich = out.norm_r <= out.norm_s + slack && out.norm_s <= (r / s) * out.norm_r + slack;
  }
  return out;
}

double delta2_constant(const EnergySpec& spec) { return std::pow(2.0, spec.max_exponent()); }

Delta2Report delta2_battery(const EnergySpec& spec, std::uint64_t seed, std::size_t samples) {
  Delta2Report rep;
  rep.constant = delta2_constant(spec);
  Rng rng(seed);
  for (std::size_t k = 0; k < samples; ++k) {
    const Field f = random_field(rng, spec, std::ldexp(1.0, static_cast<int>(k % 7) - 3));
    const double lhs = energy(spec, 2.0 * f);
    const double rhs = rep.constant * energy(spec, f);
    ++rep.samples;
    if (lhs > rhs + scaled_tolerance(rhs, 1e-12)) ++rep.violations;
  }
  return rep;
}

double directional_derivative(const EnergySpec& spec, const Field& f, const Field& g) {
  spec.space().require_field(f);
  spec.space().require_field(g, "direction");
  if (!spec.feasible(f)) throw DomainError("directional derivative: base point is nonzero on the boundary");
  if (!spec.feasible(g)) return kInf;
  return energy_partials(spec, f).dot(g);
}

ConjugateResult convex_conjugate(const EnergySpec& spec, const Field& phi, std::size_t budget,
                                 const ProxConfig& cfg, double divergence_threshold) {
  spec.space().require_field(phi, "dual element");
  const Field& mu = spec.space().mu();
  ConjugateResult out;
  const std::vector<PointSet> kernel = kernel_basis(spec);
  Field target = spec.project_feasible(phi);
  for (const PointSet& k : kernel) {
    double mass = 0.0, weight = 0.0, spread = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (!k[i]) continue;
      const auto j = static_cast<Eigen::Index>(i);
      mass += mu[j] * target[j];
      weight += mu[j];
      spread += mu[j] * std::abs(target[j]);
    }
    if (std::abs(mass) > 1e-9 * spread) {
      out.value = kInf;
      out.diverged = true;
      return out;
    }
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (k[i]) target[static_cast<Eigen::Index>(i)] -= mass / weight;
    }
  }

  ConvexProblem prob;
  prob.spec = &spec;
  prob.b = target;
  prob.kernel = kernel;
  prob.divergence_threshold = divergence_threshold;
  ProxConfig solver_cfg = cfg;
  solver_cfg.max_iterations = budget;
  SolveOutcome sol;
  try {
    sol = minimize(prob, spec.space().zeros(), solver_cfg);
  } catch (const NonConvergenceError& e) {
    if (sup_norm(e.best_iterate()) <= divergence_threshold) throw;
    sol.x = e.best_iterate();
    sol.report.diverged = true;
  }
  out.report = sol.report;
  if (sol.report.diverged) {
    out.value = kInf;
    out.diverged = true;
    return out;
  }
  out.value = inner(spec.space(), target, sol.x) - energy(spec, sol.x);
  out.maximizer = sol.x;
  return out;
}

std::vector<DualityStep> duality_recover(const EnergySpec& spec, const Field& f, const std::vector<double>& lambdas,
                                         const ProxConfig& cfg) {
  spec.space().require_field(f);
  if (!spec.feasible(f)) throw DomainError("duality recovery needs f in the domain");
  std::vector<DualityStep> out;
  double previous = kInf;
  std::optional<Field> warm;
  for (double lambda : lambdas) {
    if (!(lambda > 0.0) || !(lambda < previous)) throw ParameterError("lambda schedule must be positive and decreasing");
    previous = lambda;
    DualityStep step;
    step.lambda = lambda;
    const ProxResult j = prox(spec, 1.0 / lambda, f / lambda, cfg, warm);
    warm = j.value;
    step.resolvent = j.value;
    step.slope = (f - j.value) / lambda;
    const ConjugateResult conj = convex_conjugate(spec, step.slope, cfg.max_iterations, cfg);
    if (conj.diverged) throw NonConvergenceError("duality recovery: conjugate diverged", step.slope, kInf);
    step.value = inner(spec.space(), step.slope, f) - conj.value;
    step.gap_residual = std::abs(inner(spec.space(), step.slope, j.value) - energy(spec, j.value) - conj.value);
    out.push_back(std::move(step));
  }
  return out;
}

}  // namespace ndf
