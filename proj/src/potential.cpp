#include "ndf/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ndf/errors.hpp"
#include "ndf/semimodular.hpp"
#include "ndf/topology.hpp"

namespace ndf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Field unit(const EnergySpec& spec, std::size_t i) {
  Field e = spec.space().zeros();
  e[static_cast<Eigen::Index>(i)] = 1.0;
  return e;
}

bool empty(const PointSet& a) { return std::none_of(a.begin(), a.end(), [](bool b) { return b; }); }

void require_target_feasible(const EnergySpec& spec, const Field& g, const PointSet& a) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && spec.is_boundary(i) && g[static_cast<Eigen::Index>(i)] > 0.0) {
      throw DomainError("constraint requires a positive value at boundary point '" + spec.space().ids()[i] + "'");
    }
  }
}

}  // namespace

ExcessiveCheck is_excessive(const EnergySpec& spec, const Field& h, const std::vector<Field>& battery,
                            const std::vector<double>& alphas, const ProxConfig& cfg, const PotentialTolerances& tol) {
  spec.space().require_field(h, "reference function");
  if ((h.array() < 0.0).any()) throw ParameterError("excessive candidate must be nonnegative");
  ExcessiveCheck out;
  const double root_min_mu = std::sqrt(spec.space().mu().minCoeff());
  out.worst_resolvent = -kInf;
  for (double alpha : alphas) {
    const ProxResult g = prox(spec, alpha, alpha * h, cfg);
    const double excess = (g.value - h).maxCoeff();
    out.worst_resolvent = std::max(out.worst_resolvent, excess);
    if (excess > tol.constraint + prox_error_bound(g.report, alpha) / root_min_mu) out.resolvent = false;
  }
  out.worst_lattice = -kInf;
  for (const Field& f : battery) {
    const double rhs = energy(spec, f);
    if (std::isinf(rhs)) continue;
    const double lhs = energy(spec, f.cwiseMin(h));
    out.worst_lattice = std::max(out.worst_lattice, lhs - rhs);
    if (lhs > rhs + scaled_tolerance(rhs, tol.derivative)) out.lattice = false;
  }
  if (spec.feasible(h)) {
    out.derivative_tested = true;
    out.worst_derivative = kInf;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      if (spec.is_boundary(i)) continue;
      const double d = directional_derivative(spec, h, unit(spec, i));
      out.worst_derivative = std::min(out.worst_derivative, d);
      if (d < -tol.derivative) out.derivative = false;
    }
  }
  return out;
}

ProxResult excessive_envelope(const EnergySpec& spec, const Field& g, const PointSet& a, const ProxConfig& cfg) {
  spec.space().require_field(g, "obstacle");
  spec.space().require_set(a, "constraint set");
  require_target_feasible(spec, g, a);
  ProxResult out;
  out.value = spec.space().zeros();
  out.report.converged = true;
  bool active = false;
  for (std::size_t i = 0; i < a.size(); ++i) active = active || (a[i] && g[static_cast<Eigen::Index>(i)] > 0.0);
  if (!active) return out;

  ConvexProblem prob;
  prob.spec = &spec;
  prob.bounded = a;
  prob.lower = g;
  Field x = spec.space().zeros();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i]) x[static_cast<Eigen::Index>(i)] = std::max(0.0, g[static_cast<Eigen::Index>(i)]);
  }
  for (double eps : {1e-4, 1e-6, 0.0}) {
    prob.c = eps;
    SolveOutcome sol = minimize(prob, x, cfg);
    x = sol.x;
    out.report = sol.report;
  }
  out.value = x;
  return out;
}

CapacityResult equilibrium_potential(const EnergySpec& spec, const PointSet& o, const Field& h, const ProxConfig& cfg,
                                     const PotentialTolerances& tol) {
  spec.space().require_field(h, "reference function");
  if ((h.array() < 0.0).any()) throw ParameterError("reference function must be nonnegative");
  CapacityResult out;
  out.h_ref = h;
  const ProxResult env = excessive_envelope(spec, h, o, cfg);
  out.report = env.report;
  out.equilibrium = env.value.cwiseMin(h);
  out.value = energy(spec, out.equilibrium);

  const Field& e = out.equilibrium;
  for (std::size_t i = 0; i < o.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (e[k] < -tol.constraint || e[k] > h[k] + tol.constraint) out.bounds_ok = false;
    if (o[i] && std::abs(e[k] - h[k]) > tol.constraint) out.bounds_ok = false;
  }
  out.worst_derivative = kInf;
  if (spec.feasible(e)) {
    const Field partials = energy_partials(spec, e);
    for (std::size_t i = 0; i < o.size(); ++i) {
      if (spec.is_boundary(i)) continue;
      const double d = partials[static_cast<Eigen::Index>(i)];
      const double worst = o[i] ? d : std::min(d, -d);
      out.worst_derivative = std::min(out.worst_derivative, worst);
      if (worst < -tol.derivative) out.derivative_ok = false;
    }
  } else {
    out.derivative_ok = false;
  }
  return out;
}

CapacityResult capacity(const EnergySpec& spec, const PointSet& a, const Field& h, const ProxConfig& cfg,
                        const PotentialTolerances& tol) {
  CapacityResult out = equilibrium_potential(spec, a, h, cfg, tol);
  if (empty(a)) {
    out.alternative = 0.0;
    return out;
  }
  ConvexProblem alt;
  alt.spec = &spec;
  alt.fixed = a;
  alt.fixed_value = h;
  const SolveOutcome sol = minimize(alt, out.equilibrium, cfg);
  out.alternative = energy(spec, sol.x);
  out.formulas_agree = std::abs(out.alternative - out.value) <= scaled_tolerance(out.value, tol.value);
  return out;
}

std::vector<PointSet> all_subsets(std::size_t n) {
  if (n >= 20) throw ParameterError("refusing to enumerate subsets of more than 19 points");
  std::vector<PointSet> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    PointSet s(n, false);
    for (std::size_t i = 0; i < n; ++i) s[i] = (mask >> i) & 1U;
    out.push_back(std::move(s));
  }
  return out;
}

ChoquetReport choquet_suite(const EnergySpec& spec, const Field& h, const std::vector<PointSet>& family,
                            const ProxConfig& cfg, const PotentialTolerances& tol) {
  ChoquetReport rep;
  std::map<PointSet, double> cache;
  auto cap = [&](const PointSet& s) {
    auto it = cache.find(s);
    if (it != cache.end()) return it->second;
    double v;
    try {
      v = equilibrium_potential(spec, s, h, cfg, tol).value;
    } catch (const DomainError&) {
      v = kInf;
    } catch (const NonConvergenceError&) {
      ++rep.solver_failures;
      v = std::numeric_limits<double>::quiet_NaN();
    }
    cache.emplace(s, v);
    return v;
  };
  auto slack = [&](double v) { return scaled_tolerance(std::isfinite(v) ? v : 0.0, tol.value); };

  rep.worst_subadditivity_margin = kInf;
  const std::size_t n = spec.size();
  for (const PointSet& a : family) {
    spec.space().require_set(a, "family member");
    ++rep.sets;
    for (const PointSet& b : family) {
      ++rep.pairs;
      PointSet meet(n), join(n);
      bool subset = true;
      for (std::size_t i = 0; i < n; ++i) {
        meet[i] = a[i] && b[i];
        join[i] = a[i] || b[i];
        subset = subset && (!a[i] || b[i]);
      }
      const double ca = cap(a), cb = cap(b), cm = cap(meet), cj = cap(join);
      if (subset && ca > cb + slack(cb)) ++rep.monotone_violations;
      if (std::isfinite(ca) && std::isfinite(cb)) {
        const double margin = ca + cb - cm - cj;
        rep.worst_subadditivity_margin = std::min(rep.worst_subadditivity_margin, margin);
        if (margin < -slack(ca + cb)) ++rep.subadditivity_violations;
      }
    }
    // Increasing chain O_1 c O_2 c ... c a, one point at a time.
    PointSet chain(n, false);
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!a[i]) continue;
      chain[i] = true;
      const double c = cap(chain);
      if (c < sup - slack(sup)) ++rep.monotone_violations;
      sup = std::max(sup, c);
    }
    const double whole = cap(a);
    if (std::isfinite(whole) && std::abs(sup - whole) > slack(whole)) ++rep.continuity_violations;
  }
  return rep;
}

CapacityZeroReport capacity_zero_property(const EnergySpec& spec, const Field& h, const ProxConfig& cfg, double tol) {
  spec.space().require_field(h, "reference function");
  if (!(h.array() > 0.0).all()) throw ParameterError("capacity-zero property needs h > 0");
  if (!kernel_basis(spec).empty()) throw PreconditionError("capacity-zero property needs a subcritical form");
  CapacityZeroReport rep;
  rep.empty = equilibrium_potential(spec, spec.space().empty_set(), h, cfg).value;
  if (rep.empty != 0.0) rep.pass = false;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    PointSet s = spec.space().empty_set();
    s[i] = true;
    double v;
    try {
      v = equilibrium_potential(spec, s, h, cfg).value;
    } catch (const DomainError&) {
      v = kInf;
    }
    rep.singletons.push_back(v);
    if (!(v > tol)) rep.pass = false;
  }
  return rep;
}

std::vector<ExhaustionPoint> exhaustion_capacity_profile(const std::vector<Ball>& family, double h_level,
                                                         const ProxConfig& cfg) {
  std::vector<ExhaustionPoint> out;
  for (const Ball& b : family) {
    ExhaustionPoint pt;
    pt.radius = b.radius;
    try {
      pt.capacity = equilibrium_potential(b.spec, b.inner, b.spec.space().constant(h_level), cfg).value;
    } catch (const Error& e) {
      pt.ok = false;
      pt.error = e.what();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

Ball path_ball(std::size_t n, double exponent) {
  if (n == 0) throw ParameterError("path needs at least one edge");
  SpecBuilder b;
  for (std::size_t i = 0; i <= n; ++i) b.point("v" + std::to_string(i));
  for (std::size_t i = 0; i < n; ++i) b.edge("v" + std::to_string(i), "v" + std::to_string(i + 1), 1.0, exponent);
  b.boundary("v" + std::to_string(n));
  Ball ball;
  ball.radius = static_cast<double>(n);
  ball.spec = b.build();
  ball.inner = ball.spec.space().empty_set();
  ball.inner[0] = true;
  return ball;
}

Ball binary_tree_ball(std::size_t depth, double exponent) {
  if (depth == 0 || depth > 16) throw ParameterError("tree depth must lie in [1, 16]");
  const std::size_t count = (std::size_t{1} << (depth + 1)) - 1;
  SpecBuilder b;
  for (std::size_t i = 0; i < count; ++i) b.point("t" + std::to_string(i));
  for (std::size_t i = 1; i < count; ++i) b.edge("t" + std::to_string((i - 1) / 2), "t" + std::to_string(i), 1.0, exponent);
  for (std::size_t i = (std::size_t{1} << depth) - 1; i < count; ++i) b.boundary("t" + std::to_string(i));
  Ball ball;
  ball.radius = static_cast<double>(depth);
  ball.spec = b.build();
  ball.inner = ball.spec.space().empty_set();
  ball.inner[0] = true;
  return ball;
}

}  // namespace ndf
