#include "ndf/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ndf/errors.hpp"
#include "ndf/topology.hpp"

namespace ndf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParameterError("resolvent parameter must be positive");
}

ProxConfig tightened(const ProxConfig& cfg, double factor) {
  ProxConfig out = cfg;
  out.residual_tolerance = cfg.residual_tolerance * std::min(1.0, factor);
  return out;
}

double min_mu(const EnergySpec& spec) { return spec.space().mu().minCoeff(); }

}  // namespace

ProxResult prox(const EnergySpec& spec, double alpha, const Field& f, const ProxConfig& cfg,
                const std::optional<Field>& warm_start) {
  require_alpha(alpha);
  spec.space().require_field(f);
  ConvexProblem prob;
  prob.spec = &spec;
  prob.c = alpha;
  prob.b = f;
  const Field x0 = warm_start ? *warm_start : Field(f / alpha);
  SolveOutcome out = minimize(prob, spec.project_feasible(x0), cfg);
  return {std::move(out.x), out.report};
}

double prox_error_bound(const SolveReport& report, double alpha) { return report.tolerance / alpha; }

IdentityCheck resolvent_identity_check(const EnergySpec& spec, double alpha, double beta, const Field& f,
                                       const ProxConfig& cfg) {
  require_alpha(alpha);
  require_alpha(beta);
  const ProxConfig inner = tightened(cfg, std::min(alpha, beta) / (1.0 + std::abs(beta - alpha)) / 10.0);
  const ProxResult ga = prox(spec, alpha, f, inner);
  const ProxResult gb = prox(spec, beta, f + (beta - alpha) * ga.value, inner, ga.value);
  IdentityCheck out;
  out.residual = norm(spec.space(), ga.value - gb.value);
  out.threshold = 10.0 * std::max({cfg.residual_tolerance, ga.report.tolerance, gb.report.tolerance});
  out.pass = out.residual <= out.threshold;
  return out;
}

MarkovReport markov_property_checks(const EnergySpec& spec, double alpha,
                                    const std::vector<std::pair<Field, Field>>& pairs, const ProxConfig& cfg) {
  require_alpha(alpha);
  const MeasureSpace& space = spec.space();
  const double root_min_mu = std::sqrt(min_mu(spec));
  const double root_mass = std::sqrt(space.total_mass());
  MarkovReport rep;
  rep.worst_order_margin = kInf;
  for (const auto& [f, g] : pairs) {
    ++rep.pairs;
    const ProxResult gf = prox(spec, alpha, f, cfg);
    const ProxResult gg = prox(spec, alpha, g, cfg, gf.value);
    const double err = prox_error_bound(gf.report, alpha) + prox_error_bound(gg.report, alpha);
    const Field diff = gf.value - gg.value;
    const Field data = f - g;
    const double slack = 1e-12 * (1.0 + sup_norm(f) + sup_norm(g));

    if ((data.array() >= 0.0).all()) {
      const double margin = diff.minCoeff();
      rep.worst_order_margin = std::min(rep.worst_order_margin, margin);
      if (margin < -(err / root_min_mu + slack)) ++rep.order_violations;
    }
    if (alpha * sup_norm(diff) > sup_norm(data) + alpha * err / root_min_mu + slack) ++rep.sup_violations;
    if (alpha * l1_norm(space, diff) > l1_norm(space, data) + alpha * err * root_mass + slack * space.total_mass()) {
      ++rep.l1_violations;
    }
    if (norm(space, diff) > norm(space, data) / alpha + err + slack / alpha) ++rep.lipschitz_violations;
  }
  return rep;
}

PerturbedProxResult perturbed_prox(const EnergySpec& spec, const Field& w, double alpha, const Field& f,
                                   const ProxConfig& cfg, const std::optional<Field>& second_weight) {
  require_alpha(alpha);
  const EnergySpec ew = perturb(spec, w);
  const Field v = second_weight ? *second_weight : Field(w.array() + 1.0);
  const EnergySpec ev = perturb(spec, v);

  PerturbedProxResult out;
  const ProxResult main = prox(ew, alpha, f, cfg);
  out.value = main.value;
  out.report = main.report;

  const double wmax = std::max(sup_norm(w), sup_norm(v - w));
  const ProxConfig inner = tightened(cfg, 1.0 / (1.0 + wmax / alpha));
  const ProxResult tight = prox(ew, alpha, f, inner, main.value);
  const ProxResult plain = prox(spec, alpha, f - w.cwiseProduct(tight.value), inner, tight.value);
  const ProxResult other = prox(ev, alpha, f + (v - w).cwiseProduct(tight.value), inner, tight.value);
  out.fixed_point_residual = norm(spec.space(), tight.value - plain.value);
  out.exchange_residual = norm(spec.space(), tight.value - other.value);
  const double e0 = prox_error_bound(tight.report, alpha);
  const double e1 = std::max(prox_error_bound(plain.report, alpha), prox_error_bound(other.report, alpha));
  out.threshold = 10.0 * std::max(cfg.residual_tolerance, e0 * (1.0 + wmax / alpha) + e1);
  return out;
}

GreenResult green(const EnergySpec& spec, const Field& f, const GreenOptions& opts) {
  spec.space().require_field(f);
  if ((f.array() < 0.0).any()) throw ParameterError("green: data must be nonnegative");
  require_alpha(opts.alpha0);
  opts.prox.validate();

  GreenResult out;
  const Field data = spec.project_feasible(f);
  if (sup_norm(data) == 0.0) {
    out.field = spec.space().zeros();
    out.alpha_trace.emplace_back(opts.alpha0, 0.0);
    return out;
  }

  ConvexProblem prob;
  prob.spec = &spec;
  prob.b = data;
  prob.divergence_threshold = opts.divergence_threshold;

  const double tol = opts.prox.residual_tolerance;
  Field x = data / opts.alpha0;
  Field prev;
  double prev_diff = kInf;
  for (std::size_t k = 0; k <= opts.depth; ++k) {
    const double alpha = std::ldexp(opts.alpha0, -static_cast<int>(k));
    prob.c = alpha;
    SolveOutcome sol;
    try {
      sol = minimize(prob, x, opts.prox);
    } catch (const NonConvergenceError& e) {
      if (sup_norm(e.best_iterate()) > opts.divergence_threshold) {
        sol.x = e.best_iterate();
        sol.report.diverged = true;
      } else {
        throw;
      }
    }
    x = sol.x;
    const double sup = sup_norm(x);
    out.alpha_trace.emplace_back(alpha, sup);
    out.scale_at_exit = sup;
    out.field = x;
    if (sol.report.diverged || sup > opts.divergence_threshold) {
      out.status = GreenStatus::Divergent;
      return out;
    }
    if (k == 0) {
      prev = x;
      continue;
    }
    const double floor = prox_error_bound(sol.report, alpha) / std::sqrt(min_mu(spec));
    if ((x - prev).minCoeff() < -(2.0 * floor + 1e-12 * sup)) out.monotone = false;
    const double diff = sup_norm(x - prev);
    if (diff < tol) {
      out.status = GreenStatus::Finite;
      return out;
    }
    const double ratio = diff / prev_diff;
    if (opts.limit_solve && k >= 3 && ratio <= 0.75) {
      // Geometric tail: the remaining distance to the limit is about
      // diff * ratio / (1 - ratio).
      const double tail = diff * ratio / (1.0 - ratio);
      ConvexProblem lim = prob;
      lim.c = 0.0;
      try {
        SolveOutcome ls = minimize(lim, x, opts.prox);
        const double gap = sup_norm(ls.x - x);
        if (ls.report.converged && (ls.x - x).minCoeff() >= -(2.0 * floor + 1e-12 * sup) &&
            gap <= 100.0 * tail + tol) {
          out.status = GreenStatus::Finite;
          out.field = ls.x;
          out.scale_at_exit = sup_norm(ls.x);
          out.limit_solved = true;
          return out;
        }
      } catch (const NonConvergenceError&) {
        // fall through to the schedule
      }
    }
    prev_diff = diff;
    prev = x;
  }
  throw InconclusiveError("green: schedule of depth " + std::to_string(opts.depth) +
                          " ended without convergence or divergence");
}

bool ExtendedField::any_pending() const { return std::any_of(pending.begin(), pending.end(), [](bool b) { return b; }); }

ExtendedField green_on_nonneg(const EnergySpec& spec, const Field& f, const GreenOptions& opts) {
  spec.space().require_field(f);
  if ((f.array() < 0.0).any()) throw ParameterError("green: data must be nonnegative");
  ExtendedField out;
  out.value = spec.space().zeros();
  out.pending.assign(spec.size(), false);
  const Components comps = interior_components(spec);
  for (std::size_t c = 0; c < comps.count; ++c) {
    const PointSet members = comps.members(c);
    const Field part = f.cwiseProduct(spec.space().indicator(members));
    if (sup_norm(part) == 0.0) continue;
    try {
      const GreenResult g = green(spec, part, opts);
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (!members[i]) continue;
        const auto k = static_cast<Eigen::Index>(i);
        out.value[k] = g.status == GreenStatus::Finite ? g.field[k] : kInf;
      }
    } catch (const InconclusiveError&) {
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (members[i]) {
          out.pending[i] = true;
          out.value[static_cast<Eigen::Index>(i)] = std::numeric_limits<double>::quiet_NaN();
        }
      }
    }
  }
  return out;
}

}  // namespace ndf
