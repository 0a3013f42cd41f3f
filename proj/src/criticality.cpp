#include "ndf/criticality.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "ndf/errors.hpp"
#include "ndf/potential.hpp"
#include "ndf/random.hpp"
#include "ndf/semimodular.hpp"
#include "ndf/topology.hpp"

namespace ndf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lux(const EnergySpec& spec, const Field& f) { return luxemburg_norm(spec, f); }

double weighted_l1(const EnergySpec& spec, const Field& f, const Field& w) {
  return spec.space().mu().cwiseProduct(w).dot(f.cwiseAbs());
}

void require_nonneg(const Field& w, const char* what) {
  if ((w.array() < 0.0).any()) throw ParameterError(std::string(what) + " must be nonnegative");
}

}  // namespace

std::vector<Field> field_battery(const EnergySpec& spec, std::uint64_t seed, std::size_t random_count) {
  const MeasureSpace& space = spec.space();
  std::vector<Field> out;
  out.push_back(spec.project_feasible(space.constant(1.0)));
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (spec.is_boundary(i)) continue;
    Field e = space.zeros();
    e[static_cast<Eigen::Index>(i)] = 1.0;
    out.push_back(e);
  }
  Rng rng(seed);
  for (std::size_t k = 0; k < random_count; ++k) {
    if (k % 3 == 2) {
      out.push_back(spec.project_feasible(space.indicator(random_subset(rng, spec.size()))));
    } else {
      out.push_back(random_field(rng, spec));
    }
  }
  return out;
}

double K_of(const EnergySpec& spec, const Field& w, const GreenOptions& opts) {
  spec.space().require_field(w, "weight");
  require_nonneg(w, "weight");
  const ExtendedField g = green_on_nonneg(spec, w, opts);
  const Field& mu = spec.space().mu();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    if (g.pending[static_cast<std::size_t>(i)]) throw InconclusiveError("K(w): Green value undecided");
    if (std::isinf(g.value[i])) return kInf;
    acc += mu[i] * w[i] * g.value[i];
  }
  return acc;
}

HardyCheck hardy_upper_check(const EnergySpec& spec, const Field& w, const std::vector<Field>& battery,
                             const GreenOptions& opts) {
  HardyCheck out;
  out.K = K_of(spec, w, opts);
  if (std::isinf(out.K)) throw PreconditionError("Hardy check needs K(w) < inf");
  out.worst_margin = kInf;
  for (const Field& f : battery) {
    const double rhs = (1.0 + out.K) * lux(spec, f);
    const double lhs = weighted_l1(spec, f, w);
    ++out.checked;
    if (std::isinf(rhs)) continue;
    out.worst_margin = std::min(out.worst_margin, rhs - lhs);
    if (lhs > rhs + scaled_tolerance(rhs)) out.pass = false;
  }
  return out;
}

OptimalConstant hardy_optimal_constant(const EnergySpec& spec, const Field& w, std::size_t search_budget,
                                       std::uint64_t seed, const GreenOptions& opts, double tol) {
  spec.space().require_field(w, "weight");
  require_nonneg(w, "weight");
  OptimalConstant out;
  out.certificate = spec.space().zeros();
  if (sup_norm(spec.project_feasible(w)) == 0.0) {
    out.pass = true;
    return out;
  }
  const double K = K_of(spec, w, opts);
  if (std::isinf(K)) throw PreconditionError("optimal Hardy constant needs K(w) < inf");

  auto ratio = [&](const Field& f) {
    const Field a = f.cwiseAbs();
    const double n = lux(spec, a);
    if (!(n > 0.0) || std::isinf(n)) return 0.0;
    return weighted_l1(spec, a, w) / n;
  };
  auto consider = [&](const Field& f) {
    const double r = ratio(f);
    if (r > out.mu_hat) {
      out.mu_hat = r;
      out.certificate = f.cwiseAbs();
    }
    return r;
  };

  for (const Field& f : field_battery(spec, seed)) consider(f);

  // Maximizers of <w/t, f> - E(f) are Green potentials of w/t; scan t.
  std::size_t spent = 0;
  auto potential_ratio = [&](double log_t) {
    ++spent;
    try {
      const GreenResult g = green(spec, w / std::exp(log_t), opts);
      if (g.status != GreenStatus::Finite) return 0.0;
      return consider(g.field);
    } catch (const Error&) {
      return 0.0;
    }
  };
  const int steps = 24;
  const double lo = std::log(1e-6), hi = std::log(1e6);
  double best_lt = lo, best_val = -1.0;
  for (int k = 0; k <= steps; ++k) {
    const double lt = lo + (hi - lo) * k / steps;
    const double v = potential_ratio(lt);
    if (v > best_val) {
      best_val = v;
      best_lt = lt;
    }
  }
  {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = best_lt - (hi - lo) / steps, b = best_lt + (hi - lo) / steps;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = potential_ratio(c), fd = potential_ratio(d);
    while (spent < search_budget / 2 && b - a > 1e-6) {
      if (fc > fd) {
        b = d; d = c; fd = fc;
        c = b - phi * (b - a);
        fc = potential_ratio(c);
      } else {
        a = c; c = d; fc = fd;
        d = a + phi * (b - a);
        fd = potential_ratio(d);
      }
    }
  }

  // Coordinate pattern search from the best field.
  Field f = out.certificate;
  double step = 0.25 * std::max(sup_norm(f), 1e-12);
  while (spent < search_budget && step > 1e-6 * std::max(sup_norm(f), 1e-12)) {
    bool improved = false;
    for (Eigen::Index i = 0; i < f.size() && spent < search_budget; ++i) {
      if (spec.is_boundary(static_cast<std::size_t>(i))) continue;
      for (double s : {step, -step}) {
        Field g = f;
        g[i] = std::max(0.0, g[i] + s);
        ++spent;
        const double before = out.mu_hat;
        consider(g);
        if (out.mu_hat > before) {
          f = g;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }

  // K_tilde: K(w / C) is decreasing in C.
  auto k_at = [&](double c) { return K_of(spec, w / c, opts); };
  double c_lo = std::max(out.mu_hat, 1e-300) / 2.0, c_hi = std::max(out.mu_hat, 1e-300);
  while (k_at(c_hi) > 1.0) c_hi *= 2.0;
  while (k_at(c_lo) <= 1.0 && c_lo > 1e-300) c_lo /= 2.0;
  for (int it = 0; it < 100 && c_hi > c_lo * (1.0 + 1e-10); ++it) {
    const double mid = std::sqrt(c_lo * c_hi);
    (k_at(mid) <= 1.0 ? c_hi : c_lo) = mid;
  }
  out.K_tilde = c_hi;
  out.K_at_mu_hat = out.mu_hat > 0.0 ? k_at(out.mu_hat) : kInf;
  out.pass = out.K_at_mu_hat <= 1.0 + tol && out.mu_hat <= 2.0 * out.K_tilde + tol;
  return out;
}

HardyWeight hardy_from_green(const EnergySpec& spec, const Field& g, const GreenOptions& opts) {
  spec.space().require_field(g, "Green seed");
  if (!(g.array() > 0.0).all()) throw ParameterError("Green seed must be positive");
  const GreenResult gg = green(spec, g, opts);
  if (gg.status != GreenStatus::Finite) throw PreconditionError("Green potential of the seed is infinite");
  HardyWeight out;
  out.method = "green-quotient";
  out.weight = g.cwiseQuotient(gg.field.cwiseMax(1.0));
  out.positive = (out.weight.array() > 0.0).all();
  out.K = K_of(spec, out.weight, opts);
  const double bound = l1_norm(spec.space(), g);
  out.proof_bound = out.K <= bound + scaled_tolerance(bound);
  return out;
}

HardyWeight synthesize_hardy_weight(const EnergySpec& spec, const Field& seed_w, std::size_t n_terms,
                                    const GreenOptions& opts, std::uint64_t battery_seed) {
  spec.space().require_field(seed_w, "seed weight");
  if (!(seed_w.array() > 0.0).all()) throw ParameterError("seed weight must be positive");
  if (l1_norm(spec.space(), seed_w) > 1.0 + 1e-12) throw ParameterError("seed weight must have L1 norm at most 1");
  if (n_terms == 0) throw ParameterError("series needs at least one term");

  HardyWeight out;
  out.method = "series";
  out.weight = spec.space().zeros();
  std::vector<bool> certified(spec.size(), false);
  const double bound_tol = 1e-8;
  for (std::size_t n = 1; n <= n_terms; ++n) {
    const Field wn = seed_w / static_cast<double>(n);
    const GreenResult g = green(perturb(spec, wn), wn, opts);
    if (g.status != GreenStatus::Finite) throw InconclusiveError("perturbed Green potential diverged");
    if (g.field.minCoeff() < -bound_tol || g.field.maxCoeff() > 1.0 + bound_tol) out.term_bounds = false;
    const Field gap = (1.0 - g.field.array()).max(0.0).matrix();
    out.weight += std::ldexp(1.0, -static_cast<int>(n)) * wn.cwiseProduct(gap);
    out.terms = n;
    for (std::size_t i = 0; i < certified.size(); ++i) {
      if (gap[static_cast<Eigen::Index>(i)] > bound_tol) certified[i] = true;
    }
    if (std::all_of(certified.begin(), certified.end(), [](bool b) { return b; })) break;
  }
  out.positive = std::all_of(certified.begin(), certified.end(), [](bool b) { return b; });
  for (const Field& f : field_battery(spec, battery_seed)) {
    const double rhs = 2.0 * lux(spec, f);
    if (weighted_l1(spec, f, out.weight) > rhs + scaled_tolerance(rhs)) out.proof_bound = false;
  }
  out.K = out.positive ? K_of(spec, out.weight, opts) : 0.0;
  return out;
}

InvarianceCheck invariant_set_check(const EnergySpec& spec, const PointSet& a, const std::vector<Field>& battery,
                                    const ProxConfig& cfg) {
  spec.space().require_set(a, "candidate set");
  InvarianceCheck out;
  out.analytic = analytically_invariant(spec, a);
  const Field ind = spec.space().indicator(a);
  std::vector<Field> fields = battery;
  fields.push_back(spec.project_feasible(ind));
  out.worst_energy_margin = kInf;
  for (const Field& f : fields) {
    const double rhs = energy(spec, f);
    const double lhs = energy(spec, ind.cwiseProduct(f));
    if (std::isinf(rhs)) continue;
    out.worst_energy_margin = std::min(out.worst_energy_margin, rhs - lhs);
    if (lhs > rhs + scaled_tolerance(rhs)) out.pass = false;
  }
  for (double alpha : {0.5, 2.0}) {
    for (const Field& f : fields) {
      const ProxResult g = prox(spec, alpha, ind.cwiseProduct(f), cfg);
      const double res = norm(spec.space(), g.value - ind.cwiseProduct(g.value));
      out.worst_resolvent_residual = std::max(out.worst_resolvent_residual, res);
      if (res > 10.0 * prox_error_bound(g.report, alpha) + 1e-12) out.pass = false;
    }
  }
  return out;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Critical: return "critical";
    case Verdict::Subcritical: return "subcritical";
    case Verdict::Reducible: return "reducible";
  }
  return "?";
}

CriticalityReport classify(const EnergySpec& spec, const ClassifyOptions& opts) {
  CriticalityReport rep;
  const Components comps = interior_components(spec);
  if (comps.count > 1) {
    rep.verdict = Verdict::Reducible;
    rep.invariant_set = comps.members(0);
    rep.diagnostics.push_back(std::to_string(comps.count) + " interior components");
    return rep;
  }

  const Field one = spec.space().constant(1.0);
  bool flat = true;
  for (int k = 0; k <= 16 && flat; ++k) {
    const double lambda = std::ldexp(1.0, k);
    if (energy(spec, lambda * one) == 0.0) rep.kernel_probes.push_back(lambda);
    else flat = false;
  }
  if (flat) {
    rep.verdict = Verdict::Critical;
    return rep;
  }
  rep.kernel_probes.clear();
  rep.verdict = Verdict::Subcritical;

  const Field seed = one / spec.space().total_mass();
  const double tol = 1e-9;
  try {
    rep.hardy = synthesize_hardy_weight(spec, seed, opts.terms, opts.green, opts.seed);
    if (!rep.hardy.positive) {
      rep.diagnostics.push_back("series not positive after " + std::to_string(rep.hardy.terms) + " terms");
      rep.hardy = hardy_from_green(spec, seed, opts.green);
    }
    if (rep.hardy.K > 1.0 + tol) {
      // The series satisfies int |f| W <= (1 + ln 2) |f|_L, hence
      // K(W / (1 + ln 2)) <= 1.
      rep.diagnostics.push_back("K(W) = " + std::to_string(rep.hardy.K) + ", rescaled by 1 + ln 2");
      rep.hardy.weight /= 1.0 + std::numbers::ln2;
      rep.hardy.method += "/rescaled";
      rep.hardy.K = K_of(spec, rep.hardy.weight, opts.green);
    }
    for (int it = 0; it < 60 && rep.hardy.K > 1.0 + tol; ++it) {
      rep.hardy.weight /= 1.25;
      rep.hardy.K = K_of(spec, rep.hardy.weight, opts.green);
    }
    if (rep.hardy.K > 1.0 + tol) rep.witness_pending = true;
  } catch (const InconclusiveError& e) {
    rep.witness_pending = true;
    rep.diagnostics.push_back(e.what());
  } catch (const NonConvergenceError& e) {
    rep.witness_pending = true;
    rep.diagnostics.push_back(e.what());
  }
  return rep;
}

namespace {

struct Candidate {
  Field f;
  double lux;
};

HardyProfile profile_search(const EnergySpec& spec, std::vector<Field> pool, const std::vector<double>& r_grid,
                            std::size_t search_budget, bool absolute,
                            const std::function<double(const Field&, double)>& numerator) {
  for (double r : r_grid) {
    if (!(r > 0.0)) throw ParameterError("profile grid must be positive");
  }
  std::vector<Candidate> cands;
  auto add = [&](const Field& raw) {
    const Field f = absolute ? Field(raw.cwiseAbs()) : raw;
    const double n = lux(spec, f);
    if (n > 1e-12 && std::isfinite(n)) cands.push_back({f, n});
  };
  for (const Field& f : pool) add(f);
  auto score = [&](const Candidate& c, double r) { return (numerator(c.f, r)) / c.lux; };

  // Local ascent per grid point, seeded with the best pool member.
  for (double r : r_grid) {
    if (cands.empty()) break;
    std::size_t best = 0;
    for (std::size_t k = 1; k < cands.size(); ++k) {
      if (score(cands[k], r) > score(cands[best], r)) best = k;
    }
    Candidate cur = cands[best];
    double cur_score = score(cur, r);
    double step = 0.25 * std::max(sup_norm(cur.f), 1e-12);
    std::size_t spent = 0;
    while (spent < search_budget && step > 1e-4 * sup_norm(cur.f)) {
      bool improved = false;
      for (Eigen::Index i = 0; i < cur.f.size() && spent < search_budget; ++i) {
        if (spec.is_boundary(static_cast<std::size_t>(i))) continue;
        for (double s : {step, -step}) {
          Field g = cur.f;
          g[i] += s;
          if (absolute) g[i] = std::max(0.0, g[i]);
          ++spent;
          const double n = lux(spec, g);
          if (!(n > 1e-12) || !std::isfinite(n)) continue;
          const Candidate c{g, n};
          const double v = score(c, r);
          if (v > cur_score) {
            cur = c;
            cur_score = v;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    cands.push_back(cur);
  }

  // Every candidate's score decreases in r, so maximizing over one shared
  // pool yields a nonincreasing profile.
  HardyProfile out;
  out.r_grid = r_grid;
  for (double r : r_grid) {
    double best = 0.0;
    Field cert;
    for (const Candidate& c : cands) {
      const double v = score(c, r);
      if (v > best) {
        best = v;
        cert = c.f;
      }
    }
    out.alpha_of_r.push_back(best);
    out.certificates.push_back(cert);
  }
  return out;
}

std::vector<Field> search_pool(const EnergySpec& spec, std::uint64_t seed) {
  std::vector<Field> pool = field_battery(spec, seed, 48);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (int k = 0; k < 16; ++k) pool.push_back(random_field(rng, spec, std::ldexp(1.0, k % 5 - 2)));
  return pool;
}

}  // namespace

HardyProfile weak_hardy_profile(const EnergySpec& spec, const Field& w, double p, const std::vector<double>& r_grid,
                                std::size_t search_budget, std::uint64_t seed) {
  spec.space().require_field(w, "weight");
  if (!(w.array() > 0.0).all()) throw ParameterError("weak Hardy weight must be positive");
  if (!(p >= 1.0)) throw ParameterError("weak Hardy exponent must be at least 1");
  if (!kernel_basis(spec).empty()) throw PreconditionError("weak Hardy profile needs a trivial kernel (subcritical form)");
  std::vector<Field> pool = search_pool(spec, seed);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (spec.is_boundary(i)) continue;
    PointSet target = spec.space().empty_set();
    target[i] = true;
    try {
      pool.push_back(equilibrium_potential(spec, target, spec.space().constant(1.0)).equilibrium);
    } catch (const Error&) {
      // equilibrium potentials only enrich the pool
    }
  }
  HardyProfile out = profile_search(spec, std::move(pool), r_grid, search_budget, true,
                                    [&](const Field& f, double r) {
                                      return weighted_lp_norm(spec.space(), f, p, w) - r * sup_norm(f);
                                    });
  out.method = "battery+equilibria+coordinate-ascent";
  return out;
}

HardyProfile weak_poincare_profile(const EnergySpec& spec, const Field& w, double p,
                                   const std::vector<double>& r_grid, std::size_t search_budget,
                                   std::uint64_t seed) {
  spec.space().require_field(w, "weight");
  if (!(w.array() > 0.0).all()) throw ParameterError("weak Poincare weight must be positive");
  if (!(p >= 1.0)) throw ParameterError("weak Poincare exponent must be at least 1");
  const std::vector<PointSet> kernel = kernel_basis(spec);
  if (kernel.size() != 1 || std::find(kernel[0].begin(), kernel[0].end(), false) != kernel[0].end()) {
    throw PreconditionError("weak Poincare profile needs the kernel to be the constants (critical, irreducible)");
  }
  const Field& mu = spec.space().mu();
  const double wmass = mu.dot(w);
  HardyProfile out = profile_search(spec, search_pool(spec, seed), r_grid, search_budget, false,
                                    [&](const Field& f, double r) {
                                      const double mean = mu.cwiseProduct(w).dot(f) / wmass;
                                      const Field centred = f.array() - mean;
                                      return weighted_lp_norm(spec.space(), centred, p, w) -
                                             r * (f.maxCoeff() - f.minCoeff());
                                    });
  out.method = "battery+coordinate-ascent";
  return out;
}

}  // namespace ndf
