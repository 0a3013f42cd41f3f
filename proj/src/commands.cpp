#include "ndf/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "ndf/criticality.hpp"
#include "ndf/errors.hpp"
#include "ndf/potential.hpp"
#include "ndf/random.hpp"
#include "ndf/resolvent.hpp"
#include "ndf/semimodular.hpp"
#include "ndf/topology.hpp"

namespace ndf {

using Json = nlohmann::ordered_json;

namespace {

Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json table(const MeasureSpace& space, const Field& f) {
  Json t = Json::object();
  for (std::size_t i = 0; i < space.size(); ++i) t[space.ids()[i]] = num(f[static_cast<Eigen::Index>(i)]);
  return t;
}

Json id_list(const MeasureSpace& space, const PointSet& s) {
  Json out = Json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i]) out.push_back(space.ids()[i]);
  }
  return out;
}

Json report_json(const SolveReport& r) {
  return Json{{"iterations", r.iterations}, {"residual", num(r.residual)}, {"tolerance", num(r.tolerance)},
              {"converged", r.converged}, {"diverged", r.diverged}};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParameterError("not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw ParameterError("empty number list");
  return out;
}

// Resolved settings: flag, then problem default, then built-in value.
struct Settings {
  std::uint64_t seed;
  ProxConfig prox;
  GreenOptions green;
  std::size_t terms;
};

Settings resolve(const ProblemFile& problem, const CommandFlags& flags) {
  const ProblemDefaults& d = problem.defaults;
  Settings s;
  s.seed = flags.seed.value_or(d.seed.value_or(kDefaultSeed));
  s.prox.residual_tolerance = flags.tol.value_or(d.tol.value_or(ProxConfig{}.residual_tolerance));
  if (flags.max_iterations) s.prox.max_iterations = *flags.max_iterations;
  s.prox.validate();
  s.green.prox = s.prox;
  s.green.alpha0 = flags.alpha0.value_or(d.alpha0.value_or(GreenOptions{}.alpha0));
  s.green.depth = flags.schedule_depth.value_or(d.schedule_depth.value_or(GreenOptions{}.depth));
  s.green.divergence_threshold =
      flags.divergence_threshold.value_or(d.divergence_threshold.value_or(GreenOptions{}.divergence_threshold));
  if (!(s.green.alpha0 > 0.0)) throw ParameterError("--alpha0 must be positive");
  if (!(s.green.divergence_threshold > 0.0)) throw ParameterError("--divergence-threshold must be positive");
  s.terms = flags.terms.value_or(d.terms.value_or(20));
  if (s.terms == 0) throw ParameterError("--terms must be positive");
  return s;
}

struct Output {
  Json result = Json::object();
  std::vector<std::pair<std::string, Field>> tables;
  int exit_code = kExitOk;
};

using Handler = std::function<void(const ProblemFile&, const CommandFlags&, const Settings&, Output&)>;

void cmd_classify(const ProblemFile& pf, const CommandFlags&, const Settings& s, Output& out) {
  const EnergySpec& spec = pf.spec;
  ClassifyOptions opts;
  opts.green = s.green;
  opts.terms = s.terms;
  opts.seed = s.seed;
  const CriticalityReport rep = classify(spec, opts);
  out.result["verdict"] = verdict_name(rep.verdict);
  Json w = Json::object();
  switch (rep.verdict) {
    case Verdict::Reducible:
      w["invariant_set"] = id_list(spec.space(), rep.invariant_set);
      break;
    case Verdict::Critical: {
      Json probes = Json::array();
      for (double l : rep.kernel_probes) probes.push_back(l);
      w["kernel_probes"] = probes;
      w["energy_at_probes"] = 0.0;
      break;
    }
    case Verdict::Subcritical:
      w["witness_pending"] = rep.witness_pending;
      if (!rep.witness_pending) {
        w["hardy_weight"] = table(spec.space(), rep.hardy.weight);
        w["K"] = num(rep.hardy.K);
        w["method"] = rep.hardy.method;
        w["terms"] = rep.hardy.terms;
        out.tables.emplace_back("hardy_weight", rep.hardy.weight);
      }
      break;
  }
  out.result["witness"] = w;
  Json diag = Json::array();
  for (const auto& d : rep.diagnostics) diag.push_back(d);
  out.result["diagnostics"] = diag;
  if (rep.witness_pending) out.exit_code = kExitInconclusive;
}

Field field_or(const ProblemFile& pf, const CommandFlags& flags, double fallback) {
  return flags.field ? parse_field_arg(pf.spec.space(), *flags.field) : pf.spec.space().constant(fallback);
}

void cmd_capacity(const ProblemFile& pf, const CommandFlags& flags, const Settings& s, Output& out) {
  if (!flags.set) throw ParameterError("capacity needs --set");
  const EnergySpec& spec = pf.spec;
  const PointSet a = parse_set_arg(spec.space(), *flags.set);
  const Field h = field_or(pf, flags, 1.0);
  const CapacityResult c = capacity(spec, a, h, s.prox);
  out.result["set"] = id_list(spec.space(), a);
  out.result["capacity"] = num(c.value);
  out.result["alternative_formula"] = num(c.alternative);
  out.result["formulas_agree"] = c.formulas_agree;
  out.result["bounds_ok"] = c.bounds_ok;
  out.result["derivative_ok"] = c.derivative_ok;
  out.result["equilibrium"] = table(spec.space(), c.equilibrium);
  out.result["h"] = table(spec.space(), h);
  out.result["solver"] = report_json(c.report);
  out.tables.emplace_back("equilibrium", c.equilibrium);
  out.tables.emplace_back("h", h);
}

void cmd_hardy_weight(const ProblemFile& pf, const CommandFlags&, const Settings& s, Output& out) {
  const EnergySpec& spec = pf.spec;
  ClassifyOptions opts;
  opts.green = s.green;
  opts.terms = s.terms;
  opts.seed = s.seed;
  const CriticalityReport rep = classify(spec, opts);
  if (rep.verdict != Verdict::Subcritical) {
    throw PreconditionError(std::string("Hardy weights exist only for subcritical forms; verdict is ") +
                            verdict_name(rep.verdict));
  }
  if (rep.witness_pending) throw InconclusiveError("Hardy weight construction undecided");
  const HardyWeight& hw = rep.hardy;
  const HardyCheck check = hardy_upper_check(spec, hw.weight, field_battery(spec, s.seed), s.green);
  const OptimalConstant oc = hardy_optimal_constant(spec, hw.weight, 200, s.seed, s.green);
  out.result["hardy_weight"] = table(spec.space(), hw.weight);
  out.result["K"] = num(hw.K);
  out.result["method"] = hw.method;
  out.result["terms"] = hw.terms;
  out.result["hardy_inequality"] = Json{{"pass", check.pass}, {"fields", check.checked},
                                        {"worst_margin", num(check.worst_margin)}};
  out.result["optimal_constant"] = Json{{"mu_hat", num(oc.mu_hat)}, {"K_tilde", num(oc.K_tilde)},
                                        {"K_at_mu_hat", num(oc.K_at_mu_hat)}, {"pass", oc.pass},
                                        {"certificate", table(spec.space(), oc.certificate)}};
  out.tables.emplace_back("hardy_weight", hw.weight);
  out.tables.emplace_back("certificate", oc.certificate);
}

void cmd_resolvent(const ProblemFile& pf, const CommandFlags& flags, const Settings& s, Output& out) {
  if (!flags.field) throw ParameterError("resolvent needs --field");
  const EnergySpec& spec = pf.spec;
  const Field f = parse_field_arg(spec.space(), *flags.field);
  const ProxResult g = prox(spec, flags.alpha, f, s.prox);
  out.result["alpha"] = flags.alpha;
  out.result["f"] = table(spec.space(), f);
  out.result["resolvent"] = table(spec.space(), g.value);
  out.result["energy"] = num(energy(spec, g.value));
  out.result["solver"] = report_json(g.report);
  out.tables.emplace_back("f", f);
  out.tables.emplace_back("resolvent", g.value);
}

void cmd_green(const ProblemFile& pf, const CommandFlags& flags, const Settings& s, Output& out) {
  const EnergySpec& spec = pf.spec;
  const Field f = field_or(pf, flags, 1.0);
  const ExtendedField ext = green_on_nonneg(spec, f, s.green);
  out.result["f"] = table(spec.space(), f);
  try {
    const GreenResult g = green(spec, f, s.green);
    out.result["status"] = g.status == GreenStatus::Finite ? "finite" : "divergent";
    out.result["scale_at_exit"] = num(g.scale_at_exit);
    out.result["monotone_trace"] = g.monotone;
    out.result["limit_solved"] = g.limit_solved;
    Json trace = Json::array();
    for (const auto& [a, m] : g.alpha_trace) trace.push_back(Json::array({num(a), num(m)}));
    out.result["alpha_trace"] = trace;
  } catch (const InconclusiveError&) {
    out.result["status"] = "inconclusive";
    out.exit_code = kExitInconclusive;
  }
  out.result["green"] = table(spec.space(), ext.value);
  if (ext.any_pending()) out.exit_code = kExitInconclusive;
  out.tables.emplace_back("f", f);
  out.tables.emplace_back("green", ext.value);
}

void cmd_luxemburg(const ProblemFile& pf, const CommandFlags& flags, const Settings&, Output& out) {
  if (!flags.field) throw ParameterError("luxemburg needs --field");
  const EnergySpec& spec = pf.spec;
  const Field f = parse_field_arg(spec.space(), *flags.field);
  LuxemburgQuery q;
  q.r = flags.r;
  out.result["r"] = flags.r;
  out.result["f"] = table(spec.space(), f);
  out.result["energy"] = num(energy(spec, f));
  out.result["norm"] = num(luxemburg_norm(spec, f, q));
  out.result["analytic_kernel"] = in_analytic_kernel(spec, f);
  out.tables.emplace_back("f", f);
}

void cmd_profile(const ProblemFile& pf, const CommandFlags& flags, const Settings& s, Output& out) {
  const EnergySpec& spec = pf.spec;
  const Field w = field_or(pf, flags, 1.0);
  const std::vector<double> grid = parse_list(flags.r_grid);
  HardyProfile prof;
  if (flags.kind == "hardy") {
    prof = weak_hardy_profile(spec, w, flags.p, grid, 200, s.seed);
  } else if (flags.kind == "poincare") {
    prof = weak_poincare_profile(spec, w, flags.p, grid, 200, s.seed);
  } else {
    throw ParameterError("--kind must be 'hardy' or 'poincare'");
  }
  out.result["kind"] = flags.kind;
  out.result["p"] = flags.p;
  out.result["method"] = prof.method;
  Json rows = Json::array();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Json row{{"r", grid[k]}, {"alpha", num(prof.alpha_of_r[k])}};
    if (prof.certificates[k].size()) row["certificate"] = table(spec.space(), prof.certificates[k]);
    rows.push_back(row);
  }
  out.result["profile"] = rows;
}

// ---- verify -------------------------------------------------------------

struct CheckList {
  Json rows = Json::array();
  bool ok = true;
  void add(const std::string& name, bool pass, Json detail = Json::object()) {
    rows.push_back(Json{{"check", name}, {"pass", pass}, {"detail", detail}});
    ok = ok && pass;
  }
  template <class F>
  void run(const std::string& name, F&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, false, Json{{"error", e.what()}});
    }
  }
};

void cmd_verify(const ProblemFile& pf, const CommandFlags&, const Settings& s, Output& out) {
  const EnergySpec& spec = pf.spec;
  const MeasureSpace& space = spec.space();
  CheckList checks;
  Rng rng(s.seed);
  const std::vector<Field> battery = field_battery(spec, s.seed);
  const std::vector<NormalContraction> contractions = contraction_battery(s.seed);

  checks.run("beurling-deny", [&] {
    std::size_t bad1 = 0, bad2 = 0, total = 0;
    for (int k = 0; k < 12; ++k) {
      const Field f = random_field(rng, spec), g = random_field(rng, spec);
      if (!bd1_check(spec, f, g).pass) ++bad1;
      for (const auto& c : contractions) {
        ++total;
        if (!bd2_check(spec, f, g, c).pass) ++bad2;
      }
    }
    checks.add("beurling-deny", bad1 == 0 && bad2 == 0,
               Json{{"lattice_violations", bad1}, {"contraction_violations", bad2}, {"contraction_checks", total}});
  });

  checks.run("gradient", [&] {
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const Field f = random_field(rng, spec);
      const Field g = energy_gradient(spec, f);
      for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (spec.is_boundary(static_cast<std::size_t>(i))) continue;
        const double h = 1e-6 * std::max(1.0, std::abs(f[i]));
        Field a = f, b = f;
        a[i] += h;
        b[i] -= h;
        const double fd = (energy(spec, a) - energy(spec, b)) / (2.0 * h) / space.mu(static_cast<std::size_t>(i));
        worst = std::max(worst, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
      }
    }
    checks.add("gradient", worst <= 1e-5, Json{{"worst_relative_error", worst}});
  });

  checks.run("delta2", [&] {
    const Delta2Report d = delta2_battery(spec, s.seed);
    checks.add("delta2", d.pass(), Json{{"constant", d.constant}, {"violations", d.violations}});
  });

  checks.run("resolvent", [&] {
    std::size_t bad = 0;
    double worst = 0.0;
    std::vector<std::pair<Field, Field>> pairs;
    for (int k = 0; k < 5; ++k) {
      const Field f = random_field(rng, spec);
      const IdentityCheck c = resolvent_identity_check(spec, 1.0, 2.0, f, s.prox);
      worst = std::max(worst, c.residual);
      if (!c.pass) ++bad;
      const Field g = random_field(rng, spec);
      pairs.emplace_back(f, g);
      pairs.emplace_back(f.cwiseMax(g), f.cwiseMin(g));
    }
    const MarkovReport m = markov_property_checks(spec, 1.0, pairs, s.prox);
    checks.add("resolvent", bad == 0 && m.pass(),
               Json{{"identity_worst_residual", worst}, {"identity_failures", bad},
                    {"order_violations", m.order_violations}, {"sup_violations", m.sup_violations},
                    {"l1_violations", m.l1_violations}, {"lipschitz_violations", m.lipschitz_violations}});
  });

  checks.run("luxemburg", [&] {
    std::size_t bad = 0;
    double worst_h = 0.0;
    const auto p = spec.common_exponent();
    for (const Field& f : battery) {
      if (!luxemburg_family_check(spec, f, 2.0, 1.0).pass()) ++bad;
      if (p) {
        const double e = energy(spec, f);
        const double n = luxemburg_norm(spec, f);
        if (std::isfinite(e) && e > 0.0) worst_h = std::max(worst_h, std::abs(n - std::pow(e, 1.0 / *p)) / n);
      }
    }
    checks.add("luxemburg", bad == 0 && worst_h <= 1e-10,
               Json{{"family_failures", bad}, {"homogeneity_worst", worst_h}});
  });

  CriticalityReport crit;
  checks.run("classify", [&] {
    ClassifyOptions opts;
    opts.green = s.green;
    opts.terms = s.terms;
    opts.seed = s.seed;
    crit = classify(spec, opts);
    const Components comps = interior_components(spec);
    const bool expected_critical = comps.count == 1 && comps.free[0];
    bool sound = true;
    Json detail{{"verdict", verdict_name(crit.verdict)}};
    switch (crit.verdict) {
      case Verdict::Reducible: {
        const InvarianceCheck inv = invariant_set_check(spec, crit.invariant_set, battery, s.prox);
        sound = comps.count > 1 && inv.pass && inv.analytic;
        break;
      }
      case Verdict::Critical:
        sound = expected_critical;
        break;
      case Verdict::Subcritical: {
        sound = !expected_critical && comps.count <= 1 && !crit.witness_pending && crit.hardy.positive &&
                crit.hardy.K <= 1.0 + 1e-9;
        if (sound) {
          const HardyCheck h = hardy_upper_check(spec, crit.hardy.weight, battery, s.green);
          sound = h.pass;
          detail["hardy_worst_margin"] = num(h.worst_margin);
        }
        detail["K"] = num(crit.hardy.K);
        break;
      }
    }
    checks.add("classify", sound, detail);
  });

  if (crit.verdict == Verdict::Subcritical) {
    checks.run("potential", [&] {
      const Field h = space.constant(1.0);
      std::size_t bad = 0;
      for (std::size_t i = 0; i < spec.size(); ++i) {
        if (spec.is_boundary(i)) continue;
        PointSet a = space.empty_set();
        a[i] = true;
        const CapacityResult c = capacity(spec, a, h, s.prox);
        const ExcessiveCheck ex = is_excessive(spec, c.equilibrium, battery, {0.5, 1.0, 2.0}, s.prox);
        if (!(c.bounds_ok && c.derivative_ok && c.formulas_agree && ex.pass())) ++bad;
      }
      std::vector<PointSet> family;
      if (spec.size() <= 6) {
        family = all_subsets(spec.size());
      } else {
        for (int k = 0; k < 12; ++k) family.push_back(random_subset(rng, spec.size(), 0.3));
      }
      // Targets must stay off the boundary, where h > 0 is unattainable.
      std::erase_if(family, [&](const PointSet& a) {
        for (std::size_t i = 0; i < a.size(); ++i)
          if (a[i] && spec.is_boundary(i)) return true;
        return false;
      });
      const ChoquetReport ch = choquet_suite(spec, h, family, s.prox);
      const CapacityZeroReport cz = capacity_zero_property(spec, h, s.prox);
      checks.add("potential", bad == 0 && ch.pass() && cz.pass,
                 Json{{"singleton_failures", bad}, {"choquet_sets", ch.sets},
                      {"monotone_violations", ch.monotone_violations},
                      {"subadditivity_violations", ch.subadditivity_violations},
                      {"continuity_violations", ch.continuity_violations},
                      {"solver_failures", ch.solver_failures}, {"capacity_zero", cz.pass}});
    });
  }

  checks.run("duality", [&] {
    const Field f = random_field(rng, spec);
    const double e = energy(spec, f);
    const auto steps = duality_recover(spec, f, {1e-2, 1e-3, 1e-4}, s.prox);
    double worst_gap = 0.0;
    for (const auto& st : steps) worst_gap = std::max(worst_gap, st.gap_residual / std::max(1.0, e));
    const double rel = std::abs(steps.back().value - e) / std::max(e, 1e-300);
    checks.add("duality", worst_gap <= 1e-6 && (e == 0.0 || rel <= 1e-3),
               Json{{"energy", e}, {"recovered", steps.back().value}, {"relative_error", rel}, {"worst_gap", worst_gap}});
  });

  checks.run("appendix-inequalities", [&] {
    const FuzzReport r = fuzz_appendix_b(10000, s.seed);
    checks.add("appendix-inequalities", r.pass(), Json{{"samples", r.samples}, {"violations", r.violations}});
  });

  out.result["checks"] = checks.rows;
  out.result["pass"] = checks.ok;
  if (!checks.ok) out.exit_code = kExitVerifyFailed;
}

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{
      {"classify", cmd_classify}, {"capacity", cmd_capacity},   {"hardy-weight", cmd_hardy_weight},
      {"resolvent", cmd_resolvent}, {"green", cmd_green},        {"luxemburg", cmd_luxemburg},
      {"profile", cmd_profile},   {"verify", cmd_verify}};
  return h;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"classify", "capacity", "hardy-weight", "resolvent",
                                              "green",    "luxemburg", "profile",      "verify"};
  return names;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NonConvergenceError*>(&e)) return kExitNonConvergence;
  if (dynamic_cast<const InconclusiveError*>(&e)) return kExitInconclusive;
  if (dynamic_cast<const DomainError*>(&e) || dynamic_cast<const PreconditionError*>(&e)) return kExitInfeasible;
  return kExitUsage;
}

Field parse_field_arg(const MeasureSpace& space, const std::string& text) {
  if (text.find('=') == std::string::npos) {
    const std::vector<double> v = parse_list(text);
    if (v.size() != 1) throw ParameterError("field argument must be a number or id=value pairs");
    return space.constant(v[0]);
  }
  Field f = space.zeros();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ParameterError("field entry '" + item + "' is not id=value");
    const std::string id = item.substr(0, eq);
    if (!space.contains(id)) throw ParameterError("field entry names unknown point '" + id + "'");
    f[static_cast<Eigen::Index>(space.index_of(id))] = parse_list(item.substr(eq + 1)).at(0);
  }
  return f;
}

PointSet parse_set_arg(const MeasureSpace& space, const std::string& text) {
  PointSet s = space.empty_set();
  std::stringstream ss(text);
  std::string id;
  while (std::getline(ss, id, ',')) {
    if (id.empty()) continue;
    if (!space.contains(id)) throw ParameterError("set names unknown point '" + id + "'");
    s[space.index_of(id)] = true;
  }
  return s;
}

CommandResult run_command(const std::string& name, const ProblemFile& problem, const std::string& input_bytes,
                          const CommandFlags& flags) {
  CommandResult res;
  auto it = handlers().find(name);
  if (it == handlers().end()) {
    res.exit_code = kExitUsage;
    res.error = "unknown command '" + name + "'";
    return res;
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    const Settings s = resolve(problem, flags);
    Output out;
    it->second(problem, flags, s, out);
    Json env = Json::object();
    env["command"] = name;
    env["input_digest"] = "fnv1a64:" + fnv1a_hex(input_bytes);
    env["seed"] = s.seed;
    env["result"] = out.result;
    if (flags.timing) {
      const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      env["wall_time_ms"] = ms;
    }
    res.envelope = env.dump(2) + "\n";
    res.exit_code = out.exit_code;
    if (!out.tables.empty()) {
      std::ostringstream csv;
      csv << "point";
      for (const auto& [col, _] : out.tables) csv << ',' << col;
      csv << '\n';
      for (std::size_t i = 0; i < problem.spec.size(); ++i) {
        csv << problem.spec.space().ids()[i];
        for (const auto& [_, f] : out.tables) csv << ',' << format_double(f[static_cast<Eigen::Index>(i)]);
        csv << '\n';
      }
      res.csv = csv.str();
    }
  } catch (const std::exception& e) {
    res.exit_code = exit_code_for(e);
    res.error = e.what();
    res.envelope.clear();
  }
  return res;
}

}  // namespace ndf
