#include "ndf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "ndf/errors.hpp"

namespace ndf {

void ProxConfig::validate() const {
  if (!(residual_tolerance > 0.0)) throw ParameterError("residual tolerance must be positive");
  if (max_iterations == 0) throw ParameterError("iteration budget must be positive");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ParameterError("backtracking shrink factor must lie in (0, 1)");
  if (!(armijo > 0.0 && armijo < 1.0)) throw ParameterError("Armijo constant must lie in (0, 1)");
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Layout {
  const ConvexProblem& p;
  const EnergySpec& spec;
  const Field& mu;
  Field b;
  PointSet locked;
  Field locked_value;
  PointSet bounded;
  Field lower;

  explicit Layout(const ConvexProblem& prob)
      : p(prob), spec(*prob.spec), mu(prob.spec->space().mu()) {
    const std::size_t n = spec.size();
    b = p.b.size() ? p.b : spec.space().zeros();
    locked = spec.boundary();
    locked_value = spec.space().zeros();
    if (!p.fixed.empty()) {
      for (std::size_t i = 0; i < n; ++i) {
        if (p.fixed[i] && !spec.is_boundary(i)) {
          locked[i] = true;
          locked_value[static_cast<Eigen::Index>(i)] = p.fixed_value[static_cast<Eigen::Index>(i)];
        }
      }
    }
    bounded = p.bounded.empty() ? spec.space().empty_set() : p.bounded;
    lower = p.lower.size() ? p.lower : spec.space().zeros();
    for (std::size_t i = 0; i < n; ++i) {
      if (locked[i]) bounded[i] = false;
    }
  }

  Field admissible(Field x) const {
    for (std::size_t i = 0; i < locked.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      if (locked[i]) x[k] = locked_value[k];
      else if (bounded[i]) x[k] = std::max(x[k], lower[k]);
    }
    return x;
  }

  // Euclidean gradient of F, zero on locked coordinates.
  Field gradient(const Field& x) const {
    Field g = energy_partials(spec, x) + mu.cwiseProduct(p.c * x - b);
    for (std::size_t i = 0; i < locked.size(); ++i) {
      if (locked[i]) g[static_cast<Eigen::Index>(i)] = 0.0;
    }
    return g;
  }

  double residual(const Field& x, const Field& g) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < locked.size(); ++i) {
      if (locked[i]) continue;
      const auto k = static_cast<Eigen::Index>(i);
      double r = g[k] / mu[k];
      if (bounded[i]) r = x[k] - std::max(lower[k], x[k] - r);
      acc += mu[k] * r * r;
    }
    return std::sqrt(acc);
  }

  // Size of the residual that floating-point evaluation of the gradient at
  // x cannot resolve.
  double noise_floor(const Field& x) const {
    Field noise = Field::Zero(x.size());
    auto jitter = [](double t, double d, double q) {
      const double a = std::abs(t);
      return std::abs(phi(a + d, q) - phi(a, q)) + 4.0 * kEps * std::abs(phi(a, q));
    };
    for (const Edge& e : spec.edges()) {
      const auto u = static_cast<Eigen::Index>(e.u), v = static_cast<Eigen::Index>(e.v);
      const double d = 4.0 * kEps * (std::abs(x[u]) + std::abs(x[v]));
      const double j = e.weight * jitter(x[u] - x[v], d, e.exponent);
      noise[u] += j;
      noise[v] += j;
    }
    for (const KillTerm& t : spec.kill()) {
      if (t.kappa == 0.0) continue;
      const auto i = static_cast<Eigen::Index>(t.point);
      noise[i] += t.kappa * mu[i] * jitter(x[i], 4.0 * kEps * std::abs(x[i]), t.exponent);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < locked.size(); ++i) {
      if (locked[i]) continue;
      const auto k = static_cast<Eigen::Index>(i);
      const double nk = noise[k] + 4.0 * kEps * mu[k] * (std::abs(p.c * x[k]) + std::abs(b[k]));
      acc += nk * nk / mu[k];
    }
    return 4.0 * std::sqrt(acc);
  }

  void project_kernel(Field& d) const {
    for (const PointSet& k : p.kernel) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < k.size(); ++i) {
        if (!k[i] || locked[i]) continue;
        num += mu[static_cast<Eigen::Index>(i)] * d[static_cast<Eigen::Index>(i)];
        den += mu[static_cast<Eigen::Index>(i)];
      }
      if (den == 0.0) continue;
      const double m = num / den;
      for (std::size_t i = 0; i < k.size(); ++i) {
        if (k[i] && !locked[i]) d[static_cast<Eigen::Index>(i)] -= m;
      }
    }
  }
};

Field newton_direction(const Layout& L, const Field& x, const Field& g, const std::vector<Eigen::Index>& free) {
  const auto m = static_cast<Eigen::Index>(free.size());
  Field d = Field::Zero(x.size());
  if (m == 0) return d;
  const double floor = 64.0 * kEps * std::max(1.0, x.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd h = energy_hessian(L.spec, x, floor);
  Eigen::MatrixXd hf(m, m);
  Field gf(m), muf(m);
  double scale = 0.0;
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index c = 0; c < m; ++c) hf(a, c) = h(free[a], free[c]);
    muf[a] = L.mu[free[a]];
    hf(a, a) += L.p.c * muf[a];
    gf[a] = g[free[a]];
    scale = std::max(scale, hf(a, a) / muf[a]);
  }
  double tau = 1e-12 * (1.0 + scale);
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::MatrixXd reg = hf;
    reg.diagonal() += tau * muf;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
    if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) {
      const Field df = -ldlt.solve(gf);
      if (df.allFinite()) {
        for (Eigen::Index a = 0; a < m; ++a) d[free[a]] = df[a];
        return d;
      }
    }
    tau *= 100.0;
  }
  for (Eigen::Index a = 0; a < m; ++a) d[free[a]] = -gf[a] / muf[a];
  return d;
}

}  // namespace

double objective(const ConvexProblem& problem, const Field& x) {
  const Layout L(problem);
  return energy(L.spec, x) + 0.5 * problem.c * x.cwiseProduct(x).dot(L.mu) - L.b.cwiseProduct(x).dot(L.mu);
}

double stationarity_residual(const ConvexProblem& problem, const Field& x) {
  const Layout L(problem);
  return L.residual(x, L.gradient(x));
}

SolveOutcome minimize(const ConvexProblem& problem, const Field& x0, const ProxConfig& cfg) {
  cfg.validate();
  if (problem.spec == nullptr) throw ParameterError("minimize: missing energy");
  const Layout L(problem);
  L.spec.space().require_field(x0, "initial guess");
  auto value = [&](const Field& x) {
    return energy(L.spec, x) + 0.5 * problem.c * x.cwiseProduct(x).dot(L.mu) - L.b.cwiseProduct(x).dot(L.mu);
  };

  Field x = L.admissible(x0);
  double fx = value(x);
  double grad_step = problem.c > 0.0 ? 1.0 / problem.c : 1.0;
  SolveReport rep;
  double best_res = std::numeric_limits<double>::infinity();
  Field best = x;

  for (std::size_t it = 0;; ++it) {
    const Field g = L.gradient(x);
    const double res = L.residual(x, g);
    const double tol = std::max(cfg.residual_tolerance, L.noise_floor(x));
    rep.iterations = it;
    rep.residual = res;
    rep.tolerance = tol;
    if (res < best_res) {
      best_res = res;
      best = x;
    }
    if (res <= tol) {
      rep.converged = true;
      return {x, rep};
    }
    if (x.cwiseAbs().maxCoeff() > problem.divergence_threshold) {
      rep.diverged = true;
      return {x, rep};
    }
    if (it >= cfg.max_iterations) break;

    std::vector<Eigen::Index> free, active;
    const double eps_active = std::min(1e-8, res);
    for (std::size_t i = 0; i < L.locked.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      if (L.locked[i]) continue;
      if (L.bounded[i] && x[k] <= L.lower[k] + eps_active && g[k] > 0.0) {
        active.push_back(k);
        continue;
      }
      free.push_back(k);
    }

    Field d;
    if (cfg.method == SolverMethod::Newton) {
      d = newton_direction(L, x, g, free);
    } else {
      d = Field::Zero(x.size());
      for (Eigen::Index k : free) d[k] = -grad_step * g[k] / L.mu[k];
    }
    if (!problem.kernel.empty()) L.project_kernel(d);
    for (Eigen::Index k : active) d[k] = L.lower[k] - x[k];
    if (g.dot(d) >= 0.0) {
      d = Field::Zero(x.size());
      for (Eigen::Index k : free) d[k] = -g[k] / L.mu[k];
      if (!problem.kernel.empty()) L.project_kernel(d);
      for (Eigen::Index k : active) d[k] = L.lower[k] - x[k];
    }
    const double cap = 10.0 * std::max(1.0, x.cwiseAbs().maxCoeff());
    const double dmax = d.cwiseAbs().maxCoeff();
    if (dmax > cap) d *= cap / dmax;

    // Once the predicted decrease drops below the resolution of F, the
    // objective can no longer rank trial points; the residual takes over.
    const double pred = -g.dot(L.admissible(x + d) - x);
    const bool by_residual = pred <= 64.0 * kEps * (std::abs(fx) + 1.0);
    double t = 1.0;
    bool accepted = false;
    Field trial;
    double ftrial = fx;
    for (int k = 0; k < 60; ++k, t *= cfg.shrink) {
      trial = L.admissible(x + t * d);
      if (trial == x) break;
      ftrial = value(trial);
      if (!std::isfinite(ftrial)) continue;
      if (by_residual ? L.residual(trial, L.gradient(trial)) < res
                      : ftrial <= fx + cfg.armijo * g.dot(trial - x)) {
        accepted = true;
        break;
      }
    }
    // Keep shrinking while the objective still drops.
    if (accepted && !by_residual) {
      for (int k = 0; k < 60; ++k) {
        const Field shorter = L.admissible(x + t * cfg.shrink * d);
        if (shorter == x) break;
        const double fs = value(shorter);
        if (!(fs < ftrial)) break;
        trial = shorter;
        ftrial = fs;
        t *= cfg.shrink;
      }
    }
    if (accepted) {
      if (cfg.method == SolverMethod::Gradient && t == 1.0) grad_step *= 2.0;
      if (cfg.method == SolverMethod::Gradient) grad_step *= t;
      x = trial;
      fx = ftrial;
    } else {
      throw NonConvergenceError("solver stalled: no descent step found (residual " + std::to_string(res) + ")",
                                best, best_res);
    }
  }
  throw NonConvergenceError("solver exceeded " + std::to_string(cfg.max_iterations) +
                                " iterations (residual " + std::to_string(best_res) + ")",
                            best, best_res);
}

}  // namespace ndf
