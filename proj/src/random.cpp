#include "ndf/random.hpp"

#include <algorithm>

#include "ndf/topology.hpp"

namespace ndf {

EnergySpec random_spec(Rng& rng, const RandomSpecOptions& o) {
  std::uniform_int_distribution<std::size_t> size_dist(o.min_points, std::max(o.min_points, o.max_points));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto between = [&](double a, double b) { return a + (b - a) * unit(rng); };

  const std::size_t n = size_dist(rng);
  Field mu(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < mu.size(); ++i) mu[i] = between(o.mu_min, o.mu_max);

  const double shared = between(o.min_exponent, o.max_exponent);
  auto exponent = [&] {
    if (o.quadratic) return 2.0;
    if (o.constant_exponent) return shared;
    return between(o.min_exponent, o.max_exponent);
  };

  std::vector<Edge> edges;
  std::vector<std::vector<bool>> linked(n, std::vector<bool>(n, false));
  auto add = [&](std::size_t u, std::size_t v) {
    if (u == v || linked[u][v]) return;
    linked[u][v] = linked[v][u] = true;
    edges.push_back({u, v, between(o.weight_min, o.weight_max), exponent()});
  };
  if (o.connected) {
    for (std::size_t i = 1; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> parent(0, i - 1);
      add(parent(rng), i);
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (!linked[u][v] && unit(rng) < o.extra_edge_probability) add(u, v);
    }
  }

  std::vector<KillTerm> kill;
  PointSet boundary(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (unit(rng) < o.kill_probability) kill.push_back({i, between(o.kappa_min, o.kappa_max), exponent()});
  }
  // Connected specs keep a connected interior: a boundary point that would
  // split the remaining graph is skipped.
  auto try_boundary = [&](std::size_t i) {
    boundary[i] = true;
    if (o.connected) {
      const EnergySpec probe(MeasureSpace::anonymous(mu), edges, {}, boundary);
      const Components comps = interior_components(probe);
      if (comps.count != 1) {
        boundary[i] = false;
        return false;
      }
    }
    return true;
  };
  bool has_boundary = false;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (unit(rng) < o.boundary_probability) has_boundary = try_boundary(i) || has_boundary;
  }
  if (o.force_subcritical && kill.empty() && !has_boundary) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    if (n > 1 && unit(rng) < 0.5) has_boundary = try_boundary(pick(rng)) || try_boundary(n - 1);
    if (!has_boundary) kill.push_back({pick(rng), between(o.kappa_min, o.kappa_max), exponent()});
  }
  return EnergySpec(MeasureSpace::anonymous(mu), std::move(edges), std::move(kill), std::move(boundary));
}

Field random_field(Rng& rng, const EnergySpec& spec, double scale) {
  std::normal_distribution<double> gauss(0.0, scale);
  Field f = spec.space().zeros();
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = gauss(rng);
  return spec.project_feasible(f);
}

Field random_nonneg_field(Rng& rng, const EnergySpec& spec, double scale) {
  return random_field(rng, spec, scale).cwiseAbs();
}

PointSet random_subset(Rng& rng, std::size_t n, double p) {
  std::bernoulli_distribution coin(p);
  PointSet out(n, false);
  for (std::size_t i = 0; i < n; ++i) out[i] = coin(rng);
  return out;
}

}  // namespace ndf
