#include "ndf/topology.hpp"

#include <numeric>

namespace ndf {

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

PointSet Components::members(std::size_t c) const {
  PointSet out(label.size(), false);
  for (std::size_t i = 0; i < label.size(); ++i) out[i] = label[i] == static_cast<int>(c);
  return out;
}

Components interior_components(const EnergySpec& spec) {
  const std::size_t n = spec.size();
  UnionFind uf(n);
  for (const Edge& e : spec.edges()) {
    if (!spec.is_boundary(e.u) && !spec.is_boundary(e.v)) uf.unite(e.u, e.v);
  }
  Components out;
  out.label.assign(n, -1);
  std::vector<int> root_label(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (spec.is_boundary(i)) continue;
    const std::size_t r = uf.find(i);
    if (root_label[r] < 0) root_label[r] = static_cast<int>(out.count++);
    out.label[i] = root_label[r];
  }
  out.free.assign(out.count, true);
  for (const KillTerm& t : spec.kill()) {
    if (t.kappa > 0.0 && out.label[t.point] >= 0) out.free[static_cast<std::size_t>(out.label[t.point])] = false;
  }
  for (const Edge& e : spec.edges()) {
    const bool bu = spec.is_boundary(e.u), bv = spec.is_boundary(e.v);
    if (bu && !bv) out.free[static_cast<std::size_t>(out.label[e.v])] = false;
    if (bv && !bu) out.free[static_cast<std::size_t>(out.label[e.u])] = false;
  }
  return out;
}

std::vector<PointSet> kernel_basis(const EnergySpec& spec) {
  const Components comps = interior_components(spec);
  std::vector<PointSet> out;
  for (std::size_t c = 0; c < comps.count; ++c) {
    if (comps.free[c]) out.push_back(comps.members(c));
  }
  return out;
}

bool in_analytic_kernel(const EnergySpec& spec, const Field& f) {
  if (!spec.feasible(f)) return false;
  for (const Edge& e : spec.edges()) {
    if (f[static_cast<Eigen::Index>(e.u)] != f[static_cast<Eigen::Index>(e.v)]) return false;
  }
  for (const KillTerm& t : spec.kill()) {
    if (t.kappa > 0.0 && f[static_cast<Eigen::Index>(t.point)] != 0.0) return false;
  }
  return true;
}

bool analytically_invariant(const EnergySpec& spec, const PointSet& a) {
  spec.space().require_set(a, "candidate set");
  for (const Edge& e : spec.edges()) {
    if (spec.is_boundary(e.u) || spec.is_boundary(e.v)) continue;
    if (a[e.u] != a[e.v]) return false;
  }
  return true;
}

}  // namespace ndf
