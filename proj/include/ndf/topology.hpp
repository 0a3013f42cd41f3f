#pragma once

#include <cstddef>
#include <vector>

#include "ndf/energy.hpp"

namespace ndf {

/// Connected components of the graph restricted to non-boundary points.
struct Components {
  /// Component index per point; -1 on boundary points.
  std::vector<int> label;
  std::size_t count = 0;
  /// Per component: no kill term with kappa > 0 and no edge to the boundary.
  std::vector<bool> free;

  PointSet members(std::size_t c) const;
};

Components interior_components(const EnergySpec& spec);

/// The analytic kernel {f : E(f) = 0} is spanned by the indicators of free
/// components; this returns those indicators.
std::vector<PointSet> kernel_basis(const EnergySpec& spec);

/// Exact test E(f) = 0: equal values across every edge, zero on the
/// boundary and wherever a kill term is active.
bool in_analytic_kernel(const EnergySpec& spec, const Field& f);

/// Graph ground truth for invariance: no edge joins A to the complement of A
/// outside the boundary. Boundary points are ignored since feasible fields
/// vanish there.
bool analytically_invariant(const EnergySpec& spec, const PointSet& a);

}  // namespace ndf
