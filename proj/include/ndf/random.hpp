#pragma once

#include <cstddef>
#include <random>

#include "ndf/energy.hpp"

namespace ndf {

using Rng = std::mt19937_64;

/// Knobs for random graph energies. Graphs are connected (random spanning
/// tree plus extra edges) unless `connected` is false, in which case edges
/// are drawn independently.
struct RandomSpecOptions {
  std::size_t min_points = 2;
  std::size_t max_points = 10;
  double extra_edge_probability = 0.3;
  bool connected = true;
  double min_exponent = 1.5;
  double max_exponent = 3.5;
  bool quadratic = false;          ///< all exponents 2
  bool constant_exponent = false;  ///< one exponent drawn per spec
  double kill_probability = 0.0;
  double boundary_probability = 0.0;
  /// Guarantee at least one active kill term or boundary point.
  bool force_subcritical = false;
  double mu_min = 0.5, mu_max = 2.0;
  double weight_min = 0.5, weight_max = 2.0;
  double kappa_min = 0.2, kappa_max = 2.0;
};

EnergySpec random_spec(Rng& rng, const RandomSpecOptions& opts = {});

/// Gaussian field with standard deviation `scale`, zero on the boundary.
Field random_field(Rng& rng, const EnergySpec& spec, double scale = 1.0);

/// |Gaussian| field, zero on the boundary.
Field random_nonneg_field(Rng& rng, const EnergySpec& spec, double scale = 1.0);

/// Random subset; each point included with probability `p`.
PointSet random_subset(Rng& rng, std::size_t n, double p = 0.5);

}  // namespace ndf
