#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ndf/measure_space.hpp"

namespace ndf {

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double weight = 1.0;
  double exponent = 2.0;
};

/// Killing term (kappa / q) mu_x |f(x)|^q at one point. A point may carry
/// several terms (perturbed forms add a quadratic one).
struct KillTerm {
  std::size_t point = 0;
  double kappa = 0.0;
  double exponent = 2.0;
};

/// Graph variable-exponent energy
///
///   E(f) = sum_e (w_e / p_e) |f(u) - f(v)|^{p_e} + sum_k (kappa_k / q_k) mu_x |f(x)|^{q_k}
///
/// with E(f) = +inf whenever f does not vanish on the Dirichlet boundary.
/// All exponents lie in (1, inf); the functional is convex, symmetric and
/// E(0) = 0.
class EnergySpec {
 public:
  EnergySpec() = default;
  EnergySpec(MeasureSpace space, std::vector<Edge> edges, std::vector<KillTerm> kill,
             PointSet boundary);

  const MeasureSpace& space() const { return space_; }
  std::size_t size() const { return space_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<KillTerm>& kill() const { return kill_; }
  const PointSet& boundary() const { return boundary_; }
  bool is_boundary(std::size_t i) const { return boundary_[i]; }
  bool has_boundary() const;
  /// True if some kill term has kappa > 0.
  bool has_kill() const;

  /// Largest exponent among edges and kill terms (1 if there are none).
  double max_exponent() const;
  /// The common exponent when every edge and kill term shares one.
  std::optional<double> common_exponent() const;
  /// True when every exponent equals 2.
  bool is_quadratic() const;

  /// Field that is zero on the boundary and equal to f elsewhere.
  Field project_feasible(const Field& f) const;
  bool feasible(const Field& f) const;

 private:
  MeasureSpace space_;
  std::vector<Edge> edges_;
  std::vector<KillTerm> kill_;
  PointSet boundary_;
};

/// Convenience builder keyed by point identifiers.
class SpecBuilder {
 public:
  SpecBuilder& point(const std::string& id, double mu = 1.0);
  SpecBuilder& edge(const std::string& u, const std::string& v, double weight = 1.0, double exponent = 2.0);
  SpecBuilder& kill(const std::string& x, double kappa, double exponent = 2.0);
  SpecBuilder& boundary(const std::string& x);
  EnergySpec build() const;

 private:
  struct RawEdge { std::string u, v; double w, p; };
  struct RawKill { std::string x; double k, q; };
  std::vector<std::string> ids_;
  std::vector<double> mu_;
  std::vector<RawEdge> edges_;
  std::vector<RawKill> kill_;
  std::vector<std::string> boundary_;
};

/// phi_p(t) = |t|^{p-1} sign(t).
double phi(double t, double p);

/// E(f); +inf iff f is nonzero somewhere on the boundary.
double energy(const EnergySpec& spec, const Field& f);

/// Gradient of E at f represented against the mu inner product, with
/// boundary coordinates set to zero. Throws DomainError if f is infeasible.
Field energy_gradient(const EnergySpec& spec, const Field& f);

/// Euclidean gradient dE/df(x) (no division by mu), boundary coordinates
/// included as computed.
Field energy_partials(const EnergySpec& spec, const Field& f);

/// Euclidean Hessian of E at f. Curvatures |t|^{p-2} are evaluated at
/// max(|t|, curvature_floor) so the matrix stays finite for p < 2.
Eigen::MatrixXd energy_hessian(const EnergySpec& spec, const Field& f, double curvature_floor);

/// E_w = E + (1/2) int |f|^2 w dmu, realized as extra quadratic kill terms.
EnergySpec perturb(const EnergySpec& spec, const Field& w);

/// Normal contraction: C(0) = 0 and |C(a) - C(b)| <= |a - b|.
class NormalContraction {
 public:
  enum class Kind { Abs, Clamp, Deadzone, Scale, PiecewiseLinear };

  static NormalContraction abs();
  static NormalContraction clamp(double r);
  static NormalContraction deadzone(double eps);
  static NormalContraction scale(double lambda);
  /// Piecewise linear through (0, 0) with the given knots; slopes between
  /// consecutive knots (and constant extension outside) must lie in [-1, 1].
  static NormalContraction piecewise_linear(std::vector<double> knots_x, std::vector<double> knots_y);

  double operator()(double t) const;
  Field apply(const Field& f) const;
  Kind kind() const { return kind_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::Abs;
  double param_ = 0.0;
  std::vector<double> xs_, ys_;
};

/// The fixed contraction battery: abs, clamps, deadzones, scales and
/// `random_count` random piecewise-linear contractions with five knots.
std::vector<NormalContraction> contraction_battery(std::uint64_t seed, std::size_t random_count = 20);

struct InequalityCheck {
  bool pass = true;
  double margin = 0.0;  ///< RHS - LHS
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Default absolute tolerance for inequality margins on unit-scale data.
inline constexpr double kMarginTolerance = 1e-9;

/// Tolerance tol * max(1, |rhs|).
double scaled_tolerance(double rhs, double tol = kMarginTolerance);

/// E(f ^ g) + E(f v g) <= E(f) + E(g).
InequalityCheck bd1_check(const EnergySpec& spec, const Field& f, const Field& g,
                          double tol = kMarginTolerance);

/// E(f + Cg) + E(f - Cg) <= E(f + g) + E(f - g).
InequalityCheck bd2_check(const EnergySpec& spec, const Field& f, const Field& g,
                          const NormalContraction& c, double tol = kMarginTolerance);

struct FuzzReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_relative = 0.0;  ///< max over samples of (LHS - RHS) / max(RHS, tiny)
  bool pass() const { return violations == 0; }
};

/// Random test of |x + ly|^p + |x - ly|^p <= |x + y|^p + |x - y|^p on R^2
/// (|l| <= 1, p in [1, 8]) and of its scalar (a, b, c) form with |c| <= ab.
FuzzReport fuzz_appendix_b(std::size_t samples, std::uint64_t seed, double relative_tol = 1e-12);

}  // namespace ndf
