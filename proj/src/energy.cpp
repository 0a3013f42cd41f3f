#include "ndf/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "ndf/errors.hpp"

namespace ndf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_exponent(double p, const std::string& where) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw ParameterError(where + ": exponent must exceed 1 (got " + std::to_string(p) + ")");
  }
}

}  // namespace

EnergySpec::EnergySpec(MeasureSpace space, std::vector<Edge> edges, std::vector<KillTerm> kill,
                       PointSet boundary)
    : space_(std::move(space)), edges_(std::move(edges)), kill_(std::move(kill)), boundary_(std::move(boundary)) {
  const std::size_t n = space_.size();
  if (boundary_.empty()) boundary_.assign(n, false);
  space_.require_set(boundary_, "boundary");
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& e = edges_[k];
    const std::string where = "edge " + std::to_string(k);
    if (e.u >= n || e.v >= n) throw StructuralError(where + ": endpoint out of range");
    if (e.u == e.v) throw StructuralError(where + ": self-loop at '" + space_.ids()[e.u] + "'");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) throw ParameterError(where + ": weight must be positive");
    require_exponent(e.exponent, where);
  }
  for (std::size_t k = 0; k < kill_.size(); ++k) {
    const KillTerm& t = kill_[k];
    const std::string where = "kill term " + std::to_string(k);
    if (t.point >= n) throw StructuralError(where + ": point out of range");
    if (!(t.kappa >= 0.0) || !std::isfinite(t.kappa)) throw ParameterError(where + ": kappa must be nonnegative");
    require_exponent(t.exponent, where);
  }
}

bool EnergySpec::has_boundary() const {
  return std::any_of(boundary_.begin(), boundary_.end(), [](bool b) { return b; });
}

bool EnergySpec::has_kill() const {
  return std::any_of(kill_.begin(), kill_.end(), [](const KillTerm& t) { return t.kappa > 0.0; });
}

double EnergySpec::max_exponent() const {
  double p = 1.0;
  for (const Edge& e : edges_) p = std::max(p, e.exponent);
  for (const KillTerm& t : kill_) {
    if (t.kappa > 0.0) p = std::max(p, t.exponent);
  }
  return p;
}

std::optional<double> EnergySpec::common_exponent() const {
  std::optional<double> p;
  auto visit = [&](double q) {
    if (!p) p = q;
    return *p == q;
  };
  for (const Edge& e : edges_) {
    if (!visit(e.exponent)) return std::nullopt;
  }
  for (const KillTerm& t : kill_) {
    if (t.kappa > 0.0 && !visit(t.exponent)) return std::nullopt;
  }
  return p;
}

bool EnergySpec::is_quadratic() const {
  if (edges_.empty() && !has_kill()) return true;
  auto p = common_exponent();
  return p && *p == 2.0;
}

Field EnergySpec::project_feasible(const Field& f) const {
  Field out = f;
  for (std::size_t i = 0; i < boundary_.size(); ++i) {
    if (boundary_[i]) out[static_cast<Eigen::Index>(i)] = 0.0;
  }
  return out;
}

bool EnergySpec::feasible(const Field& f) const {
  for (std::size_t i = 0; i < boundary_.size(); ++i) {
    if (boundary_[i] && f[static_cast<Eigen::Index>(i)] != 0.0) return false;
  }
  return true;
}

SpecBuilder& SpecBuilder::point(const std::string& id, double mu) {
  ids_.push_back(id);
  mu_.push_back(mu);
  return *this;
}
SpecBuilder& SpecBuilder::edge(const std::string& u, const std::string& v, double weight, double exponent) {
  edges_.push_back({u, v, weight, exponent});
  return *this;
}
SpecBuilder& SpecBuilder::kill(const std::string& x, double kappa, double exponent) {
  kill_.push_back({x, kappa, exponent});
  return *this;
}
SpecBuilder& SpecBuilder::boundary(const std::string& x) {
  boundary_.push_back(x);
  return *this;
}

EnergySpec SpecBuilder::build() const {
  Field mu(static_cast<Eigen::Index>(mu_.size()));
  for (std::size_t i = 0; i < mu_.size(); ++i) mu[static_cast<Eigen::Index>(i)] = mu_[i];
  MeasureSpace space(ids_, mu);
  std::vector<Edge> edges;
  for (const auto& e : edges_) edges.push_back({space.index_of(e.u), space.index_of(e.v), e.w, e.p});
  std::vector<KillTerm> kill;
  for (const auto& k : kill_) kill.push_back({space.index_of(k.x), k.k, k.q});
  PointSet boundary = space.empty_set();
  for (const auto& b : boundary_) boundary[space.index_of(b)] = true;
  return EnergySpec(std::move(space), std::move(edges), std::move(kill), std::move(boundary));
}

double phi(double t, double p) {
  if (t == 0.0) return 0.0;
  if (p == 2.0) return t;
  const double m = std::pow(std::abs(t), p - 1.0);
  return t > 0.0 ? m : -m;
}

namespace {

double power_term(double t, double p) {
  if (p == 2.0) return t * t;
  return t == 0.0 ? 0.0 : std::pow(std::abs(t), p);
}

}  // namespace

double energy(const EnergySpec& spec, const Field& f) {
  spec.space().require_field(f);
  if (!spec.feasible(f)) return kInf;
  double acc = 0.0;
  for (const Edge& e : spec.edges()) {
    const double d = f[static_cast<Eigen::Index>(e.u)] - f[static_cast<Eigen::Index>(e.v)];
    acc += e.weight / e.exponent * power_term(d, e.exponent);
  }
  const Field& mu = spec.space().mu();
  for (const KillTerm& t : spec.kill()) {
    if (t.kappa == 0.0) continue;
    const auto i = static_cast<Eigen::Index>(t.point);
    acc += t.kappa / t.exponent * mu[i] * power_term(f[i], t.exponent);
  }
  return acc;
}

Field energy_partials(const EnergySpec& spec, const Field& f) {
  spec.space().require_field(f);
  Field g = spec.space().zeros();
  for (const Edge& e : spec.edges()) {
    const auto u = static_cast<Eigen::Index>(e.u), v = static_cast<Eigen::Index>(e.v);
    const double flux = e.weight * phi(f[u] - f[v], e.exponent);
    g[u] += flux;
    g[v] -= flux;
  }
  const Field& mu = spec.space().mu();
  for (const KillTerm& t : spec.kill()) {
    if (t.kappa == 0.0) continue;
    const auto i = static_cast<Eigen::Index>(t.point);
    g[i] += t.kappa * mu[i] * phi(f[i], t.exponent);
  }
  return g;
}

Field energy_gradient(const EnergySpec& spec, const Field& f) {
  spec.space().require_field(f);
  if (!spec.feasible(f)) throw DomainError("energy_gradient: field is nonzero on the boundary");
  Field g = energy_partials(spec, f).cwiseQuotient(spec.space().mu());
  return spec.project_feasible(g);
}

Eigen::MatrixXd energy_hessian(const EnergySpec& spec, const Field& f, double curvature_floor) {
  const auto n = static_cast<Eigen::Index>(spec.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  auto curvature = [&](double t, double p) {
    if (p == 2.0) return 1.0;
    const double a = std::max(std::abs(t), curvature_floor);
    return (p - 1.0) * std::pow(a, p - 2.0);
  };
  for (const Edge& e : spec.edges()) {
    const auto u = static_cast<Eigen::Index>(e.u), v = static_cast<Eigen::Index>(e.v);
    const double c = e.weight * curvature(f[u] - f[v], e.exponent);
    h(u, u) += c;
    h(v, v) += c;
    h(u, v) -= c;
    h(v, u) -= c;
  }
  const Field& mu = spec.space().mu();
  for (const KillTerm& t : spec.kill()) {
    if (t.kappa == 0.0) continue;
    const auto i = static_cast<Eigen::Index>(t.point);
    h(i, i) += t.kappa * mu[i] * curvature(f[i], t.exponent);
  }
  return h;
}

EnergySpec perturb(const EnergySpec& spec, const Field& w) {
  spec.space().require_field(w, "perturbation weight");
  if ((w.array() < 0.0).any()) throw ParameterError("perturb: weight must be nonnegative");
  std::vector<KillTerm> kill = spec.kill();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) kill.push_back({static_cast<std::size_t>(i), w[i], 2.0});
  }
  return EnergySpec(spec.space(), spec.edges(), std::move(kill), spec.boundary());
}

NormalContraction NormalContraction::abs() { return NormalContraction{}; }

NormalContraction NormalContraction::clamp(double r) {
  if (!(r > 0.0)) throw ParameterError("clamp contraction needs r > 0");
  NormalContraction c;
  c.kind_ = Kind::Clamp;
  c.param_ = r;
  return c;
}

NormalContraction NormalContraction::deadzone(double eps) {
  if (!(eps > 0.0)) throw ParameterError("deadzone contraction needs eps > 0");
  NormalContraction c;
  c.kind_ = Kind::Deadzone;
  c.param_ = eps;
  return c;
}

NormalContraction NormalContraction::scale(double lambda) {
  if (!(std::abs(lambda) <= 1.0)) throw ParameterError("scale contraction needs |lambda| <= 1");
  NormalContraction c;
  c.kind_ = Kind::Scale;
  c.param_ = lambda;
  return c;
}

NormalContraction NormalContraction::piecewise_linear(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.empty()) throw ParameterError("piecewise contraction: knot lists mismatch");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw ParameterError("piecewise contraction: knots must increase");
    const double slope = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
    if (std::abs(slope) > 1.0 + 1e-15) throw ParameterError("piecewise contraction: slope exceeds 1");
  }
  NormalContraction c;
  c.kind_ = Kind::PiecewiseLinear;
  c.xs_ = std::move(xs);
  c.ys_ = std::move(ys);
  if (std::abs(c(0.0)) > 1e-15) throw ParameterError("piecewise contraction must pass through 0");
  return c;
}

double NormalContraction::operator()(double t) const {
  switch (kind_) {
    case Kind::Abs:
      return std::abs(t);
    case Kind::Clamp:
      return std::clamp(t, -param_, param_);
    case Kind::Deadzone:
      return t - std::clamp(t, -param_, param_);
    case Kind::Scale:
      return param_ * t;
    case Kind::PiecewiseLinear: {
      if (t <= xs_.front()) return ys_.front();
      if (t >= xs_.back()) return ys_.back();
      auto it = std::upper_bound(xs_.begin(), xs_.end(), t);
      const std::size_t k = static_cast<std::size_t>(it - xs_.begin());
      const double s = (t - xs_[k - 1]) / (xs_[k] - xs_[k - 1]);
      return ys_[k - 1] + s * (ys_[k] - ys_[k - 1]);
    }
  }
  return t;
}

Field NormalContraction::apply(const Field& f) const { return f.unaryExpr([this](double t) { return (*this)(t); }); }

std::string NormalContraction::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Abs: os << "abs"; break;
    case Kind::Clamp: os << "clamp(" << param_ << ")"; break;
    case Kind::Deadzone: os << "deadzone(" << param_ << ")"; break;
    case Kind::Scale: os << "scale(" << param_ << ")"; break;
    case Kind::PiecewiseLinear: os << "piecewise(" << xs_.size() << " knots)"; break;
  }
  return os.str();
}

std::vector<NormalContraction> contraction_battery(std::uint64_t seed, std::size_t random_count) {
  std::vector<NormalContraction> out;
  out.push_back(NormalContraction::abs());
  for (double r : {0.1, 1.0, 10.0}) out.push_back(NormalContraction::clamp(r));
  for (double e : {0.01, 0.5}) out.push_back(NormalContraction::deadzone(e));
  for (double l : {-1.0, -0.5, 0.0, 0.5, 1.0}) out.push_back(NormalContraction::scale(l));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-3.0, 3.0), slope(-1.0, 1.0);
  for (std::size_t k = 0; k < random_count; ++k) {
    // Five knots, one of them at the origin.
    std::vector<double> xs{0.0};
    while (xs.size() < 5) {
      const double x = pos(rng);
      if (std::none_of(xs.begin(), xs.end(), [x](double y) { return std::abs(x - y) < 1e-3; })) xs.push_back(x);
    }
    std::sort(xs.begin(), xs.end());
    const auto zero = static_cast<std::size_t>(std::find(xs.begin(), xs.end(), 0.0) - xs.begin());
    std::vector<double> ys(xs.size(), 0.0);
    for (std::size_t i = zero + 1; i < xs.size(); ++i) ys[i] = ys[i - 1] + slope(rng) * (xs[i] - xs[i - 1]);
    for (std::size_t i = zero; i-- > 0;) ys[i] = ys[i + 1] - slope(rng) * (xs[i + 1] - xs[i]);
    out.push_back(NormalContraction::piecewise_linear(std::move(xs), std::move(ys)));
  }
  return out;
}

double scaled_tolerance(double rhs, double tol) { return tol * std::max(1.0, std::abs(rhs)); }

namespace {

InequalityCheck compare(double lhs, double rhs, double tol) {
  InequalityCheck out;
  out.lhs = lhs;
  out.rhs = rhs;
  if (std::isinf(rhs)) {
    out.margin = std::isinf(lhs) ? 0.0 : kInf;
    out.pass = true;
    return out;
  }
  out.margin = rhs - lhs;
  out.pass = out.margin >= -scaled_tolerance(rhs, tol);
  return out;
}

}  // namespace

InequalityCheck bd1_check(const EnergySpec& spec, const Field& f, const Field& g, double tol) {
  auto [lo, hi] = lattice_ops(f, g);
  return compare(energy(spec, lo) + energy(spec, hi), energy(spec, f) + energy(spec, g), tol);
}

InequalityCheck bd2_check(const EnergySpec& spec, const Field& f, const Field& g, const NormalContraction& c,
                          double tol) {
  const Field cg = c.apply(g);
  return compare(energy(spec, f + cg) + energy(spec, f - cg), energy(spec, f + g) + energy(spec, f - g), tol);
}

FuzzReport fuzz_appendix_b(std::size_t samples, std::uint64_t seed, double relative_tol) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), expo(1.0, 8.0), mag(0.0, 3.0);
  FuzzReport rep;
  auto record = [&](double lhs, double rhs) {
    ++rep.samples;
    const double rel = (lhs - rhs) / std::max(rhs, std::numeric_limits<double>::min());
    rep.worst_relative = std::max(rep.worst_relative, rel);
    if (rel > relative_tol) ++rep.violations;
  };
  for (std::size_t s = 0; s < samples; ++s) {
    const double lambda = (s % 50 == 0) ? 1.0 : (s % 50 == 1 ? 0.0 : unit(rng));
    const double p = expo(rng);
    const Eigen::Vector2d x(gauss(rng), gauss(rng)), y(gauss(rng), gauss(rng));
    record(std::pow((x + lambda * y).norm(), p) + std::pow((x - lambda * y).norm(), p),
           std::pow((x + y).norm(), p) + std::pow((x - y).norm(), p));

    const double a = mag(rng), b = mag(rng);
    const double c = a * b * unit(rng);
    const double h = p / 2.0;
    auto base = [&](double l, double sign) { return std::max(0.0, a * a + sign * 2.0 * l * c + l * l * b * b); };
    record(std::pow(base(lambda, 1.0), h) + std::pow(base(lambda, -1.0), h),
           std::pow(base(1.0, 1.0), h) + std::pow(base(1.0, -1.0), h));
  }
  return rep;
}

}  // namespace ndf
