#include <cmath>
#include <limits>

#include "doctest.h"
#include "ndf/energy.hpp"
#include "ndf/errors.hpp"
#include "ndf/random.hpp"
#include "ndf/topology.hpp"

using namespace ndf;

namespace {

Field vec(std::initializer_list<double> v) {
  Field f(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) f[i++] = x;
  return f;
}

EnergySpec pair_spec(double p = 2.0) { return SpecBuilder().point("a").point("b").edge("a", "b", 1.0, p).build(); }

// Direct evaluation from the records, written out independently of energy().
double reference_energy(const EnergySpec& s, const Field& f) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.is_boundary(i) && f[static_cast<Eigen::Index>(i)] != 0.0) return std::numeric_limits<double>::infinity();
  double e = 0.0;
  for (const auto& ed : s.edges())
    e += ed.weight / ed.exponent *
         std::pow(std::abs(f[static_cast<Eigen::Index>(ed.u)] - f[static_cast<Eigen::Index>(ed.v)]), ed.exponent);
  for (const auto& k : s.kill())
    e += k.kappa / k.exponent * s.space().mu(k.point) * std::pow(std::abs(f[static_cast<Eigen::Index>(k.point)]), k.exponent);
  return e;
}

}  // namespace

TEST_SUITE("energy") {

TEST_CASE("spec examples") {
  const auto s = pair_spec();
  CHECK(energy(s, vec({0, 0})) == 0.0);
  CHECK(energy(s, vec({1, 0})) == doctest::Approx(0.5));
  CHECK(energy(s, vec({3, 3})) == 0.0);
}

TEST_CASE("boundary violation is infinite") {
  const auto s = SpecBuilder().point("a").point("b").edge("a", "b").boundary("b").build();
  CHECK(std::isinf(energy(s, vec({0, 1}))));
  CHECK(energy(s, vec({1, 0})) == doctest::Approx(0.5));
  CHECK_THROWS_AS(energy_gradient(s, vec({0, 1})), DomainError);
}

TEST_CASE("construction rules") {
  CHECK_THROWS_AS(pair_spec(1.0), ParameterError);
  CHECK_THROWS_AS(SpecBuilder().point("a").point("b").edge("a", "b", -1.0).build(), ParameterError);
  CHECK_THROWS_AS(SpecBuilder().point("a").edge("a", "a").build(), StructuralError);
  CHECK_THROWS_AS(SpecBuilder().point("a").kill("a", -1.0).build(), ParameterError);
  CHECK_THROWS(SpecBuilder().point("a").edge("a", "zz").build());
}

TEST_CASE("energy matches direct evaluation on random specs") {
  Rng rng(5);
  RandomSpecOptions o;
  o.kill_probability = 0.4;
  o.boundary_probability = 0.2;
  for (int t = 0; t < 50; ++t) {
    const auto s = random_spec(rng, o);
    const Field f = random_field(rng, s, 2.0);
    CHECK(energy(s, f) == doctest::Approx(reference_energy(s, f)).epsilon(1e-12));
  }
}

TEST_CASE("gradient") {
  const auto s = pair_spec();
  CHECK(energy_gradient(s, vec({0, 0})) == vec({0, 0}));
  const Field g = energy_gradient(s, vec({1, 0}));
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(-1.0));
}

TEST_CASE("gradient agrees with central differences") {
  Rng rng(9);
  RandomSpecOptions o;
  o.kill_probability = 0.5;
  o.boundary_probability = 0.2;
  o.min_exponent = 2.0;
  for (int t = 0; t < 30; ++t) {
    const auto s = random_spec(rng, o);
    const Field f = random_field(rng, s);
    const Field g = energy_gradient(s, f);
    const double h = 1e-6;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.is_boundary(i)) {
        CHECK(g[static_cast<Eigen::Index>(i)] == 0.0);
        continue;
      }
      Field fp = f, fm = f;
      fp[static_cast<Eigen::Index>(i)] += h;
      fm[static_cast<Eigen::Index>(i)] -= h;
      const double fd = (reference_energy(s, fp) - reference_energy(s, fm)) / (2 * h) / s.space().mu(i);
      CHECK(g[static_cast<Eigen::Index>(i)] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("hessian agrees with differences of partials") {
  Rng rng(21);
  RandomSpecOptions o;
  o.kill_probability = 0.5;
  o.min_exponent = 2.0;
  const auto s = random_spec(rng, o);
  const Field f = random_field(rng, s);
  const auto hess = energy_hessian(s, f, 0.0);
  const double h = 1e-6;
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    Field fp = f, fm = f;
    fp[j] += h;
    fm[j] -= h;
    const Field col = (energy_partials(s, fp) - energy_partials(s, fm)) / (2 * h);
    for (Eigen::Index i = 0; i < f.size(); ++i) CHECK(hess(i, j) == doctest::Approx(col[i]).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("phi") {
  CHECK(phi(-2.0, 3.0) == doctest::Approx(-4.0));
  CHECK(phi(0.0, 1.5) == 0.0);
  CHECK(phi(4.0, 1.5) == doctest::Approx(2.0));
}

TEST_CASE("perturbation") {
  Rng rng(3);
  const auto s = random_spec(rng);
  const auto same = perturb(s, s.space().zeros());
  for (int t = 0; t < 10; ++t) {
    const Field f = random_field(rng, s);
    CHECK(energy(same, f) == doctest::Approx(energy(s, f)));
  }
  const auto single = SpecBuilder().point("x").build();
  CHECK(energy(perturb(single, vec({1})), vec({2})) == doctest::Approx(2.0));
  CHECK_THROWS_AS(perturb(single, vec({-1})), ParameterError);
}

TEST_CASE("first Beurling-Deny condition") {
  Rng rng(17);
  RandomSpecOptions o;
  o.kill_probability = 0.3;
  o.boundary_probability = 0.2;
  for (int t = 0; t < 100; ++t) {
    const auto s = random_spec(rng, o);
    const Field f = random_field(rng, s), g = random_field(rng, s);
    CHECK(bd1_check(s, f, g).pass);
    CHECK(bd1_check(s, f, f).margin == doctest::Approx(0.0));
  }
  const auto s = pair_spec(3.0);
  CHECK(bd1_check(s, vec({1, 0}), vec({0, 2})).pass);
}

TEST_CASE("second Beurling-Deny condition over the battery") {
  Rng rng(19);
  RandomSpecOptions o;
  o.kill_probability = 0.3;
  o.boundary_probability = 0.2;
  const auto battery = contraction_battery(4);
  CHECK(battery.size() == 31);
  for (int t = 0; t < 30; ++t) {
    const auto s = random_spec(rng, o);
    const Field f = random_field(rng, s), g = random_field(rng, s);
    for (const auto& c : battery) CHECK_MESSAGE(bd2_check(s, f, g, c).pass, c.describe());
  }
  const auto s = pair_spec();
  CHECK(bd2_check(s, vec({1, 2}), vec({0.5, -1}), NormalContraction::scale(1.0)).margin == doctest::Approx(0.0));
}

TEST_CASE("contractions are normal") {
  Rng rng(2);
  std::uniform_real_distribution<double> u(-5, 5);
  for (const auto& c : contraction_battery(8)) {
    CHECK(c(0.0) == doctest::Approx(0.0));
    for (int t = 0; t < 200; ++t) {
      const double a = u(rng), b = u(rng);
      CHECK(std::abs(c(a) - c(b)) <= std::abs(a - b) + 1e-14);
    }
  }
  CHECK_THROWS_AS(NormalContraction::piecewise_linear({-1, 0, 1}, {-2, 0, 1}), ParameterError);
  CHECK_THROWS_AS(NormalContraction::scale(1.5), ParameterError);
}

TEST_CASE("two-point inequality fuzz") {
  const auto r = fuzz_appendix_b(20000, 11);
  CHECK(r.samples >= 20000);
  CHECK(r.pass());
}

TEST_CASE("kernel topology") {
  const auto crit = SpecBuilder().point("a").point("b").point("c").edge("a", "b").edge("b", "c").build();
  CHECK(kernel_basis(crit).size() == 1);
  CHECK(in_analytic_kernel(crit, vec({2, 2, 2})));
  CHECK_FALSE(in_analytic_kernel(crit, vec({2, 2, 1})));
  const auto killed = SpecBuilder().point("a").point("b").edge("a", "b").kill("b", 1.0).build();
  CHECK(kernel_basis(killed).empty());
  const auto split = SpecBuilder().point("a").point("b").point("c").edge("a", "b").kill("c", 1.0).build();
  const auto comps = interior_components(split);
  CHECK(comps.count == 2);
  CHECK(analytically_invariant(split, PointSet{true, true, false}));
  CHECK_FALSE(analytically_invariant(split, PointSet{true, false, false}));
}

TEST_CASE("random connected specs stay connected off the boundary") {
  Rng rng(41);
  RandomSpecOptions o;
  o.boundary_probability = 0.4;
  o.kill_probability = 0.3;
  for (int t = 0; t < 100; ++t) CHECK(interior_components(random_spec(rng, o)).count == 1);
}

}
