#include <cmath>

#include "doctest.h"
#include "ndf/errors.hpp"
#include "ndf/random.hpp"
#include "ndf/semimodular.hpp"
#include "oracles.hpp"

using namespace ndf;

namespace {

Field vec(std::initializer_list<double> v) {
  Field f(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) f[i++] = x;
  return f;
}

}  // namespace

TEST_SUITE("semimodular") {

TEST_CASE("Luxemburg norm examples") {
  const auto s = SpecBuilder().point("a").point("b").edge("a", "b", 3.0, 3.0).build();
  // E(f) = |f(a) - f(b)|^3 = 8 for a jump of 2.
  const Field f = vec({2, 0});
  REQUIRE(energy(s, f) == doctest::Approx(8.0));
  CHECK(luxemburg_norm(s, f) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(luxemburg_norm(s, vec({0, 0})) == 0.0);
  CHECK(luxemburg_norm(s, vec({1, 1})) == 0.0);
}

TEST_CASE("Luxemburg norm off the domain is infinite") {
  const auto s = SpecBuilder().point("a").point("b").edge("a", "b").boundary("b").build();
  CHECK(std::isinf(luxemburg_norm(s, vec({0, 1}))));
}

TEST_CASE("homogeneous identity") {
  Rng rng(51);
  RandomSpecOptions o;
  o.constant_exponent = true;
  o.kill_probability = 0.3;
  for (int t = 0; t < 30; ++t) {
    const auto s = random_spec(rng, o);
    const Field f = random_field(rng, s);
    const double p = *s.common_exponent();
    CHECK(std::abs(luxemburg_norm(s, f) - std::pow(energy(s, f), 1.0 / p)) <= 1e-10);
  }
}

TEST_CASE("Luxemburg family") {
  Rng rng(52);
  RandomSpecOptions o;
  o.kill_probability = 0.3;
  o.boundary_probability = 0.2;
  for (int t = 0; t < 30; ++t) {
    const auto s = random_spec(rng, o);
    const Field f = random_field(rng, s);
    CHECK(luxemburg_family_check(s, f, 2.0, 1.0).pass());
    const auto same = luxemburg_family_check(s, f, 1.0, 1.0);
    CHECK(same.pass());
    CHECK(same.norm_r == doctest::Approx(same.norm_s));
  }
}

TEST_CASE("Luxemburg norm is a norm") {
  Rng rng(53);
  RandomSpecOptions o;
  o.kill_probability = 0.3;
  for (int t = 0; t < 20; ++t) {
    const auto s = random_spec(rng, o);
    const Field f = random_field(rng, s), g = random_field(rng, s);
    const double nf = luxemburg_norm(s, f), ng = luxemburg_norm(s, g);
    CHECK(luxemburg_norm(s, f + g) <= (nf + ng) * (1 + 1e-10));
    CHECK(luxemburg_norm(s, -2.5 * f) == doctest::Approx(2.5 * nf).epsilon(1e-10));
  }
}

TEST_CASE("Delta2 constant") {
  const auto quad = SpecBuilder().point("a").point("b").edge("a", "b").kill("b", 1.0).build();
  CHECK(delta2_constant(quad) == 4.0);
  const auto mixed = SpecBuilder().point("a").point("b").point("c").edge("a", "b").edge("b", "c", 1.0, 3.0).build();
  CHECK(delta2_constant(mixed) == 8.0);
  CHECK(delta2_battery(mixed, 3).pass());
  Rng rng(54);
  for (int t = 0; t < 10; ++t) CHECK(delta2_battery(random_spec(rng), t).pass());
}

TEST_CASE("directional derivative") {
  const auto s = SpecBuilder().point("a").point("b").edge("a", "b", 1.0, 3.0).boundary("b").build();
  CHECK(directional_derivative(s, vec({1, 0}), vec({0, 0})) == 0.0);
  CHECK(std::isinf(directional_derivative(s, vec({1, 0}), vec({0, 1}))));
  CHECK_THROWS_AS(directional_derivative(s, vec({0, 1}), vec({1, 0})), DomainError);
  const double h = 1e-7;
  const Field f = vec({0.7, 0}), g = vec({0.3, 0});
  const double fd = (energy(s, f + h * g) - energy(s, f)) / h;
  CHECK(directional_derivative(s, f, g) == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("convex conjugate") {
  const auto single = SpecBuilder().point("x").kill("x", 1.0).build();
  const auto zero = convex_conjugate(single, vec({0}));
  CHECK(zero.value == doctest::Approx(0.0));
  REQUIRE(zero.maximizer);
  CHECK(std::abs((*zero.maximizer)[0]) < 1e-10);
  CHECK(convex_conjugate(single, vec({3})).value == doctest::Approx(4.5).epsilon(1e-10));
  const auto crit = SpecBuilder().point("a").point("b").edge("a", "b").build();
  CHECK(convex_conjugate(crit, vec({1, 0.5})).diverged);
  // Mean-zero slopes on a critical pair stay finite: sup t - t^2/2 = 1/2.
  const auto mz = convex_conjugate(crit, vec({1, -1}));
  CHECK_FALSE(mz.diverged);
  CHECK(mz.value == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("conjugate matches the quadratic oracle") {
  Rng rng(55);
  RandomSpecOptions o;
  o.quadratic = true;
  o.force_subcritical = true;
  o.kill_probability = 0.4;
  for (int t = 0; t < 10; ++t) {
    const auto s = random_spec(rng, o);
    const Field phi = random_field(rng, s);
    const Field x = oracle::green(s, phi);
    const double ref = oracle::mu_inner(s, phi, x) - oracle::quadratic_energy(s, x);
    CHECK(convex_conjugate(s, phi).value == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("duality recovery") {
  const auto s = SpecBuilder().point("a").point("b").edge("a", "b").build();
  const Field f = vec({1, 0});
  CHECK(duality_recover(s, vec({0, 0}), {1e-2})[0].value == doctest::Approx(0.0));
  const auto steps = duality_recover(s, f, {1e-2, 1e-3, 1e-4});
  REQUIRE(steps.size() == 3);
  CHECK(std::abs(steps.back().value - 0.5) <= 1e-3 * 0.5);
  for (const auto& st : steps) CHECK(st.gap_residual <= 1e-6);
}

}
