#include <cmath>

#include "doctest.h"
#include "ndf/criticality.hpp"
#include "ndf/errors.hpp"
#include "ndf/random.hpp"
#include "ndf/topology.hpp"
#include "oracles.hpp"

using namespace ndf;

namespace {

Field vec(std::initializer_list<double> v) {
  Field f(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) f[i++] = x;
  return f;
}

EnergySpec single() { return SpecBuilder().point("x").kill("x", 1.0).build(); }

EnergySpec path3() { return SpecBuilder().point("a").point("b").point("c").edge("a", "b").edge("b", "c").build(); }

}  // namespace

TEST_SUITE("criticality") {

TEST_CASE("K of simple weights") {
  CHECK(K_of(single(), vec({0})) == 0.0);
  CHECK(K_of(single(), vec({1})) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::isinf(K_of(path3(), vec({1, 0, 1}))));
  CHECK(K_of(path3(), vec({0, 0, 0})) == 0.0);
}

TEST_CASE("K matches the linear oracle") {
  Rng rng(61);
  RandomSpecOptions o;
  o.quadratic = true;
  o.force_subcritical = true;
  o.kill_probability = 0.3;
  for (int t = 0; t < 10; ++t) {
    const auto s = random_spec(rng, o);
    const Field w = random_nonneg_field(rng, s);
    const double ref = oracle::mu_inner(s, w, oracle::green(s, w));
    CHECK(K_of(s, w) == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("Hardy upper bound") {
  const auto s = single();
  const auto one = hardy_upper_check(s, vec({1}), {vec({1})});
  CHECK(one.pass);
  // LHS 1 against (1 + 1) / sqrt(2).
  CHECK(one.worst_margin == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-6));
  CHECK_THROWS_AS(hardy_upper_check(path3(), vec({1, 1, 1}), {vec({1, 0, 0})}), PreconditionError);
}

TEST_CASE("optimal constant on a single vertex") {
  const auto oc = hardy_optimal_constant(single(), vec({1}));
  CHECK(oc.mu_hat == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  CHECK(oc.K_tilde == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(oc.pass);
  const auto z = hardy_optimal_constant(single(), vec({0}));
  CHECK(z.mu_hat == 0.0);
  CHECK(z.K_tilde == 0.0);
}

TEST_CASE("optimal constant matches the bilinear formula") {
  Rng rng(62);
  RandomSpecOptions o;
  o.quadratic = true;
  o.force_subcritical = true;
  o.kill_probability = 0.3;
  o.max_points = 8;
  for (int t = 0; t < 8; ++t) {
    const auto s = random_spec(rng, o);
    const Field w = random_nonneg_field(rng, s);
    const double k = oracle::mu_inner(s, w, oracle::green(s, w));
    const auto oc = hardy_optimal_constant(s, w, 200, static_cast<std::uint64_t>(t));
    CHECK(oc.pass);
    CHECK(std::abs(oc.mu_hat - std::sqrt(2 * k)) <= 0.05 * std::sqrt(2 * k));
  }
}

TEST_CASE("Hardy weight from the Green operator") {
  const auto hw = hardy_from_green(single(), vec({1}));
  CHECK(hw.weight[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(hw.positive);
  CHECK(hw.proof_bound);
  const auto tiny = hardy_from_green(single(), vec({1e-6}));
  CHECK(tiny.weight[0] == doctest::Approx(1e-6).epsilon(1e-6));
  CHECK(tiny.K <= 1e-6 * (1 + 1e-6));
  CHECK_THROWS_AS(hardy_from_green(path3(), vec({1, 1, 1})), PreconditionError);
}

TEST_CASE("Hardy weight series") {
  const auto hw = synthesize_hardy_weight(single(), vec({1}));
  CHECK(hw.positive);
  CHECK(hw.term_bounds);
  CHECK(hw.K <= 1 + 1e-6);
  const auto crit = synthesize_hardy_weight(path3(), vec({1, 1, 1}) / 3.0, 6);
  CHECK(crit.term_bounds);
  CHECK_FALSE(crit.positive);
  CHECK(sup_norm(crit.weight) < 1e-6);
}

TEST_CASE("invariant sets") {
  const auto s = SpecBuilder().point("a").point("b").point("c").edge("a", "b").kill("c", 1.0).build();
  const auto battery = field_battery(s, 3);
  CHECK(invariant_set_check(s, PointSet{false, false, false}, battery).pass);
  CHECK(invariant_set_check(s, PointSet{true, true, true}, battery).pass);
  const auto comp = invariant_set_check(s, PointSet{true, true, false}, battery);
  CHECK(comp.pass);
  CHECK(comp.agrees());
  const auto half = invariant_set_check(s, PointSet{true, false, false}, battery);
  CHECK_FALSE(half.pass);
  CHECK(half.agrees());
  CHECK(half.worst_energy_margin < 0.0);
}

TEST_CASE("classification examples") {
  CHECK(classify(path3()).verdict == Verdict::Critical);
  const auto with_boundary =
      SpecBuilder().point("a").point("b").point("c").point("d").edge("a", "b").edge("b", "c").edge("c", "d").boundary("d").build();
  const auto sub = classify(with_boundary);
  CHECK(sub.verdict == Verdict::Subcritical);
  CHECK_FALSE(sub.witness_pending);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(sub.hardy.weight[i] > 0.0);
  CHECK(K_of(with_boundary, sub.hardy.weight) <= 1 + 1e-6);
  const auto red = SpecBuilder().point("l0").point("l1").point("r0").point("r1")
                       .edge("l0", "l1").edge("r0", "r1", 1.0, 3.0).kill("r1", 1.0).build();
  const auto rep = classify(red);
  CHECK(rep.verdict == Verdict::Reducible);
  CHECK(analytically_invariant(red, rep.invariant_set));
}

TEST_CASE("classification of random connected specs") {
  Rng rng(63);
  for (int t = 0; t < 20; ++t) {
    RandomSpecOptions o;
    o.max_points = 8;
    if (t % 2) {
      o.kill_probability = 0.3;
      o.boundary_probability = 0.2;
      o.force_subcritical = true;
    }
    const auto s = random_spec(rng, o);
    const auto rep = classify(s);
    const bool critical = !s.has_kill() && !s.has_boundary();
    CHECK(rep.verdict == (critical ? Verdict::Critical : Verdict::Subcritical));
    if (rep.verdict == Verdict::Subcritical && !rep.witness_pending) {
      for (std::size_t i = 0; i < s.size(); ++i)
        if (!s.is_boundary(i)) CHECK(rep.hardy.weight[static_cast<Eigen::Index>(i)] > 0.0);
      CHECK(K_of(s, rep.hardy.weight) <= 1 + 1e-6);
    }
  }
}

TEST_CASE("weak Hardy profile on a single vertex") {
  // With p = 1 the ratio is (1 - r) |f| / (|f| / sqrt 2).
  const std::vector<double> grid{0.01, 0.25, 0.5, 1.0, 2.0};
  const auto prof = weak_hardy_profile(single(), vec({1}), 1.0, grid);
  REQUIRE(prof.alpha_of_r.size() == grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    CHECK(prof.alpha_of_r[k] == doctest::Approx(std::sqrt(2.0) * std::max(0.0, 1.0 - grid[k])).epsilon(1e-6));
  CHECK_THROWS_AS(weak_hardy_profile(path3(), vec({1, 1, 1}), 2.0, grid), PreconditionError);
}

TEST_CASE("weak profiles are monotone") {
  Rng rng(64);
  RandomSpecOptions o;
  o.force_subcritical = true;
  o.kill_probability = 0.3;
  const auto s = random_spec(rng, o);
  const std::vector<double> grid{0.05, 0.1, 0.5, 1.0, 4.0};
  const auto prof = weak_hardy_profile(s, random_nonneg_field(rng, s), 2.0, grid);
  for (std::size_t k = 1; k < grid.size(); ++k) CHECK(prof.alpha_of_r[k] <= prof.alpha_of_r[k - 1]);
}

TEST_CASE("weak Poincare profile") {
  const auto pair = SpecBuilder().point("a").point("b").edge("a", "b").build();
  const std::vector<double> grid{1e-3, 0.1, 0.5};
  const auto prof = weak_poincare_profile(pair, vec({1, 1}), 2.0, grid);
  // Every f on a pair has |f - mean|_{L2} = |f|_L = jump / sqrt 2, so alpha(r) = 1 - r sqrt 2.
  CHECK(prof.alpha_of_r[0] == doctest::Approx(1.0 - 1e-3 * std::sqrt(2.0)).epsilon(1e-6));
  for (double a : prof.alpha_of_r) CHECK(std::isfinite(a));
  const auto red = SpecBuilder().point("a").point("b").point("c").edge("a", "b").build();
  CHECK_THROWS_AS(weak_poincare_profile(red, vec({1, 1, 1}), 2.0, grid), PreconditionError);
}

}
