#include <cmath>

#include "doctest.h"
#include "ndf/errors.hpp"
#include "ndf/random.hpp"
#include "ndf/solver.hpp"
#include "oracles.hpp"

using namespace ndf;

TEST_SUITE("solver") {

TEST_CASE("quadratic minimization matches the linear oracle") {
  Rng rng(8);
  RandomSpecOptions o;
  o.quadratic = true;
  o.kill_probability = 0.3;
  o.boundary_probability = 0.2;
  for (int t = 0; t < 20; ++t) {
    const auto s = random_spec(rng, o);
    ConvexProblem pb;
    pb.spec = &s;
    pb.c = 0.7;
    pb.b = random_field(rng, s);
    const auto out = minimize(pb, s.space().zeros(), ProxConfig{});
    CHECK(out.report.converged);
    const Field ref = oracle::solve_shifted(s, 0.7, pb.b);
    CHECK((out.x - ref).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("nonquadratic stationarity") {
  Rng rng(12);
  RandomSpecOptions o;
  o.kill_probability = 0.3;
  o.boundary_probability = 0.2;
  o.min_exponent = 1.3;
  o.max_exponent = 4.0;
  for (auto method : {SolverMethod::Newton, SolverMethod::Gradient}) {
    for (int t = 0; t < 10; ++t) {
      const auto s = random_spec(rng, o);
      ConvexProblem pb;
      pb.spec = &s;
      pb.c = 1.0;
      pb.b = random_field(rng, s);
      ProxConfig cfg;
      cfg.method = method;
      cfg.residual_tolerance = 1e-8;
      cfg.max_iterations = 20000;
      const auto out = minimize(pb, s.space().zeros(), cfg);
      CHECK(out.report.converged);
      CHECK(stationarity_residual(pb, out.x) <= out.report.tolerance);
      CHECK(objective(pb, out.x) <= objective(pb, s.space().zeros()));
    }
  }
}

TEST_CASE("bounds and fixed coordinates are honored") {
  const auto s = SpecBuilder().point("a").point("b").point("c").edge("a", "b").edge("b", "c").kill("c", 1.0).build();
  ConvexProblem pb;
  pb.spec = &s;
  pb.b = s.space().zeros();
  pb.bounded = PointSet{true, false, false};
  pb.lower = s.space().constant(0.0);
  pb.lower[0] = 1.0;
  const auto out = minimize(pb, s.space().constant(1.0), ProxConfig{});
  CHECK(out.x[0] == doctest::Approx(1.0));
  // Series resistance 1 + 1 + 1 from a to the killing sink.
  CHECK(out.x[1] == doctest::Approx(2.0 / 3.0));
  CHECK(out.x[2] == doctest::Approx(1.0 / 3.0));

  ConvexProblem fx = pb;
  fx.bounded.clear();
  fx.fixed = PointSet{true, false, false};
  fx.fixed_value = s.space().constant(1.0);
  const auto same = minimize(fx, s.space().zeros(), ProxConfig{});
  CHECK((same.x - out.x).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("budget exhaustion carries the best iterate") {
  const auto s = SpecBuilder().point("a").point("b").edge("a", "b", 1.0, 1.5).kill("b", 1.0, 3.0).build();
  ConvexProblem pb;
  pb.spec = &s;
  pb.c = 1e-3;
  pb.b = s.space().constant(3.0);
  ProxConfig cfg;
  cfg.max_iterations = 1;
  try {
    minimize(pb, s.space().zeros(), cfg);
    FAIL("expected non-convergence");
  } catch (const NonConvergenceError& e) {
    CHECK(e.best_iterate().size() == 2);
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("divergence threshold") {
  const auto s = SpecBuilder().point("a").point("b").edge("a", "b").build();
  ConvexProblem pb;
  pb.spec = &s;
  pb.b = s.space().constant(1.0);
  pb.divergence_threshold = 1e6;
  const auto out = minimize(pb, s.space().zeros(), ProxConfig{});
  CHECK(out.report.diverged);
}

TEST_CASE("invalid configuration") {
  ProxConfig cfg;
  cfg.shrink = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = {};
  cfg.residual_tolerance = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

}
