#include <cmath>

#include "doctest.h"
#include "ndf/errors.hpp"
#include "ndf/measure_space.hpp"

using ndf::Field;
using ndf::MeasureSpace;

namespace {

Field vec(std::initializer_list<double> v) {
  Field f(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) f[i++] = x;
  return f;
}

}  // namespace

TEST_SUITE("measure-space") {

TEST_CASE("inner product") {
  CHECK(ndf::inner(MeasureSpace::anonymous(vec({1, 1})), vec({1, 0}), vec({0, 1})) == 0.0);
  CHECK(ndf::inner(MeasureSpace::anonymous(vec({2, 3})), vec({1, 1}), vec({1, 1})) == 5.0);
  CHECK(ndf::inner(MeasureSpace::anonymous(vec({1, 1})), vec({1, 2}), vec({3, 4})) == 11.0);
}

TEST_CASE("norms") {
  const auto s = MeasureSpace::anonymous(vec({2, 0.5}));
  CHECK(ndf::norm(s, vec({1, 2})) == doctest::Approx(std::sqrt(2.0 + 2.0)));
  CHECK(ndf::l1_norm(s, vec({-1, 2})) == doctest::Approx(3.0));
  CHECK(ndf::sup_norm(vec({-3, 2})) == 3.0);
}

TEST_CASE("dimension mismatch is structural") {
  const auto s = MeasureSpace::anonymous(vec({1, 1}));
  CHECK_THROWS_AS(ndf::inner(s, vec({1}), vec({1, 1})), ndf::StructuralError);
}

TEST_CASE("lattice operations") {
  auto [lo, hi] = ndf::lattice_ops(vec({1, 0}), vec({0, 1}));
  CHECK(lo == vec({0, 0}));
  CHECK(hi == vec({1, 1}));
  std::tie(lo, hi) = ndf::lattice_ops(vec({2, -1}), vec({1, 3}));
  CHECK(lo == vec({1, -1}));
  CHECK(hi == vec({2, 3}));
  const Field f = vec({0.3, -2});
  std::tie(lo, hi) = ndf::lattice_ops(f, f);
  CHECK(lo == f);
  CHECK(hi == f);
}

TEST_CASE("weighted lp norm") {
  const auto s = MeasureSpace::anonymous(vec({1, 1}));
  CHECK(ndf::weighted_lp_norm(s, vec({0, 0}), 2, vec({1, 1})) == 0.0);
  CHECK(ndf::weighted_lp_norm(s, vec({1, -1}), 1, vec({1, 1})) == doctest::Approx(2.0));
  CHECK(ndf::weighted_lp_norm(s, vec({3, 7}), 2, vec({4, 0})) == doctest::Approx(6.0));
  CHECK_THROWS_AS(ndf::weighted_lp_norm(s, vec({1, 1}), 0.5, vec({1, 1})), ndf::ParameterError);
}

TEST_CASE("construction rules") {
  CHECK_THROWS_AS(MeasureSpace({"a", "b"}, vec({1, 0})), ndf::ParameterError);
  CHECK_THROWS(MeasureSpace({"a", "a"}, vec({1, 1})));
  const MeasureSpace s({"a", "b"}, vec({1, 2}));
  CHECK(s.index_of("b") == 1);
  CHECK(s.total_mass() == 3.0);
  CHECK_THROWS_AS(s.index_of("z"), ndf::StructuralError);
}

}
