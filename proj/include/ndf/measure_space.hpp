#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace ndf {

/// A real-valued function on the points of a measure space, indexed by the
/// dense point index of that space.
using Field = Eigen::VectorXd;

/// A subset of points, as a membership mask over the dense index.
using PointSet = std::vector<bool>;

/// Finite measure space with strictly positive point weights.
///
/// Points keep the order in which they were listed; that order is the dense
/// index used by every Field.
class MeasureSpace {
 public:
  MeasureSpace() = default;
  MeasureSpace(std::vector<std::string> ids, Field mu);

  /// Unnamed points "x0", "x1", ... with the given weights.
  static MeasureSpace anonymous(const Field& mu);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Field& mu() const { return mu_; }
  double mu(std::size_t i) const { return mu_[static_cast<Eigen::Index>(i)]; }
  double total_mass() const { return mu_.sum(); }

  /// Dense index of a point identifier; throws StructuralError if unknown.
  std::size_t index_of(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  Field zeros() const { return Field::Zero(static_cast<Eigen::Index>(size())); }
  Field constant(double c) const { return Field::Constant(static_cast<Eigen::Index>(size()), c); }
  Field indicator(const PointSet& set) const;
  PointSet empty_set() const { return PointSet(size(), false); }
  PointSet full_set() const { return PointSet(size(), true); }

  /// Throws StructuralError unless f has one finite value per point.
  void require_field(const Field& f, const char* what = "field") const;
  void require_set(const PointSet& set, const char* what = "set") const;

 private:
  std::vector<std::string> ids_;
  Field mu_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Sum over x of mu_x f(x) g(x).
double inner(const MeasureSpace& space, const Field& f, const Field& g);

/// L2(mu) norm.
double norm(const MeasureSpace& space, const Field& f);

/// L1(mu) norm.
double l1_norm(const MeasureSpace& space, const Field& f);

double sup_norm(const Field& f);

/// Pointwise minimum and maximum.
std::pair<Field, Field> lattice_ops(const Field& f, const Field& g);

/// (sum_x mu_x w(x) |f(x)|^p)^(1/p), p >= 1, w >= 0.
double weighted_lp_norm(const MeasureSpace& space, const Field& f, double p, const Field& w);

}  // namespace ndf
