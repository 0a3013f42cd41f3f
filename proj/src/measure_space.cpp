#include "ndf/measure_space.hpp"

#include <cmath>

#include "ndf/errors.hpp"

namespace ndf {

MeasureSpace::MeasureSpace(std::vector<std::string> ids, Field mu)
    : ids_(std::move(ids)), mu_(std::move(mu)) {
  if (static_cast<std::size_t>(mu_.size()) != ids_.size()) {
    throw StructuralError("measure space: " + std::to_string(ids_.size()) + " identifiers but " +
                          std::to_string(mu_.size()) + " weights");
  }
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const double m = mu_[static_cast<Eigen::Index>(i)];
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw ParameterError("measure space: weight of point '" + ids_[i] + "' must be positive and finite");
    }
    if (!index_.emplace(ids_[i], i).second) {
      throw StructuralError("measure space: duplicate point identifier '" + ids_[i] + "'");
    }
  }
}

MeasureSpace MeasureSpace::anonymous(const Field& mu) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(mu.size()));
  for (Eigen::Index i = 0; i < mu.size(); ++i) ids.push_back("x" + std::to_string(i));
  return MeasureSpace(std::move(ids), mu);
}

std::size_t MeasureSpace::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw StructuralError("unknown point '" + id + "'");
  return it->second;
}

Field MeasureSpace::indicator(const PointSet& set) const {
  require_set(set);
  Field out = zeros();
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set[i]) out[static_cast<Eigen::Index>(i)] = 1.0;
  }
  return out;
}

void MeasureSpace::require_field(const Field& f, const char* what) const {
  if (static_cast<std::size_t>(f.size()) != size()) {
    throw StructuralError(std::string(what) + " has " + std::to_string(f.size()) +
                          " values, space has " + std::to_string(size()) + " points");
  }
  if (!f.allFinite()) throw StructuralError(std::string(what) + " has non-finite values");
}

void MeasureSpace::require_set(const PointSet& set, const char* what) const {
  if (set.size() != size()) {
    throw StructuralError(std::string(what) + " has " + std::to_string(set.size()) +
                          " entries, space has " + std::to_string(size()) + " points");
  }
}

double inner(const MeasureSpace& space, const Field& f, const Field& g) {
  space.require_field(f, "f");
  space.require_field(g, "g");
  return (space.mu().array() * f.array() * g.array()).sum();
}

double norm(const MeasureSpace& space, const Field& f) { return std::sqrt(inner(space, f, f)); }

double l1_norm(const MeasureSpace& space, const Field& f) {
  space.require_field(f);
  return (space.mu().array() * f.array().abs()).sum();
}

double sup_norm(const Field& f) { return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff(); }

std::pair<Field, Field> lattice_ops(const Field& f, const Field& g) {
  if (f.size() != g.size()) throw StructuralError("lattice_ops: dimension mismatch");
  return {f.cwiseMin(g), f.cwiseMax(g)};
}

double weighted_lp_norm(const MeasureSpace& space, const Field& f, double p, const Field& w) {
  if (!(p >= 1.0)) throw ParameterError("weighted_lp_norm: p must be at least 1");
  space.require_field(f, "f");
  space.require_field(w, "w");
  if ((w.array() < 0.0).any()) throw ParameterError("weighted_lp_norm: weight must be nonnegative");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (w[i] == 0.0 || f[i] == 0.0) continue;
    acc += space.mu()[i] * w[i] * std::pow(std::abs(f[i]), p);
  }
  return std::pow(acc, 1.0 / p);
}

}  // namespace ndf
