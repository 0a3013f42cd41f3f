#include "ndf/problem_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ndf/errors.hpp"

namespace ndf {

using nlohmann::json;

namespace {

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw StructuralError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known = known || it.key() == k;
    if (!known) throw StructuralError(where + ": unknown field '" + it.key() + "'");
  }
}

double number(const json& obj, const std::string& where, const char* key, std::optional<double> fallback) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw StructuralError(where + ": missing field '" + key + "'");
  }
  const json& v = obj.at(key);
  if (!v.is_number()) throw StructuralError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

std::string text_field(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw StructuralError(where + ": missing field '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_string()) throw StructuralError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::size_t count_field(const json& obj, const std::string& where, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) throw ParameterError(where + ": '" + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

const json& array_field(const json& root, const char* key, bool required) {
  static const json kEmpty = json::array();
  if (!root.contains(key)) {
    if (required) throw StructuralError(std::string("missing top-level field '") + key + "'");
    return kEmpty;
  }
  const json& v = root.at(key);
  if (!v.is_array()) throw StructuralError(std::string("'") + key + "' must be an array");
  return v;
}

}  // namespace

ProblemFile parse_problem(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, col] = line_column(text, offset);
    std::string msg = e.what();
    if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg, line, col);
  }
  check_keys(root, "problem", {"version", "points", "edges", "kill", "boundary", "defaults"});

  ProblemFile out;
  if (root.contains("version")) {
    if (!root["version"].is_string()) throw StructuralError("version must be a string");
    out.version = root["version"].get<std::string>();
    if (out.version != "1") throw ParameterError("unsupported format version '" + out.version + "'");
  }

  std::vector<std::string> ids;
  std::vector<double> mu;
  std::set<std::string> seen;
  const json& points = array_field(root, "points", true);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const std::string where = "points[" + std::to_string(k) + "]";
    check_keys(points[k], where, {"id", "mu"});
    const std::string id = text_field(points[k], where, "id");
    const double m = number(points[k], where, "mu", 1.0);
    if (!(m > 0.0) || !std::isfinite(m)) throw ParameterError(where + ": mu must be positive");
    if (!seen.insert(id).second) throw StructuralError(where + ": duplicate point id '" + id + "'");
    ids.push_back(id);
    mu.push_back(m);
  }
  if (ids.empty()) throw StructuralError("points: at least one point is required");
  Field m = Eigen::Map<const Field>(mu.data(), static_cast<Eigen::Index>(mu.size()));
  MeasureSpace space(ids, m);

  auto point_ref = [&](const json& obj, const std::string& where, const char* key) {
    const std::string id = text_field(obj, where, key);
    if (!space.contains(id)) throw StructuralError(where + ": unknown point '" + id + "'");
    return space.index_of(id);
  };
  auto exponent = [&](const json& obj, const std::string& where) {
    const double p = number(obj, where, "exponent", 2.0);
    if (!(p > 1.0) || !std::isfinite(p)) throw ParameterError(where + ": exponent must exceed 1");
    return p;
  };

  std::vector<Edge> edges;
  const json& ej = array_field(root, "edges", false);
  for (std::size_t k = 0; k < ej.size(); ++k) {
    const std::string where = "edges[" + std::to_string(k) + "]";
    check_keys(ej[k], where, {"u", "v", "weight", "exponent"});
    Edge e;
    e.u = point_ref(ej[k], where, "u");
    e.v = point_ref(ej[k], where, "v");
    if (e.u == e.v) throw StructuralError(where + ": self-loop edges are not allowed");
    e.weight = number(ej[k], where, "weight", 1.0);
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) throw ParameterError(where + ": weight must be positive");
    e.exponent = exponent(ej[k], where);
    edges.push_back(e);
  }

  std::vector<KillTerm> kill;
  const json& kj = array_field(root, "kill", false);
  for (std::size_t k = 0; k < kj.size(); ++k) {
    const std::string where = "kill[" + std::to_string(k) + "]";
    check_keys(kj[k], where, {"point", "kappa", "exponent"});
    KillTerm t;
    t.point = point_ref(kj[k], where, "point");
    t.kappa = number(kj[k], where, "kappa", std::nullopt);
    if (!(t.kappa >= 0.0) || !std::isfinite(t.kappa)) throw ParameterError(where + ": kappa must be nonnegative");
    t.exponent = exponent(kj[k], where);
    kill.push_back(t);
  }

  PointSet boundary = space.empty_set();
  const json& bj = array_field(root, "boundary", false);
  for (std::size_t k = 0; k < bj.size(); ++k) {
    const std::string where = "boundary[" + std::to_string(k) + "]";
    if (!bj[k].is_string()) throw StructuralError(where + ": expected a point id");
    const std::string id = bj[k].get<std::string>();
    if (!space.contains(id)) throw StructuralError(where + ": unknown point '" + id + "'");
    boundary[space.index_of(id)] = true;
  }

  if (root.contains("defaults")) {
    const json& d = root["defaults"];
    check_keys(d, "defaults", {"tol", "alpha0", "schedule_depth", "divergence_threshold", "terms", "seed"});
    auto positive = [&](const char* key) {
      const double v = number(d, "defaults", key, std::nullopt);
      if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string("defaults: ") + key + " must be positive");
      return v;
    };
    if (d.contains("tol")) out.defaults.tol = positive("tol");
    if (d.contains("alpha0")) out.defaults.alpha0 = positive("alpha0");
    if (d.contains("divergence_threshold")) out.defaults.divergence_threshold = positive("divergence_threshold");
    if (d.contains("schedule_depth")) out.defaults.schedule_depth = count_field(d, "defaults", "schedule_depth");
    if (d.contains("terms")) out.defaults.terms = count_field(d, "defaults", "terms");
    if (d.contains("seed")) out.defaults.seed = count_field(d, "defaults", "seed");
  }

  out.spec = EnergySpec(std::move(space), std::move(edges), std::move(kill), std::move(boundary));
  return out;
}

std::string serialize_problem(const ProblemFile& problem) {
  const EnergySpec& spec = problem.spec;
  const auto& ids = spec.space().ids();
  json root = json::object();
  root["version"] = problem.version;
  json points = json::array();
  for (std::size_t i = 0; i < spec.size(); ++i) points.push_back({{"id", ids[i]}, {"mu", spec.space().mu(i)}});
  root["points"] = points;
  json edges = json::array();
  for (const Edge& e : spec.edges()) {
    edges.push_back({{"u", ids[e.u]}, {"v", ids[e.v]}, {"weight", e.weight}, {"exponent", e.exponent}});
  }
  root["edges"] = edges;
  json kill = json::array();
  for (const KillTerm& t : spec.kill()) {
    kill.push_back({{"point", ids[t.point]}, {"kappa", t.kappa}, {"exponent", t.exponent}});
  }
  root["kill"] = kill;
  json boundary = json::array();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (spec.is_boundary(i)) boundary.push_back(ids[i]);
  }
  root["boundary"] = boundary;
  json d = json::object();
  const ProblemDefaults& pd = problem.defaults;
  if (pd.tol) d["tol"] = *pd.tol;
  if (pd.alpha0) d["alpha0"] = *pd.alpha0;
  if (pd.schedule_depth) d["schedule_depth"] = *pd.schedule_depth;
  if (pd.divergence_threshold) d["divergence_threshold"] = *pd.divergence_threshold;
  if (pd.terms) d["terms"] = *pd.terms;
  if (pd.seed) d["seed"] = *pd.seed;
  root["defaults"] = d;
  return root.dump(2) + "\n";
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructuralError("cannot open problem file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ndf
