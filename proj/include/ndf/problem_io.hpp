#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ndf/energy.hpp"

namespace ndf {

/// Solver and tolerance overrides stored with a problem.
struct ProblemDefaults {
  std::optional<double> tol;
  std::optional<double> alpha0;
  std::optional<std::size_t> schedule_depth;
  std::optional<double> divergence_threshold;
  std::optional<std::size_t> terms;
  std::optional<std::uint64_t> seed;
  bool operator==(const ProblemDefaults&) const = default;
};

/// JSON problem file:
///
///   { "version": "1",
///     "points":   [ { "id": "a", "mu": 1.0 }, ... ],
///     "edges":    [ { "u": "a", "v": "b", "weight": 1.0, "exponent": 2.0 }, ... ],
///     "kill":     [ { "point": "a", "kappa": 1.0, "exponent": 2.0 }, ... ],
///     "boundary": [ "b", ... ],
///     "defaults": { "tol": 1e-10, "alpha0": 1, "schedule_depth": 40,
///                   "divergence_threshold": 1e8, "terms": 20, "seed": 7 } }
///
/// "mu", "weight", "exponent" default to 1, 1 and 2; "kill", "boundary"
/// and "defaults" may be omitted.
struct ProblemFile {
  std::string version = "1";
  EnergySpec spec;
  ProblemDefaults defaults;
};

/// Throws ParseError (with line and column) on malformed text, and
/// ParameterError / StructuralError naming the offending record otherwise.
ProblemFile parse_problem(const std::string& text);

/// Canonical form: every optional record field written out, fixed key order.
std::string serialize_problem(const ProblemFile& problem);

ProblemFile load_problem(const std::string& path);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace ndf
