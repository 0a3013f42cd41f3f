#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace ndf {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fields or sets that do not fit the measure space they are used with.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// An argument outside its documented range (negative weight, p < 1, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A field outside the effective domain, or an infeasible constraint set.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An operation whose precondition (e.g. subcriticality) does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The iterative solver hit its iteration cap; carries the best iterate.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, Eigen::VectorXd best, double residual)
      : Error(what), best_(std::move(best)), residual_(residual) {}

  const Eigen::VectorXd& best_iterate() const { return best_; }
  double residual() const { return residual_; }

 private:
  Eigen::VectorXd best_;
  double residual_;
};

/// Malformed problem text; carries the 1-based position of the fault.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A limit that neither converged nor diverged within the allotted schedule.
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

}  // namespace ndf
