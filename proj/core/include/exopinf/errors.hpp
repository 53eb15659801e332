#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace exopinf {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Right-hand side or time step produced inf/nan. Carries the input state.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, Eigen::VectorXd state)
      : Error(what), state_(std::move(state)) {}
  const Eigen::VectorXd& state() const { return state_; }

 private:
  Eigen::VectorXd state_;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// Requested more modes than the data supports.
class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& what, std::size_t numerical_rank)
      : Error(what), rank_(numerical_rank) {}
  std::size_t numerical_rank() const { return rank_; }

 private:
  std::size_t rank_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), residual_(last_residual) {}
  double last_residual() const { return residual_; }

 private:
  double residual_;
};

/// Malformed input file. line() is 1-based, 0 when not tied to a line.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace exopinf
