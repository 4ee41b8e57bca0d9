#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sform {

// Base class for every condition this library raises on purpose.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
  ParseError(std::size_t offset, std::string expected)
      : Error("parse error at offset " + std::to_string(offset) + ": expected " + expected),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

private:
  std::size_t offset_;
  std::string expected_;
};

class UnboundVariableError : public Error {
public:
  explicit UnboundVariableError(std::string name)
      : Error("unbound variable '" + name + "'"), name_(std::move(name)) {}

  const std::string& name() const { return name_; }

private:
  std::string name_;
};

class DomainError : public Error {
public:
  DomainError(std::string function, double value)
      : Error("domain error: " + function + " of " + std::to_string(value)),
        function_(std::move(function)),
        value_(value) {}

  const std::string& function() const { return function_; }
  double value() const { return value_; }

private:
  std::string function_;
  double value_;
};

// Exact rational arithmetic left the representable range.
class ExpressionOverflowError : public Error {
public:
  using Error::Error;
};

class ChartMismatchError : public Error {
public:
  using Error::Error;
};

class DegreeOverflowError : public Error {
public:
  using Error::Error;
};

class WrongDegreeError : public Error {
public:
  using Error::Error;
};

class NoMetricError : public Error {
public:
  using Error::Error;
};

class NotClosedError : public Error {
public:
  using Error::Error;
};

class QuadratureFailureError : public Error {
public:
  using Error::Error;
};

class InvalidProblemError : public Error {
public:
  using Error::Error;
};

class NewtonDivergenceError : public Error {
public:
  explicit NewtonDivergenceError(std::size_t sample_index)
      : Error("Newton iteration diverged at strip sample " + std::to_string(sample_index)),
        sample_index_(sample_index) {}

  std::size_t sample_index() const { return sample_index_; }

private:
  std::size_t sample_index_;
};

class OverdeterminedStripError : public Error {
public:
  using Error::Error;
};

// Numeric evaluation failed while integrating; carries trajectory context.
class EvaluationError : public Error {
public:
  using Error::Error;
};

class InsufficientTrajectoriesError : public Error {
public:
  using Error::Error;
};

class UnsupportedDimensionError : public Error {
public:
  using Error::Error;
};

class OutsideCoverageError : public Error {
public:
  explicit OutsideCoverageError(std::vector<double> point)
      : Error("query point outside trajectory coverage"), point_(std::move(point)) {}

  const std::vector<double>& point() const { return point_; }

private:
  std::vector<double> point_;
};

class GridTooSmallError : public Error {
public:
  using Error::Error;
};

class MissingPsiError : public Error {
public:
  using Error::Error;
};

// Line-anchored error for the text file formats read by the CLI.
class FormatError : public Error {
public:
  FormatError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

}  // namespace sform
