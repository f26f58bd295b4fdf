#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace liesym {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownNameError : public Error {
 public:
  explicit UnknownNameError(const std::string& name)
      : Error("unknown name '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class ArityError : public Error {
 public:
  using Error::Error;
};

/// Raised by polynomial collection; carries the printed offending subterm.
class NotPolynomialError : public Error {
 public:
  NotPolynomialError(const std::string& symbol, const std::string& subterm)
      : Error("expression is not polynomial in '" + symbol + "': offending subterm " + subterm),
        subterm_(subterm) {}
  const std::string& subterm() const { return subterm_; }

 private:
  std::string subterm_;
};

/// The split system lies outside the constant-coefficient solver class.
class OutOfClassError : public Error {
 public:
  using Error::Error;
};

/// Lie-equation integration produced a non-finite state.
class FlowBlowUpError : public Error {
 public:
  FlowBlowUpError(const std::string& what, double reached)
      : Error(what + " (group parameter reached " + std::to_string(reached) + ")"),
        reached_(reached) {}
  double reached() const { return reached_; }

 private:
  double reached_;
};

/// A time-change rate (Xi_t or eta^2) was not strictly positive.
class NonPositiveRateError : public Error {
 public:
  using Error::Error;
};

/// A transformation was evaluated outside its real domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Least-squares design matrix lost rank.
class RegressionError : public Error {
 public:
  RegressionError(const std::string& what, std::size_t time_index)
      : Error(what + " at time index " + std::to_string(time_index)), time_index_(time_index) {}
  std::size_t time_index() const { return time_index_; }

 private:
  std::size_t time_index_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace liesym
