#pragma once

#include <stdexcept>
#include <string>

namespace gfmswing {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed argument to an operation (unknown enum name, zero vector, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// A physical invariant is violated; carries the name of the offending parameter.
class DomainError : public Error {
 public:
  DomainError(std::string parameter, const std::string& what)
      : Error(parameter + ": " + what), parameter_(std::move(parameter)) {}
  const std::string& parameter() const noexcept { return parameter_; }

 private:
  std::string parameter_;
};

// Inconsistent configuration: singular network, non-convergent initialization.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An operation was called outside its documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Failure inside a time-domain run; carries the simulation time.
class SimulationFault : public Error {
 public:
  SimulationFault(double t, const std::string& what)
      : Error("t=" + std::to_string(t) + " s: " + what), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

// Scenario document does not match the schema; carries key path and line.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, int line, const std::string& what)
      : Error(format(path, line, what)), path_(std::move(path)), line_(line) {}
  const std::string& path() const noexcept { return path_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& path, int line, const std::string& what) {
    std::string s = "schema error";
    if (!path.empty()) s += " at '" + path + "'";
    if (line > 0) s += " (line " + std::to_string(line) + ")";
    return s + ": " + what;
  }
  std::string path_;
  int line_;
};

// CCT bisection bracket does not straddle the requested boundary.
class BracketError : public Error {
 public:
  using Error::Error;
};

}  // namespace gfmswing
