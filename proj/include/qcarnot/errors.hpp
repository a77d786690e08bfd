#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qcarnot {

/// Base of every error raised by the library. `name()` is the stable
/// identifier printed by the CLI on standard error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* name() const noexcept { return "Error"; }
};

class DomainError : public Error {
 public:
  using Error::Error;
  const char* name() const noexcept override { return "DomainError"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* name() const noexcept override { return "ConfigError"; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  const char* name() const noexcept override { return "NumericalError"; }
};

// The trap frequency squared went negative somewhere inside the stroke.
class InvalidProtocol : public Error {
 public:
  InvalidProtocol(const std::string& what, double time)
      : Error(what), time_(time) {}
  const char* name() const noexcept override { return "InvalidProtocol"; }
  double time() const noexcept { return time_; }

 private:
  double time_;
};

// No modified frequency reproduces the requested inverse-temperature rate.
class InfeasibleStroke : public Error {
 public:
  InfeasibleStroke(const std::string& what, double time)
      : Error(what), time_(time) {}
  const char* name() const noexcept override { return "InfeasibleStroke"; }
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class ProtocolInversionFailure : public Error {
 public:
  using Error::Error;
  const char* name() const noexcept override {
    return "ProtocolInversionFailure";
  }
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::vector<double> residuals)
      : Error(what), residuals_(std::move(residuals)) {}
  const char* name() const noexcept override { return "NonConvergence"; }
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

class TruncationError : public Error {
 public:
  using Error::Error;
  const char* name() const noexcept override { return "TruncationError"; }
};

}  // namespace qcarnot
