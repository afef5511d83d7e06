#pragma once

#include <stdexcept>
#include <string>

namespace cmdp {

/// Bad input to an operation: malformed model, out-of-range parameter, etc.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The constraint cannot be met by any policy (or the estimated slack is negative).
class InfeasibleError : public std::runtime_error {
  public:
    explicit InfeasibleError(const std::string& what, double slack = 0.0)
        : std::runtime_error(what), slack_(slack) {}

    /// Estimated (or exact) constraint slack max_pi J_c - b, <= 0 here.
    double slack() const noexcept { return slack_; }

  private:
    double slack_;
};

/// An internal numerical routine failed (LP unbounded, iteration cap hit, ...).
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Experiment configuration failed validation.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace cmdp
