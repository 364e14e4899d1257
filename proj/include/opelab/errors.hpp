#pragma once

#include <stdexcept>
#include <string>

namespace opelab {

/// Wrong table dimensions or otherwise unusable model/policy input.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Out-of-range symbol or wrong sequence length for a history/future id.
class EncodingError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// pi_e puts mass on an action that pi_b never plays.
class ActionCoverageError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Exhaustive enumeration would exceed the configured budget.
class BudgetError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// A covariance-like matrix is too close to singular for the requested solve.
class ConditioningError : public std::runtime_error {
public:
    ConditioningError(const std::string& what, double sigma_min)
        : std::runtime_error(what), sigma_min_(sigma_min) {}
    double sigma_min() const { return sigma_min_; }

private:
    double sigma_min_;
};

/// Bad user configuration (estimator options, study config, CLI values).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file. `line` is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

}  // namespace opelab
