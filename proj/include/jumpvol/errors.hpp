#pragma once

#include <stdexcept>
#include <string>

namespace jumpvol
{

// Invalid parameters or configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

// Too few observations for the requested statistic.
class InsufficientDataError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

// Data or inference that cannot produce a usable posterior (CLI exit code 4).
class DegenerateError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// e.g. all increments zero, so the MLE vanishes.
class DegenerateDataError : public DegenerateError
{
  public:
    using DegenerateError::DegenerateError;
};

// Temperature below its floor, or a nonpositive shifted center.
class DegenerateInferenceError : public DegenerateError
{
  public:
    using DegenerateError::DegenerateError;
};

// A root finder or integrator failed to reach its tolerance.
class NumericError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition (e.g. an unnormalized density).
class ContractViolation : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

class IoError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace jumpvol
