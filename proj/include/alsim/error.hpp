#pragma once

#include <stdexcept>
#include <string>

namespace alsim {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration values (bad dimensions, fractions, priors, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed input files (CSV datasets, checkpoints, config documents).
class FormatError : public Error {
public:
    using Error::Error;
};

// Scenario construction failures (insufficient samples, exclusion violations).
class ScenarioError : public Error {
public:
    using Error::Error;
};

// Violations of the AL protocol (double labeling, unknown ids).
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Training failures (divergence, degenerate inputs).
class TrainError : public Error {
public:
    using Error::Error;
};

// Filesystem failures.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace alsim
