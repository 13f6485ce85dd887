#pragma once

#include <stdexcept>
#include <string>

namespace rfvc {

/// Malformed input file (CSV, JSON model, config syntax).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration values.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// No model configuration fits the requested platform budget.
class NoFitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace rfvc
