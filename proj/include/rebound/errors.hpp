/*
 * Exception hierarchy shared by the library and the CLI.
 *
 * Each category maps onto one process exit code of the `rebound` tool.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace rebound {

/// Invalid configuration or arguments (exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input data that violates a precondition (exit code 3).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Optimizer or linear-algebra failure (exit code 4).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace rebound
