#pragma once

#include <stdexcept>
#include <string>

namespace podlstm {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration values (excitation bounds, model sizes, split counts).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Dimension mismatches and out-of-range arguments.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Malformed, truncated or incompatible files.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Non-finite values, divergence, failed factorizations.
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace podlstm
