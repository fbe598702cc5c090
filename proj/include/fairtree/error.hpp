#pragma once

#include <stdexcept>
#include <string>

namespace fairtree {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CSV, schema, dataset file).
class DataError : public Error {
public:
    using Error::Error;
};

/// Malformed model document or a model incompatible with its input.
class ModelError : public Error {
public:
    using Error::Error;
};

/// Invalid parameters handed to an operation.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace fairtree
