#pragma once

#include <stdexcept>
#include <string>

namespace shiftlab {

/// Malformed or inconsistent input data (bad CSV cells, label ranges, shapes).
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An optimizer or solver produced a non-finite or non-converged result.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument combination supplied by a caller.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace shiftlab
