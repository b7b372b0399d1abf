#pragma once

#include <stdexcept>
#include <string>

namespace qnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value outside the domain of an operation (negative distance, level < 1, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Experiment or generator parameters that cannot be satisfied.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. The message names the file and the offending field.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace qnet
