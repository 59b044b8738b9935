#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nnscit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or non-finite values.
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// Sample sizes below what an operation needs.
class TooFewSamplesError : public Error {
 public:
  using Error::Error;
};

/// Mismatched lengths or feature dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values or keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failure inside one Monte Carlo repetition; carries the 1-based index.
class RepetitionError : public Error {
 public:
  RepetitionError(std::size_t repetition, const std::string& what)
      : Error("repetition " + std::to_string(repetition) + ": " + what), repetition_(repetition) {}
  std::size_t repetition() const { return repetition_; }

 private:
  std::size_t repetition_;
};

/// Operation not available for the requested model family.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace nnscit
