#pragma once

#include <stdexcept>
#include <string>

namespace inductgcn {

// Base class for every recoverable failure raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed input files (corpus, stopwords, checkpoints).
class ParseError : public Error {
public:
  using Error::Error;
};

// Invalid hyperparameters or flags.
class ConfigError : public Error {
public:
  using Error::Error;
};

// NaN/Inf produced during training or inference.
class NumericError : public Error {
public:
  using Error::Error;
};

} // namespace inductgcn
