#pragma once

#include <stdexcept>

namespace rfaug {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unrecognized magic or unparsable contents.
struct FormatError : Error {
  using Error::Error;
};

// Declared dimensions disagree with the payload actually present.
struct CorruptError : Error {
  using Error::Error;
};

// Non-finite or out-of-range values.
struct ValueError : Error {
  using Error::Error;
};

struct ArgumentError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct CacheError : Error {
  using Error::Error;
};

}  // namespace rfaug
