#pragma once

#include <stdexcept>
#include <string>

namespace lcl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent experiment configuration.
struct ConfigError : Error {
  using Error::Error;
};

// Non-finite numbers or invalid numeric operations at runtime.
struct NumericError : Error {
  using Error::Error;
};

// Filesystem and serialization failures.
struct IoError : Error {
  using Error::Error;
};

}  // namespace lcl
