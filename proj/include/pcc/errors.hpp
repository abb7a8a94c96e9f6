#pragma once

#include <stdexcept>
#include <string>

namespace pcc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: invalid spec fields, malformed config, geometry violations.
struct ConfigError : Error {
  using Error::Error;
};

// Runtime numerical failure: root finding, non-convergence, ill-posed input data.
struct NumericError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace pcc
