#pragma once

#include <stdexcept>
#include <string>

namespace fpfv {

/// Bad user input: malformed files, invalid configuration, unusable data.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed: solver breakdown, non-convergence, overflow.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A structural check on a mesh or a result failed.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fpfv
