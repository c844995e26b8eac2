#pragma once

#include <stdexcept>
#include <string>

namespace pacsw {

// Malformed or inconsistent external input (files, configs).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure at runtime (non-convergence, non-finite values).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pacsw
