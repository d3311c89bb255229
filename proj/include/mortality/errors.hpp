#pragma once

#include <stdexcept>
#include <string>

namespace mortality {

// Bad or inconsistent input data (files, windows, panels).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure inside filtering or sampling.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A Gibbs draw that cannot be normalised (e.g. loadings summing to zero).
class DegenerateDraw : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace mortality
