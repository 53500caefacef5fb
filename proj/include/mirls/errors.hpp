#pragma once

#include <stdexcept>
#include <string>

namespace mirls {

// Shapes of the arguments do not fit together.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented invariant of a state object was violated (corrupted input).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Overflow / NaN detected inside an iterative routine.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested sample size can never satisfy the row/column coverage bound.
class CoverageInfeasible : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Coverage is possible in principle but no draw met it within the budget.
class CoverageUnattainable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mirls
