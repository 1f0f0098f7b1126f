#pragma once

#include <stdexcept>
#include <string>

namespace ldsignal {

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Weights that sum to zero, or a zero leading weight where one is required.
class DegenerateSchemeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ResolutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BasisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// tau <= z: the lower-tail Chernoff bound is vacuous.
class NoGapError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NotACounterexampleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace ldsignal
