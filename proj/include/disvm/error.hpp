#pragma once

#include <stdexcept>
#include <string>

namespace disvm {

// Malformed inputs: shape mismatches, out-of-range parameters.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Dataset contents violate the schema or dataset invariants.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleProblem : public SolverError {
 public:
  using SolverError::SolverError;
};

class NotConverged : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace disvm
