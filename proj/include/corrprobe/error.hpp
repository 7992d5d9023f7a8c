#pragma once

#include <stdexcept>
#include <string>

namespace corrprobe {

// Bad input data, files, or configuration. Maps to CLI exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical precondition failed (constant input, mismatched lengths, ...).
class DegenerateInput : public InputError {
 public:
  using InputError::InputError;
};

// Model backend could not answer: transport failure, protocol violation,
// missing offline prediction. Maps to exit code 2.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal consistency check failed. Maps to exit code 3.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace corrprobe
