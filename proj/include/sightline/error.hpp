#pragma once

#include <stdexcept>
#include <string>

namespace sightline {

/// Bad input: malformed files, unmapped names, out-of-range parameters.
/// The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure during an assessment on otherwise valid input (exit code 1).
class ComputeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sightline
