#pragma once

#include <stdexcept>
#include <string>

namespace ndpmpm {

/// Invalid input: malformed documents, inconsistent data, bad arguments.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation could not be completed (numerical breakdown, caps hit).
class ComputeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ndpmpm
