#pragma once

#include <stdexcept>
#include <string>

namespace mortem {

/// Raised for malformed input data or violated preconditions on user data.
/// The CLI maps it to exit status 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mortem
