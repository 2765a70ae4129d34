#pragma once

#include <stdexcept>
#include <string>

namespace pnnsr {

/// Base for every runtime failure raised by the library. Invalid arguments
/// (violated preconditions) are reported with std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A text or binary file did not match its documented format.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace pnnsr
