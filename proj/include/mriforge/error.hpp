#pragma once

#include <stdexcept>
#include <string>

namespace mriforge {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition or malformed input (CLI maps this to exit code 2).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

// A numeric operation left its mathematical domain, e.g. a fractional power
// of a negative SSIM component.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace mriforge
