#pragma once

#include <stdexcept>
#include <string>

namespace reann {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable file, wrong column count, unknown category, bad config syntax.
class MalformedInput : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Raised by clustering when even the smallest epsilon misses the accuracy floor.
class NoFeasibleEpsilon : public Error {
 public:
  using Error::Error;
};

}  // namespace reann
