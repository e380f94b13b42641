#pragma once

#include <stdexcept>
#include <string>

namespace latstat {

// Base of every error thrown by the library. Callers that only care about
// "something went wrong" catch this; the CLI maps the subclasses onto exit
// codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arguments outside an operation's domain (M < k, parity mismatch, k >= n, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A structural invariant of an input object does not hold.
class InvariantError : public Error {
 public:
  using Error::Error;
};

// Work would exceed a configured resource cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Numerically (near-)dependent vectors where independence is required.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace latstat
