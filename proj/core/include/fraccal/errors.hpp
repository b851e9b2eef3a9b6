#pragma once

#include <stdexcept>
#include <string>

namespace fraccal {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: geometry, config, parameters out of their admissible ranges.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class GeometryMismatch : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

class CacheError : public Error {
 public:
  using Error::Error;
};

class HashMismatch : public CacheError {
 public:
  using CacheError::CacheError;
};

class VersionMismatch : public CacheError {
 public:
  using CacheError::CacheError;
};

}  // namespace fraccal
