#pragma once

#include <stdexcept>
#include <string>

namespace qtwist {

// Error categories double as CLI exit codes.
enum class ErrorKind : int {
  Internal = 1,
  Usage = 2,
  Config = 3,
  Capacity = 4,
  Fixture = 5,
  Data = 6,
  Domain = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

/// Input outside an operation's mathematical domain (pole, bad prime, (0,0) symbol, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& what) : Error(ErrorKind::Capacity, what) {}
};

/// Malformed or inconsistent curve fixture (conductor, overrides, minimality).
class FixtureError : public Error {
 public:
  explicit FixtureError(const std::string& what) : Error(ErrorKind::Fixture, what) {}
};

/// Parse/validation failure in an ingested data file.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

}  // namespace qtwist
