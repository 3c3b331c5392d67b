#pragma once

#include <stdexcept>
#include <string>

namespace synql {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (JSON, SQL, config files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Internal invariant violation; indicates a bug, never bad user input.
class InternalError : public Error {
 public:
  using Error::Error;
};

class DbError : public Error {
 public:
  DbError(const std::string& what, bool connection_lost = false)
      : Error(what), connection_lost_(connection_lost) {}

  bool connection_lost() const noexcept { return connection_lost_; }

 private:
  bool connection_lost_;
};

}  // namespace synql
