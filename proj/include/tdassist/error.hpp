#pragma once

#include <stdexcept>
#include <string>

namespace tdassist {

// Base of every error the library raises on bad input. Internal invariant
// violations use std::logic_error instead.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error("parse-error", message) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error("validation-error", message) {}
  ValidationError(std::string code, const std::string& message)
      : Error(std::move(code), message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config-error", message) {}
};

class ConflictError : public Error {
 public:
  explicit ConflictError(const std::string& message) : Error("conflict", message) {}
};

class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& message) : Error("integrity-error", message) {}
};

class MigrationError : public Error {
 public:
  explicit MigrationError(const std::string& message) : Error("migration-error", message) {}
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& message) : Error("not-found", message) {}
};

}  // namespace tdassist
