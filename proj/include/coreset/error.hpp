#pragma once

#include <stdexcept>
#include <string>

namespace coreset {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  validation = 2,  // malformed input, bad argument, I/O failure
  capability = 3,  // method needs a field the artifact does not carry
  numerical = 4,   // NaN loss, singular system, degenerate data
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class CapabilityError : public Error {
 public:
  explicit CapabilityError(const std::string& what) : Error(ErrorKind::capability, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

}  // namespace coreset
