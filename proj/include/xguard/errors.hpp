#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xguard {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed tree: cycles, multiple parents, children under leaves.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t position)
      : Error("syntax error at position " + std::to_string(position) + ": " + message),
        message_(message),
        position_(position) {}

  const std::string& message() const noexcept { return message_; }
  std::size_t position() const noexcept { return position_; }

 private:
  std::string message_;
  std::size_t position_;
};

// A precondition of an operation was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// The input uses features outside the fragment an algorithm supports.
class UnsupportedFragment : public Error {
 public:
  using Error::Error;
};

// A configured enumeration cap would be exceeded.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& message, unsigned long long required, unsigned long long limit)
      : Error(message + " (required " + std::to_string(required) + ", limit " +
              std::to_string(limit) + ")"),
        required_(required),
        limit_(limit) {}

  unsigned long long required() const noexcept { return required_; }
  unsigned long long limit() const noexcept { return limit_; }

 private:
  unsigned long long required_;
  unsigned long long limit_;
};

}  // namespace xguard
