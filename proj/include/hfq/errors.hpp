#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hfq {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent user input (DSL text, config).
class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(std::size_t offset, std::string expected, std::string found)
      : InputError("parse error at offset " + std::to_string(offset) + ": expected " + expected +
                   ", found " + found),
        offset_(offset),
        expected_(std::move(expected)),
        found_(std::move(found)) {}

  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  std::size_t offset_;
  std::string expected_;
  std::string found_;
};

class UnknownVariable : public InputError {
 public:
  UnknownVariable(std::size_t offset, std::string name)
      : InputError("unknown variable '" + name + "' at offset " + std::to_string(offset)),
        offset_(offset),
        name_(std::move(name)) {}

  std::size_t offset() const { return offset_; }
  const std::string& name() const { return name_; }

 private:
  std::size_t offset_;
  std::string name_;
};

// Numerical failures: singular Hessians, domain violations, truncation limits.
class MathError : public Error {
 public:
  using Error::Error;
};

class DegenerateHessian : public MathError {
 public:
  using MathError::MathError;
};

class DomainError : public MathError {
 public:
  using MathError::MathError;
};

class JetMismatch : public MathError {
 public:
  using MathError::MathError;
};

class InsufficientJetOrder : public MathError {
 public:
  using MathError::MathError;
};

class NewtonDivergence : public MathError {
 public:
  using MathError::MathError;
};

}  // namespace hfq
