#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace specgeo {

/// Machine-readable failure category. Every exception thrown by the library
/// carries one; the verification runner maps it onto a skip reason.
enum class ErrorCode {
  syntax,
  unknown_variable,
  pole_hit,
  branch_point,
  not_regular,
  newton_diverged,
  step_too_large,
  degenerate_form,
  spec_invalid,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::syntax: return "SyntaxError";
    case ErrorCode::unknown_variable: return "UnknownVariable";
    case ErrorCode::pole_hit: return "PoleHit";
    case ErrorCode::branch_point: return "BranchPoint";
    case ErrorCode::not_regular: return "NotRegular";
    case ErrorCode::newton_diverged: return "NewtonDiverged";
    case ErrorCode::step_too_large: return "StepTooLarge";
    case ErrorCode::degenerate_form: return "DegenerateForm";
    case ErrorCode::spec_invalid: return "SpecInvalid";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error(ErrorCode::syntax,
              "syntax error at " + std::to_string(position) + ": " + message),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownVariable : public Error {
 public:
  UnknownVariable(std::size_t position, int index, int n)
      : Error(ErrorCode::unknown_variable,
              "variable z" + std::to_string(index) + " at " +
                  std::to_string(position) + " exceeds dimension " +
                  std::to_string(n)),
        index_(index) {}
  int index() const noexcept { return index_; }

 private:
  int index_;
};

/// Division by zero or log(0) during jet evaluation.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class NotRegular : public Error {
 public:
  explicit NotRegular(const std::string& what)
      : Error(ErrorCode::not_regular, what) {}
};

class NewtonDiverged : public Error {
 public:
  explicit NewtonDiverged(const std::string& what)
      : Error(ErrorCode::newton_diverged, what) {}
};

class StepTooLarge : public Error {
 public:
  explicit StepTooLarge(const std::string& what)
      : Error(ErrorCode::step_too_large, what) {}
};

class DegenerateForm : public Error {
 public:
  explicit DegenerateForm(const std::string& what)
      : Error(ErrorCode::degenerate_form, what) {}
};

class SpecInvalid : public Error {
 public:
  explicit SpecInvalid(const std::string& what)
      : Error(ErrorCode::spec_invalid, what) {}
};

}  // namespace specgeo
