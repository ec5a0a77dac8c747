#pragma once

#include <stdexcept>
#include <string>

namespace structrec {

// Base of every error the library throws. The CLI maps subclasses to exit
// codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed token sequence, tree text, trace state or expression.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A precondition on a value was violated (n = 0 for bin_pos, bad range, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Reduction ran out of its level budget.
class FuelExhausted : public Error {
 public:
  using Error::Error;
};

// Reduction reached a state with no redex that is not in normal form.
class StuckError : public Error {
 public:
  using Error::Error;
};

// Two simultaneously fired ASM updates disagree on one location.
class UpdateClash : public Error {
 public:
  using Error::Error;
};

// ASM / RASM run exceeded its step budget.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// JSONL line that does not follow the record schema.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Prediction and gold sets do not share the same ids.
class IdMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace structrec
