#pragma once

#include <stdexcept>
#include <string>

namespace offlang {

// Errors caused by bad user input (files, flags, config). The CLI maps these
// to exit code 2; everything else is treated as an internal error (exit 1).
struct UserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input file violates the expected schema (missing column, bad magic, ...).
struct SchemaError : UserError {
  using UserError::UserError;
};

// A field failed to parse (unknown label token, malformed JSON, ...).
struct ParseError : UserError {
  using UserError::UserError;
};

// Structurally valid input that breaks a documented invariant
// (duplicate id, empty text, zero class count, ...).
struct ValidationError : UserError {
  using UserError::UserError;
};

}  // namespace offlang
