#pragma once

#include <stdexcept>
#include <string>

namespace tcm {

/// Base of every error thrown by the library. `kind()` names the category so
/// the CLI can print it without RTTI games.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what);
  const char* kind() const noexcept { return kind_.c_str(); }

 private:
  std::string kind_;
};

// Input shorter than an operation needs (window, frame, block).
struct LengthError : Error {
  explicit LengthError(const std::string& w) : Error("length error", w) {}
};

// Non-finite or otherwise unusable sample data.
struct DataError : Error {
  explicit DataError(const std::string& w) : Error("data error", w) {}
};

// A configuration value outside its allowed range.
struct ParameterError : Error {
  explicit ParameterError(const std::string& w) : Error("parameter error", w) {}
};

// Mismatched dimensions between arrays, models and inputs.
struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error("shape error", w) {}
};

// Malformed file contents.
struct FormatError : Error {
  explicit FormatError(const std::string& w) : Error("format error", w) {}
};

// Feature columns of an input do not match what a model was trained on.
struct SchemaError : Error {
  explicit SchemaError(const std::string& w) : Error("schema error", w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error("I/O error", w) {}
};

struct TrainingError : Error {
  explicit TrainingError(const std::string& w) : Error("training error", w) {}
};

}  // namespace tcm
