#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rlcm {

// Record or log content violates a schema invariant. `field` names the
// offending field so callers can report exactly one violation.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Malformed input text (JSON line, checkpoint, lexicon file).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset = 0)
      : std::runtime_error(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Bad run configuration (out-of-range key, unknown variant, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rlcm
