#pragma once

#include <stdexcept>
#include <string>

namespace nvk {

// Violated mathematical precondition (cutoff mismatch, non-unit inversion, ...).
// The CLI maps this to exit code 1.
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed textual input. The CLI maps this to exit code 2.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nvk
