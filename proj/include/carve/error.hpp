#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace carve {

enum class ErrorKind {
  Schema,       // malformed interchange document
  Integrity,    // structurally valid but inconsistent input (duplicate iid, bad nesting)
  Lookup,       // unknown iid or identifier
  Parse,        // malformed trace line or surface source
  Structure,    // unbalanced trace events
  NotFound,
  Ambiguity,
  Resolution,   // test generation could not bind an identifier
  Usage,
  Io,
  Subprocess,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace carve
