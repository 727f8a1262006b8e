#include "carve/error.hpp"

namespace carve {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Schema: return "schema error";
    case ErrorKind::Integrity: return "integrity error";
    case ErrorKind::Lookup: return "lookup error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Structure: return "structure error";
    case ErrorKind::NotFound: return "not found";
    case ErrorKind::Ambiguity: return "ambiguity error";
    case ErrorKind::Resolution: return "resolution failure";
    case ErrorKind::Usage: return "usage error";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::Subprocess: return "subprocess error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace carve
