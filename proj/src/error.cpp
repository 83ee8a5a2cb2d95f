#include "qgrad/error.hpp"

namespace qgrad {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_dimension: return "invalid-dimension";
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::invalid_table: return "invalid-table";
    case ErrorKind::domain_error: return "domain-error";
    case ErrorKind::mesh_mismatch: return "mesh-mismatch";
    case ErrorKind::singular_system: return "singular-system";
    case ErrorKind::max_iterations: return "max-iterations";
    case ErrorKind::breakdown: return "breakdown";
    case ErrorKind::unsupported_transform: return "unsupported-transform";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace qgrad
