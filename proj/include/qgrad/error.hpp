#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace qgrad {

enum class ErrorKind {
  invalid_dimension,
  invalid_spec,
  invalid_table,
  domain_error,
  mesh_mismatch,
  singular_system,
  max_iterations,
  breakdown,
  unsupported_transform,
  io_error,
};

const char* to_string(ErrorKind kind) noexcept;

/// Library-wide exception. `node()` carries the offending mesh node when the
/// failure is local to one (e.g. a nonpositive value under a singular g).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<std::size_t> node = std::nullopt)
      : std::runtime_error(what), kind_(kind), node_(node) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> node() const noexcept { return node_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> node_;
};

}  // namespace qgrad
