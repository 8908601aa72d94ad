#pragma once

#include <stdexcept>
#include <string>

namespace qa {

/// Base exception for every recoverable failure in the toolkit. The kind is a
/// short machine-readable tag ("format", "shape", "version", ...) that the CLI
/// reports alongside the message.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

}  // namespace qa
