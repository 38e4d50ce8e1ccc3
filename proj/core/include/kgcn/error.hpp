#pragma once

#include <stdexcept>
#include <string>

namespace kgcn {

/// Error classes map onto the CLI exit codes: Usage -> 1, Data -> 2,
/// Numeric -> 3.
enum class ErrorKind { Usage, Data, Numeric };

/// Exception carrying a stable, module-qualified error code such as
/// "kernels/dim-mismatch" next to the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, std::string message)
      : std::runtime_error("[" + code + "] " + message),
        code_(std::move(code)),
        message_(std::move(message)),
        kind_(kind) {}

  const std::string& code() const noexcept { return code_; }
  /// Message body without the "[code] " prefix that what() carries.
  const std::string& message() const noexcept { return message_; }
  ErrorKind kind() const noexcept { return kind_; }

 private:
  std::string code_;
  std::string message_;
  ErrorKind kind_;
};

}  // namespace kgcn
