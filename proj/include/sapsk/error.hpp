#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sapsk {

// Domain error with a stable machine-readable code (e.g. "NonDividingGamma")
// in front of the human-readable message.  The CLI maps these to a nonzero
// exit status distinct from usage errors.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace sapsk
