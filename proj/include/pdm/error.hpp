#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pdm {

// All failures that cross a module boundary carry a stable machine-readable
// code (the same strings appear in HTTP error envelopes) plus a human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace pdm
