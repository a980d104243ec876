#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "pdm/error.hpp"
#include "pdm/tpl/term.hpp"

namespace pdm::tpl {

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, int line, int column)
      : Error("SyntaxError", message + " at line " + std::to_string(line) +
                                 ", column " + std::to_string(column)),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

// Parses a policy from TPL source. When entry is not given, the policy must
// define accept/3; throws Error("MissingEntryPoint") otherwise. Clause order
// is preserved exactly.
Policy parse_policy(std::string_view source, std::string id,
                    std::optional<EntryPoint> entry = std::nullopt);

// Parses a single term (e.g. a query goal) followed by optional '.'.
Term parse_term(std::string_view source);

}  // namespace pdm::tpl
