#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "json.hpp"
#include "pdm/tpl/term.hpp"

namespace pdm::tpl {

// Per-evaluation table of credential documents addressed by opaque handles.
// Policies receive and pass handles as $doc(i) terms, a spelling the parser
// cannot produce, so policy text can never forge one.
class DocumentStore {
 public:
  int add(nlohmann::json doc);

  const nlohmann::json& doc(int handle) const;  // throws Error("UnknownHandle")
  const std::optional<std::string>& format(int handle) const;
  void bind_format(int handle, std::string format_name);

  static Term handle_term(int handle);
  static std::optional<int> as_handle(const Term& t);

  size_t size() const noexcept { return entries_.size(); }

 private:
  struct Entry {
    nlohmann::json document;
    std::optional<std::string> format;
  };
  const Entry& at(int handle) const;
  std::vector<Entry> entries_;
};

}  // namespace pdm::tpl
