#include "pdm/tpl/docstore.hpp"

#include "pdm/error.hpp"

namespace pdm::tpl {

namespace {
constexpr const char* kHandleFunctor = "$doc";
}

int DocumentStore::add(nlohmann::json doc) {
  entries_.push_back(Entry{std::move(doc), std::nullopt});
  return static_cast<int>(entries_.size()) - 1;
}

const DocumentStore::Entry& DocumentStore::at(int handle) const {
  if (handle < 0 || static_cast<size_t>(handle) >= entries_.size()) {
    throw Error("UnknownHandle", "no document " + std::to_string(handle));
  }
  return entries_[static_cast<size_t>(handle)];
}

const nlohmann::json& DocumentStore::doc(int handle) const {
  return at(handle).document;
}

const std::optional<std::string>& DocumentStore::format(int handle) const {
  return at(handle).format;
}

void DocumentStore::bind_format(int handle, std::string format_name) {
  at(handle);  // bounds check
  entries_[static_cast<size_t>(handle)].format = std::move(format_name);
}

Term DocumentStore::handle_term(int handle) {
  return Term::compound(kHandleFunctor, {Term::integer(Int(handle))});
}

std::optional<int> DocumentStore::as_handle(const Term& t) {
  if (t.kind() != Term::Kind::Compound || t.name() != kHandleFunctor ||
      t.args().size() != 1 ||
      t.args()[0].kind() != Term::Kind::Integer) {
    return std::nullopt;
  }
  return static_cast<int>(t.args()[0].integer_value());
}

}  // namespace pdm::tpl
