#include "pdm/builtins/registry.hpp"

#include <regex>

#include "pdm/error.hpp"

namespace pdm::builtins {

using tpl::BuiltinOutcome;
using tpl::DocumentStore;
using tpl::Term;

namespace {

bool text_like(const Term& t) {
  return t.kind() == Term::Kind::Atom || t.kind() == Term::Kind::Text;
}

const std::string& spelling(const Term& t) {
  return t.kind() == Term::Kind::Atom ? t.name() : t.text_value();
}

// Resolves a field through the handle's bound format. nullopt: plain failure.
std::optional<nlohmann::json> extract_field(const FormatStore& formats,
                                            DocumentStore& docs, int handle,
                                            const std::string& field) {
  const auto& bound = docs.format(handle);
  if (!bound) {
    throw Error("FormatNotSet",
                "extract on handle " + std::to_string(handle) +
                    " before set_format");
  }
  const FormatDescriptor* desc = formats.find(*bound);
  if (desc == nullptr) return std::nullopt;
  auto path = desc->field_paths.find(field);
  if (path == desc->field_paths.end()) return std::nullopt;
  return resolve_path(docs.doc(handle), path->second);
}

}  // namespace

Term json_to_term(const nlohmann::json& value, DocumentStore& docs) {
  if (value.is_string()) return Term::text(value.get<std::string>());
  if (value.is_number_integer()) {
    return Term::integer(tpl::Int(value.get<std::int64_t>()));
  }
  if (value.is_object() || value.is_array()) {
    return DocumentStore::handle_term(docs.add(value));
  }
  throw Error("UnsupportedValue",
              "cannot represent JSON value of this type as a term");
}

tpl::BuiltinRegistry make_standard_registry(
    std::shared_ptr<const FormatStore> formats,
    std::shared_ptr<TrustServices> services) {
  tpl::BuiltinRegistry reg;

  reg.add("set_format", 2,
          [formats](const std::vector<Term>& args, DocumentStore& docs) {
            auto handle = DocumentStore::as_handle(args[0]);
            if (!handle || !text_like(args[1])) return BuiltinOutcome::fail();
            const std::string& name = spelling(args[1]);
            const FormatDescriptor* desc = formats->find(name);
            if (desc == nullptr) {
              throw Error("UnknownFormat", "no format descriptor '" + name +
                                               "'");
            }
            const nlohmann::json& doc = docs.doc(*handle);
            for (const std::string& field : desc->required) {
              if (!resolve_path(doc, desc->field_paths.at(field))) {
                return BuiltinOutcome::fail();
              }
            }
            docs.bind_format(*handle, name);
            return BuiltinOutcome::ok();
          });

  reg.add("extract", 3,
          [formats](const std::vector<Term>& args, DocumentStore& docs) {
            auto handle = DocumentStore::as_handle(args[0]);
            if (!handle || args[1].kind() != Term::Kind::Atom) {
              return BuiltinOutcome::fail();
            }
            auto value = extract_field(*formats, docs, *handle,
                                       args[1].name());
            if (!value) return BuiltinOutcome::fail();
            return BuiltinOutcome::ok_bind(2, json_to_term(*value, docs));
          });

  reg.add("check_eIDAS_qualified", 1,
          [services](const std::vector<Term>& args, DocumentStore&) {
            if (!text_like(args[0])) return BuiltinOutcome::fail();
            return services->is_eidas_qualified(spelling(args[0]))
                       ? BuiltinOutcome::ok()
                       : BuiltinOutcome::fail();
          });

  reg.add("check_not_revoked", 1,
          [formats, services](const std::vector<Term>& args,
                              DocumentStore& docs) {
            auto handle = DocumentStore::as_handle(args[0]);
            if (!handle) return BuiltinOutcome::fail();
            auto id = extract_field(*formats, docs, *handle, "credential_id");
            if (!id || !id->is_string()) return BuiltinOutcome::fail();
            return services->is_revoked(id->get<std::string>())
                       ? BuiltinOutcome::fail()
                       : BuiltinOutcome::ok();
          });

  reg.add("resolve_subject", 2,
          [services](const std::vector<Term>& args, DocumentStore& docs) {
            if (!text_like(args[0])) return BuiltinOutcome::fail();
            const std::string& did = spelling(args[0]);
            static const std::regex kDid(R"(^did:[a-z0-9]+:.+$)");
            if (!std::regex_match(did, kDid)) {
              throw Error("InvalidIdentifier",
                          "'" + did + "' is not a did:<method>:<id> string");
            }
            nlohmann::json doc = services->resolve_did(did);
            return BuiltinOutcome::ok_bind(
                1, DocumentStore::handle_term(docs.add(std::move(doc))));
          });

  return reg;
}

}  // namespace pdm::builtins
