#include "pdm/builtins/formats.hpp"

#include <fstream>
#include <sstream>

#include "pdm/error.hpp"

namespace pdm::builtins {

FormatStore FormatStore::from_json(const nlohmann::json& doc) {
  FormatStore store;
  if (!doc.is_object()) {
    throw Error("InvalidFormats", "format descriptor file must be an object");
  }
  for (const auto& [name, body] : doc.items()) {
    FormatDescriptor d;
    d.name = name;
    if (body.contains("required")) {
      for (const auto& f : body.at("required")) {
        d.required.push_back(f.get<std::string>());
      }
    }
    for (const auto& [field, path] : body.at("fields").items()) {
      d.field_paths[field] = path.get<std::string>();
    }
    for (const std::string& f : d.required) {
      if (d.field_paths.count(f) == 0) {
        throw Error("InvalidFormats", "format '" + name +
                                          "' requires unmapped field '" + f +
                                          "'");
      }
    }
    store.formats_[name] = std::move(d);
  }
  return store;
}

FormatStore FormatStore::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("InvalidFormats", "cannot open " + path);
  nlohmann::json doc;
  in >> doc;
  return from_json(doc);
}

FormatStore FormatStore::bundled() {
  static const char* kBundled = R"({
    "w3c_verifiablePresentation": {
      "required": ["mainCredential", "challenge", "holder_signature"],
      "fields": {
        "mainCredential": "mainCredential",
        "additional": "additional",
        "challenge": "challenge",
        "holder_signature": "holder_signature"
      }
    },
    "w3c_verifiableCredential": {
      "required": ["id", "subject", "issuer", "claims", "verification_key",
                   "encryption_key", "issuer_signature"],
      "fields": {
        "id": "id",
        "credential_id": "id",
        "subject": "subject",
        "issuer": "issuer",
        "claims": "claims",
        "verification_key": "verification_key",
        "encryption_key": "encryption_key",
        "issuer_signature": "issuer_signature",
        "organization_type": "claims.organization_type",
        "organization_name": "claims.organization_name",
        "research_field": "claims.research_field",
        "country": "claims.country",
        "member_count": "claims.member_count"
      }
    }
  })";
  return from_json(nlohmann::json::parse(kBundled));
}

const FormatDescriptor* FormatStore::find(const std::string& name) const {
  auto it = formats_.find(name);
  return it == formats_.end() ? nullptr : &it->second;
}

std::optional<nlohmann::json> resolve_path(const nlohmann::json& doc,
                                           const std::string& path) {
  const nlohmann::json* cur = &doc;
  std::istringstream segments(path);
  std::string seg;
  while (std::getline(segments, seg, '.')) {
    if (cur->is_object()) {
      auto it = cur->find(seg);
      if (it == cur->end()) return std::nullopt;
      cur = &*it;
    } else if (cur->is_array()) {
      size_t idx = 0;
      try {
        idx = std::stoul(seg);
      } catch (...) {
        return std::nullopt;
      }
      if (idx >= cur->size()) return std::nullopt;
      cur = &(*cur)[idx];
    } else {
      return std::nullopt;
    }
  }
  return *cur;
}

}  // namespace pdm::builtins
