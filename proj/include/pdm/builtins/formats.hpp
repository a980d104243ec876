#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace pdm::builtins {

// Data-driven navigation descriptor: field atoms map to dot-separated paths
// into a credential document tree ("claims.organization_type", "additional.0").
struct FormatDescriptor {
  std::string name;
  std::vector<std::string> required;  // field atoms that must resolve
  std::map<std::string, std::string> field_paths;
};

class FormatStore {
 public:
  static FormatStore from_json(const nlohmann::json& doc);
  static FormatStore from_file(const std::string& path);
  // Descriptors for the presentation/credential documents this project
  // ships; identical content to the bundled formats.json.
  static FormatStore bundled();

  const FormatDescriptor* find(const std::string& name) const;

 private:
  std::map<std::string, FormatDescriptor> formats_;
};

// Resolves a dot path inside a JSON document; nullopt when any segment is
// missing. Digit segments index arrays.
std::optional<nlohmann::json> resolve_path(const nlohmann::json& doc,
                                           const std::string& path);

}  // namespace pdm::builtins
