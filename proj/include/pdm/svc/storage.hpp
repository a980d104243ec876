#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>

#include "pdm/svc/http_service.hpp"

namespace pdm::svc {

struct StorageConfig {
  std::uint64_t max_blob_bytes = 64ULL * 1024 * 1024;
  nlohmann::json trustlist = {{"scheme", "eIDAS"},
                              {"qualified", nlohmann::json::array()}};
  nlohmann::json revocation = {{"revoked", nlohmann::json::array()}};
  nlohmann::json dids = nlohmann::json::object();  // did -> document

  static StorageConfig from_file(const std::string& path);
};

// Mock public cloud: a content-addressed blob store plus the trust-status,
// revocation and DID registries the policy built-ins consult.
//
//   PUT  /blobs                -> {id, url}
//   GET  /blobs/{id}
//   GET  /trustlist/eidas
//   GET  /revocation
//   POST /admin/revoke         {"credential_id": "..."}
//   GET  /did/{id}
//   POST /admin/did            {"id": "...", "document": {...}}
class StorageService : public HttpService {
 public:
  explicit StorageService(StorageConfig config = {});

  // Direct store access for in-process callers and tests.
  std::string put_blob(const std::string& content);  // returns blob id
  void corrupt_blob_for_test(const std::string& id, std::string content);

 private:
  void install_routes();

  StorageConfig config_;
  std::mutex mu_;
  std::unordered_map<std::string, std::string> blobs_;
};

}  // namespace pdm::svc
