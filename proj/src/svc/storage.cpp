#include "pdm/svc/storage.hpp"

#include <fstream>

#include "pdm/crypto/suite.hpp"
#include "pdm/error.hpp"

namespace pdm::svc {

StorageConfig StorageConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("ConfigError", "cannot open " + path);
  nlohmann::json doc;
  in >> doc;
  StorageConfig cfg;
  cfg.max_blob_bytes = doc.value("max_blob_bytes", cfg.max_blob_bytes);
  if (doc.contains("trustlist")) cfg.trustlist = doc["trustlist"];
  if (doc.contains("revocation")) cfg.revocation = doc["revocation"];
  if (doc.contains("dids")) cfg.dids = doc["dids"];
  return cfg;
}

StorageService::StorageService(StorageConfig config)
    : config_(std::move(config)) {
  server_.set_payload_max_length(config_.max_blob_bytes + 4096);
  install_routes();
}

std::string StorageService::put_blob(const std::string& content) {
  if (content.size() > config_.max_blob_bytes) {
    throw Error("TooLarge", "blob exceeds " +
                                std::to_string(config_.max_blob_bytes) +
                                " bytes");
  }
  std::string id = crypto::sha256_hex(content);
  std::lock_guard lock(mu_);
  blobs_.emplace(id, content);  // idempotent by content address
  return id;
}

void StorageService::corrupt_blob_for_test(const std::string& id,
                                           std::string content) {
  std::lock_guard lock(mu_);
  blobs_[id] = std::move(content);
}

void StorageService::install_routes() {
  server_.Put("/blobs", [this](const httplib::Request& req,
                               httplib::Response& res) {
    if (req.body.size() > config_.max_blob_bytes) {
      reply_error(res, 413, "TooLarge", "blob exceeds the configured maximum");
      return;
    }
    std::string id = put_blob(req.body);
    reply_json(res, 200, {{"id", id}, {"url", base_url() + "/blobs/" + id}});
  });

  server_.Get(R"(/blobs/([0-9a-f]+))", [this](const httplib::Request& req,
                                              httplib::Response& res) {
    const std::string id = req.matches[1];
    std::string content;
    {
      std::lock_guard lock(mu_);
      auto it = blobs_.find(id);
      if (it == blobs_.end()) {
        reply_error(res, 404, "NotFound", "no blob " + id);
        return;
      }
      content = it->second;
    }
    // Self-verifying fetch: a store whose bytes no longer match their
    // address is reported, not served.
    if (crypto::sha256_hex(content) != id) {
      reply_error(res, 500, "IntegrityError", "stored bytes hash mismatch");
      return;
    }
    res.status = 200;
    res.set_content(content, "application/octet-stream");
  });

  server_.Get("/trustlist/eidas",
              [this](const httplib::Request&, httplib::Response& res) {
                std::lock_guard lock(mu_);
                reply_json(res, 200, config_.trustlist);
              });

  server_.Get("/revocation",
              [this](const httplib::Request&, httplib::Response& res) {
                std::lock_guard lock(mu_);
                reply_json(res, 200, config_.revocation);
              });

  server_.Post("/admin/revoke", [this](const httplib::Request& req,
                                       httplib::Response& res) {
    try {
      auto doc = nlohmann::json::parse(req.body);
      std::lock_guard lock(mu_);
      config_.revocation["revoked"].push_back(
          doc.at("credential_id").get<std::string>());
      reply_json(res, 200, {{"ok", true}});
    } catch (const std::exception& e) {
      reply_error(res, 400, "MalformedRequest", e.what());
    }
  });

  server_.Get(R"(/did/(.+))", [this](const httplib::Request& req,
                                     httplib::Response& res) {
    const std::string id = req.matches[1];
    std::lock_guard lock(mu_);
    auto it = config_.dids.find(id);
    if (it == config_.dids.end()) {
      reply_error(res, 404, "UnknownIdentifier", "no document for " + id);
      return;
    }
    reply_json(res, 200, *it);
  });

  server_.Post("/admin/did", [this](const httplib::Request& req,
                                    httplib::Response& res) {
    try {
      auto doc = nlohmann::json::parse(req.body);
      std::lock_guard lock(mu_);
      config_.dids[doc.at("id").get<std::string>()] = doc.at("document");
      reply_json(res, 200, {{"ok", true}});
    } catch (const std::exception& e) {
      reply_error(res, 400, "MalformedRequest", e.what());
    }
  });
}

}  // namespace pdm::svc
