#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "json.hpp"

namespace pdm::builtins {

struct FetchResult {
  bool found = false;  // false: the endpoint answered "no such resource"
  std::string body;
};

// Retrieves registry documents. URLs starting with http:// or https:// go
// over the wire with a hard timeout; anything else is read as a local file
// (used by the offline policy-testing CLI). Connection-level failures throw
// Error("RegistryUnavailable").
class Fetcher {
 public:
  virtual ~Fetcher() = default;
  virtual FetchResult fetch(const std::string& url) = 0;
};

std::shared_ptr<Fetcher> make_default_fetcher(
    std::chrono::seconds timeout = std::chrono::seconds(5));

using Clock = std::function<std::chrono::steady_clock::time_point()>;

// TTL cache over a Fetcher. Concurrent readers, exclusive refresh. A failed
// refresh raises even when a stale entry exists: trust data is never served
// past its ttl.
class RegistryCache {
 public:
  RegistryCache(std::shared_ptr<Fetcher> fetcher, std::chrono::seconds ttl,
                Clock clock = nullptr);

  FetchResult get(const std::string& url);

 private:
  struct Entry {
    FetchResult result;
    std::chrono::steady_clock::time_point fetched_at;
  };
  std::shared_ptr<Fetcher> fetcher_;
  std::chrono::seconds ttl_;
  Clock clock_;
  std::shared_mutex mu_;
  std::unordered_map<std::string, Entry> entries_;
};

struct RegistryConfig {
  std::string trustlist_url;   // {"scheme":"eIDAS","qualified":[...]}
  std::string revocation_url;  // {"revoked":[...]}
  std::string resolver_url;    // http base for GET <base>/<did>, or a local
                               // file holding {"<did>": {document}, ...}
  std::chrono::seconds ttl{300};
  std::chrono::seconds timeout{5};
};

// The trust/revocation/identity lookups built-ins and credential
// verification rely on. Thread-safe; one instance per service.
class TrustServices {
 public:
  explicit TrustServices(RegistryConfig config,
                         std::shared_ptr<Fetcher> fetcher = nullptr,
                         Clock clock = nullptr);

  bool is_eidas_qualified(const std::string& issuer_id);
  bool is_revoked(const std::string& credential_id);
  // Throws Error("UnknownIdentifier") when the resolver has no document.
  nlohmann::json resolve_did(const std::string& did);

 private:
  RegistryConfig config_;
  RegistryCache cache_;
};

}  // namespace pdm::builtins
