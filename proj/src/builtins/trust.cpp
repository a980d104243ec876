#include "pdm/builtins/trust.hpp"

#include <fstream>
#include <sstream>

#include "httplib.h"
#include "pdm/error.hpp"

namespace pdm::builtins {

namespace {

class DefaultFetcher : public Fetcher {
 public:
  explicit DefaultFetcher(std::chrono::seconds timeout) : timeout_(timeout) {}

  FetchResult fetch(const std::string& url) override {
    if (url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0) {
      return fetch_http(url);
    }
    return fetch_file(url);
  }

 private:
  FetchResult fetch_http(const std::string& url) {
    auto scheme_end = url.find("://");
    auto path_start = url.find('/', scheme_end + 3);
    std::string base =
        path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path =
        path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(timeout_.count(), 0);
    client.set_read_timeout(timeout_.count(), 0);
    auto res = client.Get(path);
    if (!res) {
      throw Error("RegistryUnavailable", "cannot reach " + url);
    }
    if (res->status == 404) return {false, {}};
    if (res->status != 200) {
      throw Error("RegistryUnavailable",
                  url + " answered status " + std::to_string(res->status));
    }
    return {true, res->body};
  }

  FetchResult fetch_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("RegistryUnavailable", "cannot open " + path);
    std::ostringstream body;
    body << in.rdbuf();
    return {true, body.str()};
  }

  std::chrono::seconds timeout_;
};

nlohmann::json parse_registry_doc(const FetchResult& r,
                                  const std::string& what) {
  if (!r.found) {
    throw Error("RegistryUnavailable", what + " endpoint returned no document");
  }
  try {
    return nlohmann::json::parse(r.body);
  } catch (const nlohmann::json::exception&) {
    throw Error("RegistryUnavailable", what + " document is not valid JSON");
  }
}

}  // namespace

std::shared_ptr<Fetcher> make_default_fetcher(std::chrono::seconds timeout) {
  return std::make_shared<DefaultFetcher>(timeout);
}

RegistryCache::RegistryCache(std::shared_ptr<Fetcher> fetcher,
                             std::chrono::seconds ttl, Clock clock)
    : fetcher_(std::move(fetcher)),
      ttl_(ttl),
      clock_(clock ? std::move(clock)
                   : [] { return std::chrono::steady_clock::now(); }) {}

FetchResult RegistryCache::get(const std::string& url) {
  const auto now = clock_();
  {
    std::shared_lock lock(mu_);
    auto it = entries_.find(url);
    if (it != entries_.end() && now - it->second.fetched_at < ttl_) {
      return it->second.result;
    }
  }
  std::unique_lock lock(mu_);
  auto it = entries_.find(url);
  if (it != entries_.end() && now - it->second.fetched_at < ttl_) {
    return it->second.result;
  }
  // Stale or missing: refetch. Errors propagate even when a stale entry
  // exists; expired trust data is never served.
  FetchResult fresh = fetcher_->fetch(url);
  entries_[url] = Entry{fresh, clock_()};
  return fresh;
}

TrustServices::TrustServices(RegistryConfig config,
                             std::shared_ptr<Fetcher> fetcher, Clock clock)
    : config_(std::move(config)),
      cache_(fetcher ? std::move(fetcher)
                     : make_default_fetcher(config_.timeout),
             config_.ttl, std::move(clock)) {}

bool TrustServices::is_eidas_qualified(const std::string& issuer_id) {
  nlohmann::json doc =
      parse_registry_doc(cache_.get(config_.trustlist_url), "trust list");
  if (!doc.contains("qualified") || !doc["qualified"].is_array()) return false;
  for (const auto& entry : doc["qualified"]) {
    if (entry.is_string() && entry.get<std::string>() == issuer_id) {
      return true;
    }
  }
  return false;
}

bool TrustServices::is_revoked(const std::string& credential_id) {
  nlohmann::json doc =
      parse_registry_doc(cache_.get(config_.revocation_url), "revocation list");
  if (!doc.contains("revoked") || !doc["revoked"].is_array()) return false;
  for (const auto& entry : doc["revoked"]) {
    if (entry.is_string() && entry.get<std::string>() == credential_id) {
      return true;
    }
  }
  return false;
}

nlohmann::json TrustServices::resolve_did(const std::string& did) {
  const std::string& base = config_.resolver_url;
  if (base.rfind("http://", 0) == 0 || base.rfind("https://", 0) == 0) {
    FetchResult r = cache_.get(base + "/" + did);
    if (!r.found) {
      throw Error("UnknownIdentifier", "no document for " + did);
    }
    try {
      return nlohmann::json::parse(r.body);
    } catch (const nlohmann::json::exception&) {
      throw Error("RegistryUnavailable", "resolver returned invalid JSON");
    }
  }
  // File fixture: one JSON object mapping DIDs to documents.
  nlohmann::json all = parse_registry_doc(cache_.get(base), "resolver");
  auto it = all.find(did);
  if (it == all.end()) {
    throw Error("UnknownIdentifier", "no document for " + did);
  }
  return *it;
}

}  // namespace pdm::builtins
