#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pdm/svc/http_service.hpp"
#include "pdm/wire/types.hpp"

namespace pdm::svc {

struct MarketConfig {
  std::map<int, std::string> node_urls;  // node index -> base URL
  std::string store_path;                // empty: in-memory only
  std::chrono::seconds node_timeout{30};

  static MarketConfig from_file(const std::string& path);
};

// The broker: accounts, the product catalog, the informal pre-check, and
// fan-out of computation requests to every node. It never evaluates
// policies beyond extracting requires_credential facts, and it relays node
// responses byte-for-byte — all authority lives in the nodes.
//
//   POST /accounts   {user, role}
//   POST /products   DataProduct
//   GET  /products?query=&cursor=&limit=
//   GET  /products/{id}
//   POST /precheck   {product_ids, computation}
//   POST /submit     ComputationRequest -> per-node responses
//   GET  /nodes      node directory with package keys
class MarketplaceService : public HttpService {
 public:
  explicit MarketplaceService(MarketConfig config);

  // Library-level entry points (the HTTP routes wrap these).
  nlohmann::json register_account(const std::string& user,
                                  const std::string& role);
  std::string publish_product(const wire::DataProduct& product);
  nlohmann::json precheck(const std::vector<std::string>& product_ids,
                          const wire::Computation& computation);
  nlohmann::json submit_raw(const std::string& request_body);
  nlohmann::json node_directory();

 private:
  void install_routes();
  void persist_locked();
  std::string node_pubkey(int index, const std::string& url);

  MarketConfig config_;
  std::mutex mu_;
  nlohmann::json store_;  // {"accounts": {...}, "products": {...}}
  std::map<int, std::string> pubkey_cache_;
};

}  // namespace pdm::svc
