#include "pdm/svc/marketplace.hpp"

#include <sodium.h>

#include <cstdio>
#include <fstream>
#include <future>

#include "pdm/creds/credential.hpp"
#include "pdm/crypto/suite.hpp"
#include "pdm/error.hpp"
#include "pdm/tpl/aggregate.hpp"
#include "pdm/tpl/parser.hpp"

namespace pdm::svc {

namespace {

const std::array<const char*, 4> kSupportedOps = {"sum", "count", "mean",
                                                  "dot"};

std::string random_id(const char* prefix) {
  std::uint8_t raw[8];
  randombytes_buf(raw, sizeof(raw));
  return std::string(prefix) + "-" +
         crypto::to_hex(crypto::Bytes(raw, raw + sizeof(raw)));
}

}  // namespace

MarketConfig MarketConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("ConfigError", "cannot open " + path);
  nlohmann::json doc;
  in >> doc;
  MarketConfig cfg;
  for (const auto& [key, value] : doc.at("node_urls").items()) {
    cfg.node_urls[std::stoi(key)] = value.get<std::string>();
  }
  cfg.store_path = doc.value("store_path", "");
  cfg.node_timeout =
      std::chrono::seconds(doc.value("node_timeout_seconds", 30));
  return cfg;
}

MarketplaceService::MarketplaceService(MarketConfig config)
    : config_(std::move(config)) {
  store_ = {{"accounts", nlohmann::json::object()},
            {"products", nlohmann::json::object()}};
  if (!config_.store_path.empty()) {
    std::ifstream in(config_.store_path);
    if (in) in >> store_;
  }
  install_routes();
}

void MarketplaceService::persist_locked() {
  if (config_.store_path.empty()) return;
  const std::string tmp = config_.store_path + ".tmp";
  {
    std::ofstream out(tmp);
    out << store_.dump(2);
  }
  std::rename(tmp.c_str(), config_.store_path.c_str());
}

std::string MarketplaceService::node_pubkey(int index,
                                            const std::string& url) {
  {
    std::lock_guard lock(mu_);
    auto it = pubkey_cache_.find(index);
    if (it != pubkey_cache_.end()) return it->second;
  }
  httplib::Client client(url);
  client.set_connection_timeout(5, 0);
  auto res = client.Get("/pubkeys");
  if (!res || res->status != 200) {
    throw Error("NodeUnreachable",
                "node " + std::to_string(index) + " did not answer /pubkeys");
  }
  std::string key = nlohmann::json::parse(res->body)
                        .at("package_public_key")
                        .get<std::string>();
  std::lock_guard lock(mu_);
  pubkey_cache_[index] = key;
  return key;
}

nlohmann::json MarketplaceService::node_directory() {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& [index, url] : config_.node_urls) {
    nodes.push_back({{"index", index},
                     {"url", url},
                     {"package_public_key", node_pubkey(index, url)}});
  }
  return {{"n", config_.node_urls.size()}, {"nodes", std::move(nodes)}};
}

nlohmann::json MarketplaceService::register_account(const std::string& user,
                                                    const std::string& role) {
  if (role != "seller" && role != "buyer") {
    throw Error("MalformedRequest", "role must be seller or buyer");
  }
  std::string account_id;
  {
    std::lock_guard lock(mu_);
    if (store_["accounts"].contains(user)) {
      throw Error("DuplicateAccount", "user '" + user + "' already exists");
    }
    account_id = random_id("acct");
    store_["accounts"][user] = {{"account_id", account_id}, {"role", role}};
    persist_locked();
  }
  nlohmann::json out = node_directory();
  out["account_id"] = account_id;
  out["role"] = role;
  return out;
}

std::string MarketplaceService::publish_product(
    const wire::DataProduct& product) {
  {
    std::lock_guard lock(mu_);
    bool known_seller = false;
    for (const auto& [user, account] : store_["accounts"].items()) {
      if (account.at("account_id") == product.seller_id ||
          user == product.seller_id) {
        if (account.at("role") != "seller") {
          throw Error("PermissionDenied",
                      "account '" + product.seller_id + "' cannot publish");
        }
        known_seller = true;
        break;
      }
    }
    if (!known_seller) {
      throw Error("UnknownAccount", "no seller '" + product.seller_id + "'");
    }
  }

  tpl::parse_policy(product.policy_source, product.product_id);  // may throw

  for (int i = 1; i <= static_cast<int>(config_.node_urls.size()); ++i) {
    if (product.package_urls.count(i) == 0) {
      throw Error("IncompleteShareSet",
                  "missing package URL for node " + std::to_string(i));
    }
  }

  std::string id =
      product.product_id.empty() ? random_id("prod") : product.product_id;
  std::lock_guard lock(mu_);
  if (store_["products"].contains(id)) {
    throw Error("DuplicateProduct", "product '" + id + "' already exists");
  }
  wire::DataProduct stored = product;
  stored.product_id = id;
  store_["products"][id] = stored.to_json();
  persist_locked();
  return id;
}

nlohmann::json MarketplaceService::precheck(
    const std::vector<std::string>& product_ids,
    const wire::Computation& computation) {
  std::vector<tpl::Policy> policies;
  {
    std::lock_guard lock(mu_);
    for (const std::string& id : product_ids) {
      if (!store_["products"].contains(id)) {
        throw Error("UnknownProduct", "no product '" + id + "'");
      }
      policies.push_back(tpl::parse_policy(
          store_["products"][id].at("policy").get<std::string>(), id));
    }
  }

  bool feasible = true;
  std::string reason;
  if (std::find(kSupportedOps.begin(), kSupportedOps.end(),
                computation.op) == kSupportedOps.end()) {
    feasible = false;
    reason = "operation '" + computation.op + "' is not supported";
  } else if (computation.op == "dot" && !computation.weights) {
    feasible = false;
    reason = "dot requires weights";
  }

  // Advisory only; the nodes are authoritative.
  std::vector<std::string> required;
  if (!policies.empty()) {
    tpl::Policy aggregate = policies.size() == 1
                                ? policies.front()
                                : tpl::aggregate_policies(policies);
    required = creds::required_credentials(aggregate);
  }

  return {{"feasible", feasible},
          {"reason", reason},
          {"required", required}};
}

nlohmann::json MarketplaceService::submit_raw(
    const std::string& request_body) {
  std::string request_id = "unknown";
  try {
    request_id = nlohmann::json::parse(request_body)
                     .value("request_id", "unknown");
  } catch (const nlohmann::json::exception&) {
    throw Error("MalformedRequest", "request body is not JSON");
  }

  // Identical bytes to every node, in parallel; responses are relayed
  // verbatim (the marketplace never opens or rewrites them).
  std::vector<std::pair<int, std::future<nlohmann::json>>> pending;
  for (const auto& [index, url] : config_.node_urls) {
    pending.emplace_back(
        index, std::async(std::launch::async, [this, index = index, url = url,
                                               &request_body] {
          httplib::Client client(url);
          client.set_connection_timeout(5, 0);
          client.set_read_timeout(config_.node_timeout.count(), 0);
          auto res =
              client.Post("/compute", request_body, "application/json");
          if (!res) {
            return nlohmann::json{{"node_index", index},
                                  {"error", "NodeUnreachable"}};
          }
          return nlohmann::json{{"node_index", index},
                                {"status", res->status},
                                {"body", res->body}};
        }));
  }
  nlohmann::json responses = nlohmann::json::array();
  for (auto& [index, fut] : pending) responses.push_back(fut.get());
  return {{"request_id", request_id}, {"responses", std::move(responses)}};
}

void MarketplaceService::install_routes() {
  auto guard = [](httplib::Response& res, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      int status = 400;
      if (e.code() == "DuplicateAccount" || e.code() == "DuplicateProduct") {
        status = 409;
      } else if (e.code() == "UnknownProduct" ||
                 e.code() == "UnknownAccount") {
        status = 404;
      } else if (e.code() == "PermissionDenied") {
        status = 403;
      } else if (e.code() == "NodeUnreachable") {
        status = 502;
      }
      reply_error(res, status, e.code(), e.what());
    } catch (const std::exception& e) {
      reply_error(res, 400, "MalformedRequest", e.what());
    }
  };

  server_.Post("/accounts", [this, guard](const httplib::Request& req,
                                          httplib::Response& res) {
    guard(res, [&] {
      auto doc = nlohmann::json::parse(req.body);
      reply_json(res, 200,
                 register_account(doc.at("user").get<std::string>(),
                                  doc.at("role").get<std::string>()));
    });
  });

  server_.Get("/nodes", [this, guard](const httplib::Request&,
                                      httplib::Response& res) {
    guard(res, [&] { reply_json(res, 200, node_directory()); });
  });

  server_.Post("/products", [this, guard](const httplib::Request& req,
                                          httplib::Response& res) {
    guard(res, [&] {
      wire::DataProduct product =
          wire::DataProduct::from_json(nlohmann::json::parse(req.body));
      std::string id = publish_product(product);
      reply_json(res, 200, {{"product_id", id}});
    });
  });

  server_.Get("/products", [this](const httplib::Request& req,
                                  httplib::Response& res) {
    const std::string query = req.get_param_value("query");
    const std::string cursor = req.get_param_value("cursor");
    size_t limit = 50;
    if (req.has_param("limit")) {
      limit = std::stoul(req.get_param_value("limit"));
    }

    nlohmann::json matches = nlohmann::json::array();
    std::string next_cursor;
    std::lock_guard lock(mu_);
    // store keys are sorted, which gives the stable product-id ordering.
    for (const auto& [id, product] : store_["products"].items()) {
      if (!cursor.empty() && id <= cursor) continue;
      if (!query.empty()) {
        std::string haystack = id + " " + product.value("metadata",
                                                        nlohmann::json::object())
                                             .dump();
        if (haystack.find(query) == std::string::npos) continue;
      }
      if (matches.size() == limit) {
        next_cursor = matches.back().at("product_id").get<std::string>();
        break;
      }
      matches.push_back(product);
    }
    reply_json(res, 200,
               {{"products", std::move(matches)},
                {"next_cursor", next_cursor}});
  });

  server_.Get(R"(/products/([^/]+))", [this](const httplib::Request& req,
                                             httplib::Response& res) {
    const std::string id = req.matches[1];
    std::lock_guard lock(mu_);
    if (!store_["products"].contains(id)) {
      reply_error(res, 404, "UnknownProduct", "no product '" + id + "'");
      return;
    }
    reply_json(res, 200, store_["products"][id]);
  });

  server_.Post("/precheck", [this, guard](const httplib::Request& req,
                                          httplib::Response& res) {
    guard(res, [&] {
      auto doc = nlohmann::json::parse(req.body);
      reply_json(res, 200,
                 precheck(doc.at("product_ids").get<std::vector<std::string>>(),
                          wire::Computation::from_json(doc.at("computation"))));
    });
  });

  server_.Post("/submit", [this, guard](const httplib::Request& req,
                                        httplib::Response& res) {
    guard(res, [&] { reply_json(res, 200, submit_raw(req.body)); });
  });
}

}  // namespace pdm::svc
