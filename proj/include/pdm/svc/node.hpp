#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdm/builtins/formats.hpp"
#include "pdm/builtins/trust.hpp"
#include "pdm/svc/http_service.hpp"
#include "pdm/tpl/term.hpp"
#include "pdm/wire/types.hpp"

namespace pdm::svc {

struct NodeConfig {
  int node_index = 1;
  int n = 3;
  std::string package_public_key;  // X25519, b64url
  std::string package_secret_key;
  builtins::RegistryConfig registry;
  std::vector<std::string> storage_allowlist;  // URL prefixes; empty = any
  std::string formats_file;                    // empty = bundled descriptors
  // Optional node-local policy conjoined with every product policy; this is
  // how an operator runs a node stricter than the sellers demand.
  std::optional<std::string> local_policy_source;
  std::uint64_t policy_budget = 1'000'000;
  std::uint64_t prime = (1ULL << 61) - 1;

  static NodeConfig from_file(const std::string& path);
};

// Verdict of one request evaluation; denials carry exactly one primary
// reason code plus the goal trace of the aggregated policy run.
struct NodeDecision {
  std::string request_id;
  bool granted = false;
  std::string reason_code;   // empty when granted
  std::string reason_detail;
  std::vector<std::string> trace;
};

// One computation node. Every request passes the full gate in order:
// package fetch + open, policy hash binding, presentation verification,
// same-subject check, aggregated policy evaluation; only then the share
// computation runs and the result is encrypted for the buyer. Any failure
// yields a denial envelope with no result field.
//
//   POST /compute   ComputationRequest -> result | error envelope
//   GET  /health
//   GET  /pubkeys
class NodeService : public HttpService {
 public:
  explicit NodeService(NodeConfig config,
                       std::shared_ptr<builtins::Fetcher> fetcher = nullptr);

  // The full pipeline, also callable without HTTP.
  nlohmann::json handle_request(const wire::ComputationRequest& request);

  const NodeConfig& config() const noexcept { return config_; }
  NodeDecision last_decision() const;

 private:
  void install_routes();
  std::string fetch_package_blob(const std::string& url);

  NodeConfig config_;
  std::shared_ptr<const builtins::FormatStore> formats_;
  std::shared_ptr<builtins::TrustServices> trust_;
  tpl::BuiltinRegistry registry_;
  std::optional<tpl::Policy> local_policy_;

  mutable std::mutex decision_mu_;
  NodeDecision last_decision_;
};

}  // namespace pdm::svc
