#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdm/creds/credential.hpp"
#include "pdm/crypto/suite.hpp"

namespace pdm::client {

// The buyer's local key material and credential wallet (a JSON file on disk).
struct CredentialStore {
  std::string did;
  crypto::SigningKeypair signing;
  crypto::BoxKeypair encryption;
  std::vector<creds::Credential> credentials;

  nlohmann::json to_json() const;
  static CredentialStore from_json(const nlohmann::json& doc);
  static CredentialStore from_file(const std::string& path);
  void save(const std::string& path) const;

  // Fresh DID + keypairs, no credentials yet.
  static CredentialStore create(const std::string& did);
};

struct SellerBundle {
  std::vector<std::int64_t> records;
  std::string policy_source;
  nlohmann::json metadata;     // {title, description, tags}
  std::string product_id;      // empty: generated
};

struct SellResult {
  std::string product_id;
  std::map<int, std::string> package_urls;
};

// Phase 2 end to end: share every record, seal one package per node, upload
// to storage, publish the product. Throws SecretOutOfRange for records
// outside the encoding range and propagates service errors.
SellResult sell(const std::string& market_url, const std::string& storage_url,
                const SellerBundle& bundle, const std::string& seller_id);

struct NodeDenial {
  int node_index = 0;
  std::string code;
  std::string reason;
  std::string detail;
  std::vector<std::string> trace;
};

struct BuyerResult {
  bool granted = false;
  std::string op;
  std::uint64_t record_count = 0;
  std::int64_t value = 0;  // sum / dot / count
  // mean is exact: value_numerator / record_count
  std::int64_t mean_numerator = 0;
  std::vector<NodeDenial> denials;
  std::vector<std::string> unreachable_nodes;
  std::vector<std::string> required_credentials;
};

// Phases 3 + 5: precheck, presentation bound to the request digest, submit
// through the marketplace, decrypt each node share, reconstruct, finalize.
// Denials are reported in the result rather than thrown; infrastructure
// failures throw.
BuyerResult buy(const std::string& market_url,
                const std::vector<std::string>& product_ids,
                const std::string& op,
                const std::optional<std::vector<std::int64_t>>& weights,
                const CredentialStore& wallet);

nlohmann::json search_products(const std::string& market_url,
                               const std::string& query);

struct EvalFixtures {
  std::string trustlist_path;
  std::string revocation_path;
  std::string resolver_path;
  std::string formats_path;  // empty: bundled descriptors
};

struct EvalOutcome {
  bool granted = false;
  std::vector<std::string> trace;
  tpl::Bindings bindings;
};

// Runs the same interpreter the nodes run, offline against fixture files.
// query_override replaces the default accept/3 goal; inside it the atom
// `buyer_presentation` stands for the loaded presentation handle.
EvalOutcome tpl_eval(const std::string& policy_source,
                     const std::string& policy_id,
                     const std::optional<nlohmann::json>& presentation,
                     std::uint64_t num_records,
                     const std::string& computation_type,
                     const EvalFixtures& fixtures,
                     const std::optional<std::string>& query_override =
                         std::nullopt);

}  // namespace pdm::client
