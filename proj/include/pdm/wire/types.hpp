#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdm/creds/credential.hpp"
#include "pdm/crypto/suite.hpp"

namespace pdm::wire {

// Plaintext payload sealed for one node: that node's share of every record,
// plus the digest binding the product's policy to the data.
struct DataPackage {
  std::string product_id;
  std::string policy_hash;  // hex SHA-256 of the policy source bytes
  int node_index = 0;
  std::uint64_t record_count = 0;
  std::vector<std::uint64_t> record_shares;  // y values; x is node_index

  nlohmann::json to_json() const;
  static DataPackage from_json(const nlohmann::json& doc);
};

nlohmann::json sealed_to_json(const crypto::SealedPackage& sealed);
crypto::SealedPackage sealed_from_json(const nlohmann::json& doc);

nlohmann::json hybrid_to_json(const crypto::HybridCiphertext& ct);
crypto::HybridCiphertext hybrid_from_json(const nlohmann::json& doc);

struct ProductRef {
  std::string product_id;
  std::string policy_source;
  std::map<int, std::string> package_urls;  // node index -> blob URL
};

struct Computation {
  std::string type;  // simple_statistics | machine_learning
  std::string op;    // sum | count | mean | dot
  std::optional<std::vector<std::int64_t>> weights;

  nlohmann::json to_json() const;
  static Computation from_json(const nlohmann::json& doc);
};

// The identical envelope every node receives. The presentation challenge
// equals digest() of the rest of the request, which rules out replays.
struct ComputationRequest {
  std::string request_id;
  std::vector<ProductRef> products;
  Computation computation;
  std::optional<creds::Presentation> presentation;

  nlohmann::json to_json() const;
  static ComputationRequest from_json(const nlohmann::json& doc);

  // Hex SHA-256 over the canonical request with the presentation removed.
  std::string digest() const;
};

struct DataProduct {
  std::string product_id;
  std::string seller_id;
  nlohmann::json metadata;  // {title, description, record_count, tags}
  std::string policy_source;
  std::map<int, std::string> package_urls;

  nlohmann::json to_json() const;
  static DataProduct from_json(const nlohmann::json& doc);
};

// Share <-> JSON ({x: int, y: decimal-string}).
nlohmann::json share_to_json(int x, std::uint64_t y);
std::pair<int, std::uint64_t> share_from_json(const nlohmann::json& doc);

}  // namespace pdm::wire
