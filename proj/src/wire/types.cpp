#include "pdm/wire/types.hpp"

#include "pdm/error.hpp"

namespace pdm::wire {

nlohmann::json DataPackage::to_json() const {
  nlohmann::json records = nlohmann::json::array();
  for (std::uint64_t y : record_shares) {
    records.push_back(share_to_json(node_index, y));
  }
  return {{"product_id", product_id},
          {"policy_hash", policy_hash},
          {"node_index", node_index},
          {"record_count", record_count},
          {"records", std::move(records)}};
}

DataPackage DataPackage::from_json(const nlohmann::json& doc) {
  DataPackage p;
  p.product_id = doc.at("product_id").get<std::string>();
  p.policy_hash = doc.at("policy_hash").get<std::string>();
  p.node_index = doc.at("node_index").get<int>();
  p.record_count = doc.at("record_count").get<std::uint64_t>();
  for (const auto& rec : doc.at("records")) {
    auto [x, y] = share_from_json(rec);
    if (x != p.node_index) {
      throw Error("MalformedPackage",
                  "record share carries x=" + std::to_string(x) +
                      " inside package for node " +
                      std::to_string(p.node_index));
    }
    p.record_shares.push_back(y);
  }
  if (p.record_count != p.record_shares.size()) {
    throw Error("MalformedPackage", "record_count does not match records");
  }
  return p;
}

nlohmann::json sealed_to_json(const crypto::SealedPackage& sealed) {
  return {{"recipient", sealed.recipient},
          {"product_id", sealed.product_id},
          {"epk", sealed.box.epk},
          {"nonce", sealed.box.nonce},
          {"ct", sealed.box.ct}};
}

crypto::SealedPackage sealed_from_json(const nlohmann::json& doc) {
  crypto::SealedPackage s;
  s.recipient = doc.at("recipient").get<int>();
  s.product_id = doc.at("product_id").get<std::string>();
  s.box.epk = doc.at("epk").get<std::string>();
  s.box.nonce = doc.at("nonce").get<std::string>();
  s.box.ct = doc.at("ct").get<std::string>();
  return s;
}

nlohmann::json hybrid_to_json(const crypto::HybridCiphertext& ct) {
  return {{"epk", ct.epk}, {"nonce", ct.nonce}, {"ct", ct.ct}};
}

crypto::HybridCiphertext hybrid_from_json(const nlohmann::json& doc) {
  return {doc.at("epk").get<std::string>(), doc.at("nonce").get<std::string>(),
          doc.at("ct").get<std::string>()};
}

nlohmann::json Computation::to_json() const {
  nlohmann::json doc{{"type", type}, {"op", op}};
  if (weights) doc["weights"] = *weights;
  return doc;
}

Computation Computation::from_json(const nlohmann::json& doc) {
  Computation c;
  c.type = doc.at("type").get<std::string>();
  c.op = doc.at("op").get<std::string>();
  if (doc.contains("weights") && !doc.at("weights").is_null()) {
    c.weights = doc.at("weights").get<std::vector<std::int64_t>>();
  }
  return c;
}

namespace {

nlohmann::json urls_to_json(const std::map<int, std::string>& urls) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [index, url] : urls) out[std::to_string(index)] = url;
  return out;
}

std::map<int, std::string> urls_from_json(const nlohmann::json& doc) {
  std::map<int, std::string> out;
  for (const auto& [key, value] : doc.items()) {
    out[std::stoi(key)] = value.get<std::string>();
  }
  return out;
}

}  // namespace

nlohmann::json ComputationRequest::to_json() const {
  nlohmann::json prods = nlohmann::json::array();
  for (const ProductRef& p : products) {
    prods.push_back({{"product_id", p.product_id},
                     {"policy", p.policy_source},
                     {"package_urls", urls_to_json(p.package_urls)}});
  }
  nlohmann::json doc{{"request_id", request_id},
                     {"products", std::move(prods)},
                     {"computation", computation.to_json()}};
  if (presentation) doc["presentation"] = presentation->to_json();
  return doc;
}

ComputationRequest ComputationRequest::from_json(const nlohmann::json& doc) {
  ComputationRequest r;
  r.request_id = doc.at("request_id").get<std::string>();
  for (const auto& p : doc.at("products")) {
    ProductRef ref;
    ref.product_id = p.at("product_id").get<std::string>();
    ref.policy_source = p.at("policy").get<std::string>();
    ref.package_urls = urls_from_json(p.at("package_urls"));
    r.products.push_back(std::move(ref));
  }
  r.computation = Computation::from_json(doc.at("computation"));
  if (doc.contains("presentation") && !doc.at("presentation").is_null()) {
    r.presentation = creds::Presentation::from_json(doc.at("presentation"));
  }
  return r;
}

std::string ComputationRequest::digest() const {
  nlohmann::json doc = to_json();
  doc.erase("presentation");
  return crypto::sha256_hex(doc.dump());
}

nlohmann::json DataProduct::to_json() const {
  return {{"product_id", product_id},
          {"seller_id", seller_id},
          {"metadata", metadata},
          {"policy", policy_source},
          {"package_urls", urls_to_json(package_urls)}};
}

DataProduct DataProduct::from_json(const nlohmann::json& doc) {
  DataProduct p;
  p.product_id = doc.at("product_id").get<std::string>();
  p.seller_id = doc.at("seller_id").get<std::string>();
  p.metadata = doc.value("metadata", nlohmann::json::object());
  p.policy_source = doc.at("policy").get<std::string>();
  p.package_urls = urls_from_json(doc.at("package_urls"));
  return p;
}

nlohmann::json share_to_json(int x, std::uint64_t y) {
  return {{"x", x}, {"y", std::to_string(y)}};
}

std::pair<int, std::uint64_t> share_from_json(const nlohmann::json& doc) {
  int x = doc.at("x").get<int>();
  const std::string y_text = doc.at("y").get<std::string>();
  std::uint64_t y = 0;
  try {
    size_t pos = 0;
    y = std::stoull(y_text, &pos);
    if (pos != y_text.size()) throw std::invalid_argument("trailing junk");
  } catch (const std::exception&) {
    throw Error("MalformedPackage", "share y is not a decimal string");
  }
  return {x, y};
}

}  // namespace pdm::wire
