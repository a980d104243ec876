#include "pdm/client/client.hpp"

#include <sodium.h>

#include <fstream>

#include "httplib.h"
#include "pdm/builtins/registry.hpp"
#include "pdm/error.hpp"
#include "pdm/sss/shamir.hpp"
#include "pdm/tpl/aggregate.hpp"
#include "pdm/tpl/parser.hpp"
#include "pdm/tpl/solver.hpp"
#include "pdm/wire/types.hpp"

namespace pdm::client {

namespace {

nlohmann::json parse_or_throw(const std::string& body, const char* what) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw Error("MalformedResponse", std::string(what) + ": not JSON");
  }
}

// Raises the service's error code when the response carries one.
nlohmann::json expect_ok(const httplib::Result& res, const char* what) {
  if (!res) {
    throw Error("ServiceUnreachable", std::string("no answer from ") + what);
  }
  nlohmann::json body = parse_or_throw(res->body, what);
  if (res->status != 200) {
    if (body.contains("error")) {
      throw Error(body["error"].value("code", "ServiceError"),
                  body["error"].value("detail", std::string(what)));
    }
    throw Error("ServiceError", std::string(what) + " answered status " +
                                    std::to_string(res->status));
  }
  return body;
}

httplib::Client make_client(const std::string& base_url) {
  httplib::Client client(base_url);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(60, 0);
  return client;
}

std::string random_hex_id(const char* prefix) {
  std::uint8_t raw[8];
  randombytes_buf(raw, sizeof(raw));
  return std::string(prefix) + "-" +
         crypto::to_hex(crypto::Bytes(raw, raw + sizeof(raw)));
}

}  // namespace

nlohmann::json CredentialStore::to_json() const {
  nlohmann::json creds_json = nlohmann::json::array();
  for (const auto& c : credentials) creds_json.push_back(c.to_json());
  return {{"did", did},
          {"signing_public_key", signing.public_key},
          {"signing_secret_key", signing.secret_key},
          {"encryption_public_key", encryption.public_key},
          {"encryption_secret_key", encryption.secret_key},
          {"credentials", std::move(creds_json)}};
}

CredentialStore CredentialStore::from_json(const nlohmann::json& doc) {
  CredentialStore s;
  s.did = doc.at("did").get<std::string>();
  s.signing.public_key = doc.at("signing_public_key").get<std::string>();
  s.signing.secret_key = doc.at("signing_secret_key").get<std::string>();
  s.encryption.public_key = doc.at("encryption_public_key").get<std::string>();
  s.encryption.secret_key = doc.at("encryption_secret_key").get<std::string>();
  for (const auto& c : doc.value("credentials", nlohmann::json::array())) {
    s.credentials.push_back(creds::Credential::from_json(c));
  }
  return s;
}

CredentialStore CredentialStore::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("ConfigError", "cannot open wallet " + path);
  nlohmann::json doc;
  in >> doc;
  return from_json(doc);
}

void CredentialStore::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("ConfigError", "cannot write wallet " + path);
  out << to_json().dump(2) << "\n";
}

CredentialStore CredentialStore::create(const std::string& did) {
  if (!creds::is_wellformed_did(did)) {
    throw Error("InvalidIdentifier", "'" + did + "' is not a DID");
  }
  CredentialStore s;
  s.did = did;
  s.signing = crypto::generate_signing_keypair();
  s.encryption = crypto::generate_box_keypair();
  return s;
}

SellResult sell(const std::string& market_url, const std::string& storage_url,
                const SellerBundle& bundle, const std::string& seller_id) {
  tpl::parse_policy(bundle.policy_source, "policy-under-sale");  // fail early

  for (std::int64_t r : bundle.records) {
    if (r > sss::kRecordBound || r < -sss::kRecordBound) {
      throw Error("SecretOutOfRange",
                  "record " + std::to_string(r) + " exceeds the bound");
    }
  }

  auto market = make_client(market_url);
  nlohmann::json directory = expect_ok(market.Get("/nodes"), "marketplace");
  const int n = directory.at("n").get<int>();

  SellResult result;
  result.product_id = bundle.product_id.empty() ? random_hex_id("prod")
                                                : bundle.product_id;
  const std::string policy_hash = crypto::hash_policy(bundle.policy_source);

  // Share record-wise: node i receives the i-th share of every record.
  sss::SharingParams params{n, sss::PrimeField::kDefaultPrime};
  sss::RandomSource rng = sss::default_random();
  std::vector<std::vector<std::uint64_t>> per_node(
      static_cast<size_t>(n));
  for (std::int64_t record : bundle.records) {
    std::vector<sss::Share> shares = sss::share(record, params, rng);
    for (const sss::Share& s : shares) {
      per_node[static_cast<size_t>(s.x - 1)].push_back(s.y);
    }
  }

  auto storage = make_client(storage_url);
  for (const auto& node : directory.at("nodes")) {
    const int index = node.at("index").get<int>();
    wire::DataPackage package;
    package.product_id = result.product_id;
    package.policy_hash = policy_hash;
    package.node_index = index;
    package.record_count = bundle.records.size();
    package.record_shares = per_node[static_cast<size_t>(index - 1)];

    crypto::SealedPackage sealed = crypto::seal_for_node(
        package.to_json().dump(), index,
        node.at("package_public_key").get<std::string>(), result.product_id);

    nlohmann::json stored = expect_ok(
        storage.Put("/blobs", wire::sealed_to_json(sealed).dump(),
                    "application/json"),
        "storage");
    result.package_urls[index] = stored.at("url").get<std::string>();
  }

  wire::DataProduct product;
  product.product_id = result.product_id;
  product.seller_id = seller_id;
  product.metadata = bundle.metadata.is_null() ? nlohmann::json::object()
                                               : bundle.metadata;
  product.metadata["record_count"] = bundle.records.size();
  product.policy_source = bundle.policy_source;
  product.package_urls = result.package_urls;

  expect_ok(market.Post("/products", product.to_json().dump(),
                        "application/json"),
            "marketplace");
  return result;
}

BuyerResult buy(const std::string& market_url,
                const std::vector<std::string>& product_ids,
                const std::string& op,
                const std::optional<std::vector<std::int64_t>>& weights,
                const CredentialStore& wallet) {
  if (wallet.credentials.empty()) {
    throw Error("NoCredentials", "the wallet holds no credentials");
  }
  auto market = make_client(market_url);

  nlohmann::json directory = expect_ok(market.Get("/nodes"), "marketplace");
  const int n = directory.at("n").get<int>();

  wire::Computation computation;
  computation.op = op;
  computation.type = (op == "dot") ? "machine_learning" : "simple_statistics";
  computation.weights = weights;

  nlohmann::json pre = expect_ok(
      market.Post("/precheck",
                  nlohmann::json{{"product_ids", product_ids},
                                 {"computation", computation.to_json()}}
                      .dump(),
                  "application/json"),
      "marketplace");
  BuyerResult result;
  result.op = op;
  result.required_credentials =
      pre.value("required", std::vector<std::string>{});
  if (!pre.at("feasible").get<bool>()) {
    throw Error("Infeasible", pre.value("reason", "precheck failed"));
  }

  wire::ComputationRequest request;
  request.request_id = random_hex_id("req");
  request.computation = computation;
  for (const std::string& id : product_ids) {
    nlohmann::json p = expect_ok(market.Get(("/products/" + id).c_str()),
                                 "marketplace");
    wire::DataProduct product = wire::DataProduct::from_json(p);
    request.products.push_back(wire::ProductRef{
        product.product_id, product.policy_source, product.package_urls});
  }

  // The challenge binds the presentation to exactly this request.
  std::vector<creds::Credential> extra(wallet.credentials.begin() + 1,
                                       wallet.credentials.end());
  request.presentation = creds::make_presentation(
      wallet.credentials.front(), std::move(extra), request.digest(),
      wallet.signing.secret_key);

  nlohmann::json submit = expect_ok(
      market.Post("/submit", request.to_json().dump(), "application/json"),
      "marketplace");

  std::vector<sss::Share> shares;
  for (const auto& entry : submit.at("responses")) {
    const int index = entry.at("node_index").get<int>();
    if (entry.contains("error")) {
      result.unreachable_nodes.push_back(std::to_string(index));
      continue;
    }
    nlohmann::json body = parse_or_throw(
        entry.at("body").get<std::string>(), "node response");
    if (body.contains("error")) {
      NodeDenial denial;
      denial.node_index = index;
      denial.code = body["error"].value("code", "");
      denial.reason = body["error"].value("reason", "");
      denial.detail = body["error"].value("detail", "");
      denial.trace = body["error"].value("trace", std::vector<std::string>{});
      result.denials.push_back(std::move(denial));
      continue;
    }
    nlohmann::json share_doc = parse_or_throw(
        crypto::decrypt_result(wire::hybrid_from_json(body.at("result")),
                               wallet.encryption.secret_key,
                               request.request_id),
        "result share");
    auto [x, y] = wire::share_from_json(
        {{"x", share_doc.at("x")}, {"y", share_doc.at("y")}});
    shares.push_back(sss::Share{x, y});
    result.record_count = share_doc.value("count", std::uint64_t{0});
  }

  if (!result.unreachable_nodes.empty()) {
    throw Error("NodeUnreachable",
                "nodes did not answer: " +
                    std::to_string(result.unreachable_nodes.size()));
  }
  if (!result.denials.empty()) {
    result.granted = false;
    return result;
  }

  sss::SharingParams params{n, sss::PrimeField::kDefaultPrime};
  std::int64_t combined = sss::reconstruct(shares, params);
  result.granted = true;
  if (op == "mean") {
    result.mean_numerator = combined;
    if (result.record_count == 0) {
      throw Error("EmptyDataset", "mean over zero records");
    }
  } else {
    result.value = combined;
  }
  return result;
}

nlohmann::json search_products(const std::string& market_url,
                               const std::string& query) {
  auto market = make_client(market_url);
  std::string path = "/products";
  if (!query.empty()) path += "?query=" + query;
  return expect_ok(market.Get(path.c_str()), "marketplace");
}

EvalOutcome tpl_eval(const std::string& policy_source,
                     const std::string& policy_id,
                     const std::optional<nlohmann::json>& presentation,
                     std::uint64_t num_records,
                     const std::string& computation_type,
                     const EvalFixtures& fixtures,
                     const std::optional<std::string>& query_override) {
  tpl::Policy policy = tpl::parse_policy(policy_source, policy_id);

  auto formats = std::make_shared<const builtins::FormatStore>(
      fixtures.formats_path.empty()
          ? builtins::FormatStore::bundled()
          : builtins::FormatStore::from_file(fixtures.formats_path));
  builtins::RegistryConfig registry_config;
  registry_config.trustlist_url = fixtures.trustlist_path;
  registry_config.revocation_url = fixtures.revocation_path;
  registry_config.resolver_url = fixtures.resolver_path;
  auto services =
      std::make_shared<builtins::TrustServices>(registry_config);
  tpl::BuiltinRegistry registry =
      builtins::make_standard_registry(formats, services);

  tpl::Solver solver({policy}, &registry);
  tpl::DocumentStore docs;
  tpl::Term handle = tpl::Term::atom("no_presentation");
  if (presentation) {
    handle = tpl::DocumentStore::handle_term(docs.add(*presentation));
  }

  tpl::Term query = tpl::Term::atom("true");
  if (query_override) {
    // `buyer_presentation` in the query text names the loaded document.
    tpl::Term parsed = tpl::parse_term(*query_override);
    tpl::Bindings replace;
    query = tpl::substitute(parsed, replace);
    struct Rewriter {
      static tpl::Term apply(const tpl::Term& t, const tpl::Term& handle) {
        if (t.kind() == tpl::Term::Kind::Atom &&
            t.name() == "buyer_presentation") {
          return handle;
        }
        if (t.kind() == tpl::Term::Kind::Compound) {
          std::vector<tpl::Term> args;
          for (const auto& a : t.args()) args.push_back(apply(a, handle));
          return tpl::Term::compound(t.name(), std::move(args));
        }
        return t;
      }
    };
    query = Rewriter::apply(parsed, handle);
  } else {
    query = tpl::Term::compound(
        policy.entry_point.name,
        {handle, tpl::Term::integer(tpl::Int(num_records)),
         tpl::Term::atom(computation_type)});
  }

  tpl::SolveOptions opts;
  opts.docs = &docs;
  opts.trace = true;
  tpl::SolveResult solved = solver.solve(query, opts);

  EvalOutcome outcome;
  outcome.granted = solved.solution.has_value();
  if (solved.solution) outcome.bindings = *solved.solution;
  for (const tpl::TraceEvent& e : solved.trace) {
    outcome.trace.push_back(tpl::to_string(e));
  }
  return outcome;
}

}  // namespace pdm::client
