#include "pdm/svc/node.hpp"

#include <fstream>

#include "pdm/builtins/registry.hpp"
#include "pdm/creds/credential.hpp"
#include "pdm/crypto/suite.hpp"
#include "pdm/error.hpp"
#include "pdm/sss/shamir.hpp"
#include "pdm/tpl/aggregate.hpp"
#include "pdm/tpl/parser.hpp"
#include "pdm/tpl/solver.hpp"

namespace pdm::svc {

namespace {

// Denials raised by the pipeline with an optional machine-readable reason
// (e.g. code=PresentationInvalid, reason=ChallengeMismatch).
struct Denial {
  std::string code;
  std::string reason;
  std::string detail;
  std::vector<std::string> trace;
  int http_status = 403;
};

int status_for(const std::string& code) {
  if (code == "StorageUnreachable" || code == "RegistryUnavailable") return 502;
  if (code == "MalformedRequest" || code == "UnsupportedComputation" ||
      code == "LengthMismatch" || code == "ResultOutOfRange" ||
      code == "PolicySyntaxError") {
    return 400;
  }
  return 403;
}

}  // namespace

NodeConfig NodeConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("ConfigError", "cannot open " + path);
  nlohmann::json doc;
  in >> doc;

  NodeConfig cfg;
  cfg.node_index = doc.at("node_index").get<int>();
  cfg.n = doc.at("n").get<int>();
  if (doc.contains("package_secret_key_file")) {
    std::ifstream key(doc["package_secret_key_file"].get<std::string>());
    if (!key) throw Error("ConfigError", "cannot open package key file");
    std::getline(key, cfg.package_secret_key);
  } else {
    cfg.package_secret_key = doc.at("package_secret_key").get<std::string>();
  }
  cfg.package_public_key =
      crypto::box_keypair_from_seed(
          crypto::b64url_decode(cfg.package_secret_key))
          .public_key;
  cfg.registry.trustlist_url = doc.at("trustlist_url").get<std::string>();
  cfg.registry.revocation_url = doc.at("revocation_url").get<std::string>();
  cfg.registry.resolver_url = doc.at("resolver_url").get<std::string>();
  cfg.registry.ttl =
      std::chrono::seconds(doc.value("cache_ttl_seconds", 300));
  cfg.registry.timeout =
      std::chrono::seconds(doc.value("fetch_timeout_seconds", 5));
  if (doc.contains("storage_allowlist")) {
    cfg.storage_allowlist =
        doc["storage_allowlist"].get<std::vector<std::string>>();
  }
  cfg.formats_file = doc.value("formats_file", "");
  if (doc.contains("local_policy_file")) {
    std::ifstream pol(doc["local_policy_file"].get<std::string>());
    if (!pol) throw Error("ConfigError", "cannot open local policy file");
    cfg.local_policy_source.emplace(std::istreambuf_iterator<char>(pol),
                                    std::istreambuf_iterator<char>());
  }
  cfg.policy_budget = doc.value("policy_budget", cfg.policy_budget);
  return cfg;
}

NodeService::NodeService(NodeConfig config,
                         std::shared_ptr<builtins::Fetcher> fetcher)
    : config_(std::move(config)) {
  formats_ = std::make_shared<const builtins::FormatStore>(
      config_.formats_file.empty()
          ? builtins::FormatStore::bundled()
          : builtins::FormatStore::from_file(config_.formats_file));
  trust_ = std::make_shared<builtins::TrustServices>(config_.registry,
                                                     std::move(fetcher));
  registry_ = builtins::make_standard_registry(formats_, trust_);
  if (config_.local_policy_source) {
    local_policy_ = tpl::parse_policy(*config_.local_policy_source,
                                      "node" + std::to_string(config_.node_index) +
                                          "-local");
  }
  install_routes();
}

NodeDecision NodeService::last_decision() const {
  std::lock_guard lock(decision_mu_);
  return last_decision_;
}

std::string NodeService::fetch_package_blob(const std::string& url) {
  if (!config_.storage_allowlist.empty()) {
    bool allowed = false;
    for (const std::string& prefix : config_.storage_allowlist) {
      if (url.rfind(prefix, 0) == 0) {
        allowed = true;
        break;
      }
    }
    if (!allowed) {
      throw Error("StorageNotAllowed", url + " is outside the allow-list");
    }
  }
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error("StorageUnreachable", "not a URL: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    throw Error("StorageUnreachable", "no path in " + url);
  }
  httplib::Client client(url.substr(0, path_start));
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(30, 0);
  auto res = client.Get(url.substr(path_start));
  if (!res || res->status != 200) {
    throw Error("StorageUnreachable",
                "cannot fetch " + url +
                    (res ? " (status " + std::to_string(res->status) + ")"
                         : ""));
  }
  return res->body;
}

nlohmann::json NodeService::handle_request(
    const wire::ComputationRequest& request) {
  NodeDecision decision;
  decision.request_id = request.request_id;

  auto deny = [&](Denial d) {
    decision.granted = false;
    decision.reason_code = d.code;
    decision.reason_detail = d.detail;
    decision.trace = d.trace;
    {
      std::lock_guard lock(decision_mu_);
      last_decision_ = decision;
    }
    nlohmann::json error{{"code", d.code}, {"detail", d.detail}};
    if (!d.reason.empty()) error["reason"] = d.reason;
    if (!d.trace.empty()) error["trace"] = d.trace;
    return nlohmann::json{{"request_id", request.request_id},
                          {"node_index", config_.node_index},
                          {"error", std::move(error)},
                          {"status", d.http_status}};
  };

  try {
    if (!request.presentation) {
      return deny({"PresentationInvalid", "", "request carries no presentation",
                   {}, 403});
    }
    if (request.products.empty()) {
      return deny({"MalformedRequest", "", "no products selected", {}, 400});
    }

    // (1) Fetch and open every sealed package addressed to this node.
    std::vector<wire::DataPackage> packages;
    for (const wire::ProductRef& ref : request.products) {
      auto url = ref.package_urls.find(config_.node_index);
      if (url == ref.package_urls.end()) {
        return deny({"MalformedRequest", "",
                     "no package URL for node " +
                         std::to_string(config_.node_index),
                     {}, 400});
      }
      std::string blob = fetch_package_blob(url->second);
      try {
        crypto::SealedPackage sealed =
            wire::sealed_from_json(nlohmann::json::parse(blob));
        // The associated data is the product id this request claims; a
        // package sealed for a different product will not open.
        sealed.product_id = ref.product_id;
        std::string plain =
            crypto::hybrid_open(sealed.box, config_.package_secret_key,
                                sealed.product_id);
        wire::DataPackage package =
            wire::DataPackage::from_json(nlohmann::json::parse(plain));
        if (package.node_index != config_.node_index ||
            package.product_id != ref.product_id) {
          throw Error("PackageDecryptFailure", "package addressed elsewhere");
        }
        packages.push_back(std::move(package));
      } catch (const Error& e) {
        if (e.code() == "StorageUnreachable") throw;
        return deny({"PackageDecryptFailure", e.code(), e.what(), {}, 403});
      } catch (const nlohmann::json::exception& e) {
        return deny({"PackageDecryptFailure", "MalformedPackage", e.what(),
                     {}, 403});
      }
    }

    // (2) Policy hash binding: the policy named in the request must be the
    // one sealed with the data.
    for (size_t i = 0; i < packages.size(); ++i) {
      if (crypto::hash_policy(request.products[i].policy_source) !=
          packages[i].policy_hash) {
        return deny({"PolicyHashMismatch", "",
                     "policy for product '" + packages[i].product_id +
                         "' does not match the sealed digest",
                     {}, 403});
      }
    }

    // (3) Presentation verification against the request digest.
    creds::IssuerKeyLookup issuer_key =
        [this](const std::string& issuer) -> std::optional<std::string> {
      try {
        nlohmann::json doc = trust_->resolve_did(issuer);
        if (doc.contains("verification_key")) {
          return doc["verification_key"].get<std::string>();
        }
        return std::nullopt;
      } catch (const Error& e) {
        if (e.code() == "UnknownIdentifier") return std::nullopt;
        throw;
      }
    };
    try {
      creds::verify_presentation(*request.presentation, request.digest(),
                                 issuer_key);
    } catch (const Error& e) {
      if (e.code() == "RegistryUnavailable") throw;
      return deny({"PresentationInvalid", e.code(), e.what(), {}, 403});
    }

    // (4) All credentials must belong to one subject; this is what stops a
    // foreign encryption key from riding along on a valid presentation.
    try {
      creds::same_subject(*request.presentation);
    } catch (const Error& e) {
      return deny({"SubjectMismatch", "", e.what(), {}, 403});
    }

    // (5) Aggregate every involved policy (plus the node-local one, when
    // configured) into a single conjunction.
    std::vector<tpl::Policy> policies;
    try {
      for (const wire::ProductRef& ref : request.products) {
        policies.push_back(
            tpl::parse_policy(ref.policy_source, ref.product_id));
      }
      if (local_policy_) policies.push_back(*local_policy_);
    } catch (const Error& e) {
      return deny({"PolicySyntaxError", e.code(), e.what(), {}, 400});
    }

    std::uint64_t total_records = 0;
    for (const wire::DataPackage& p : packages) total_records += p.record_count;

    // (6) Evaluate accept(Presentation, NumRecords, ComputationType).
    tpl::SolveResult verdict;
    try {
      tpl::Policy aggregate = policies.size() == 1
                                  ? policies.front()
                                  : tpl::aggregate_policies(policies);
      tpl::Solver solver({std::move(aggregate)}, &registry_);
      tpl::DocumentStore docs;
      int handle = docs.add(request.presentation->to_json());
      tpl::Term query = tpl::Term::compound(
          "accept", {tpl::DocumentStore::handle_term(handle),
                     tpl::Term::integer(tpl::Int(total_records)),
                     tpl::Term::atom(request.computation.type)});
      tpl::SolveOptions opts;
      opts.budget = config_.policy_budget;
      opts.docs = &docs;
      opts.trace = true;
      verdict = solver.solve(query, opts);
    } catch (const Error& e) {
      if (e.code() == "RegistryUnavailable") throw;
      return deny({"PolicyDenied", e.code(), e.what(), {}, 403});
    }

    std::vector<std::string> trace;
    trace.reserve(verdict.trace.size());
    for (const tpl::TraceEvent& e : verdict.trace) {
      trace.push_back(tpl::to_string(e));
    }

    if (!verdict.solution) {
      return deny({"PolicyDenied", "",
                   "aggregated policy rejected the request", std::move(trace),
                   403});
    }

    // (7) Granted: run the share-local computation and encrypt the result
    // share for the buyer's key from the main credential.
    sss::PrimeField field(config_.prime);
    std::vector<std::uint64_t> all_shares;
    for (const wire::DataPackage& p : packages) {
      all_shares.insert(all_shares.end(), p.record_shares.begin(),
                        p.record_shares.end());
    }

    const std::string& op = request.computation.op;
    std::uint64_t share_value = 0;
    bool public_count = false;
    if (op == "sum") {
      sss::check_sum_bound(total_records, field);
      share_value = sss::local_sum(all_shares, field);
    } else if (op == "mean") {
      sss::check_sum_bound(total_records, field);
      share_value = sss::local_sum(all_shares, field);
      public_count = true;
    } else if (op == "count") {
      // Public value shared as a constant polynomial: same y on every node.
      share_value = total_records % field.prime();
      public_count = true;
    } else if (op == "dot") {
      std::vector<std::int64_t> weights =
          request.computation.weights.value_or(std::vector<std::int64_t>{});
      try {
        share_value = sss::local_dot(all_shares, weights, field);
      } catch (const Error& e) {
        return deny({e.code(), "", e.what(), {}, 400});
      }
    } else {
      return deny({"UnsupportedComputation", "",
                   "operation '" + op + "' is not available", {}, 400});
    }

    nlohmann::json result_plain{
        {"op", op},
        {"x", config_.node_index},
        {"y", std::to_string(share_value)},
        {"count", total_records}};
    crypto::HybridCiphertext boxed = crypto::encrypt_result(
        result_plain.dump(),
        request.presentation->main_credential.encryption_key,
        request.request_id);

    decision.granted = true;
    decision.trace = trace;
    {
      std::lock_guard lock(decision_mu_);
      last_decision_ = decision;
    }

    nlohmann::json envelope{{"request_id", request.request_id},
                            {"node_index", config_.node_index},
                            {"result", wire::hybrid_to_json(boxed)},
                            {"status", 200}};
    if (public_count) envelope["count"] = total_records;
    return envelope;
  } catch (const Error& e) {
    return deny({e.code(), "", e.what(), {}, status_for(e.code())});
  } catch (const std::exception& e) {
    return deny({"InternalError", "", e.what(), {}, 500});
  }
}

void NodeService::install_routes() {
  server_.Get("/health", [this](const httplib::Request&,
                                httplib::Response& res) {
    reply_json(res, 200, {{"status", "ok"},
                          {"node_index", config_.node_index},
                          {"n", config_.n}});
  });

  server_.Get("/pubkeys", [this](const httplib::Request&,
                                 httplib::Response& res) {
    reply_json(res, 200, {{"node_index", config_.node_index},
                          {"package_public_key", config_.package_public_key}});
  });

  server_.Post("/compute", [this](const httplib::Request& req,
                                  httplib::Response& res) {
    wire::ComputationRequest request;
    try {
      request = wire::ComputationRequest::from_json(
          nlohmann::json::parse(req.body));
    } catch (const std::exception& e) {
      reply_error(res, 400, "MalformedRequest", e.what());
      return;
    }
    nlohmann::json envelope = handle_request(request);
    int status = envelope.value("status", 200);
    envelope.erase("status");
    reply_json(res, status, envelope);
  });
}

}  // namespace pdm::svc
