// pdm: seller/buyer/policy-developer CLI plus service launchers.
//
// Exit codes: 0 granted/ok, 3 denied by policy, 4 infrastructure error.

#include <cmath>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "httplib.h"
#include "pdm/bench/bench.hpp"
#include "pdm/client/client.hpp"
#include "pdm/creds/credential.hpp"
#include "pdm/crypto/suite.hpp"
#include "pdm/error.hpp"
#include "pdm/svc/marketplace.hpp"
#include "pdm/svc/node.hpp"
#include "pdm/svc/storage.hpp"
#include "pdm/tpl/parser.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDenied = 3;
constexpr int kExitInfra = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pdm::Error("ConfigError", "cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::int64_t> read_records_csv(const std::string& path,
                                           int scale) {
  std::ifstream in(path);
  if (!in) throw pdm::Error("ConfigError", "cannot open " + path);
  std::vector<std::int64_t> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (scale > 0) {
      records.push_back(static_cast<std::int64_t>(
          std::llround(std::stod(line) * std::pow(10.0, scale))));
    } else {
      records.push_back(std::stoll(line));
    }
  }
  return records;
}

std::map<std::string, pdm::creds::ClaimValue> parse_claims(
    const std::vector<std::string>& raw) {
  std::map<std::string, pdm::creds::ClaimValue> claims;
  for (const std::string& pair : raw) {
    auto eq = pair.find('=');
    if (eq == std::string::npos) {
      throw pdm::Error("ConfigError", "claim must be key=value: " + pair);
    }
    std::string key = pair.substr(0, eq);
    std::string value = pair.substr(eq + 1);
    try {
      size_t pos = 0;
      std::int64_t num = std::stoll(value, &pos);
      if (pos == value.size()) {
        claims[key] = num;
        continue;
      }
    } catch (const std::exception&) {
    }
    claims[key] = value;
  }
  return claims;
}

void wait_forever() {
  static std::mutex mu;
  mu.lock();
  mu.lock();  // blocks until the process is killed
}

int run_serve(const std::string& kind, const std::string& config_path,
              const std::string& host, int port) {
  if (kind == "storage") {
    pdm::svc::StorageConfig cfg = config_path.empty()
                                      ? pdm::svc::StorageConfig{}
                                      : pdm::svc::StorageConfig::from_file(
                                            config_path);
    pdm::svc::StorageService svc(std::move(cfg));
    std::cout << "storage listening on " << svc.start(host, port) << "\n";
    wait_forever();
  } else if (kind == "node") {
    pdm::svc::NodeService svc(pdm::svc::NodeConfig::from_file(config_path));
    std::cout << "node " << svc.config().node_index << " listening on "
              << svc.start(host, port) << "\n";
    wait_forever();
  } else if (kind == "marketplace") {
    pdm::svc::MarketplaceService svc(
        pdm::svc::MarketConfig::from_file(config_path));
    std::cout << "marketplace listening on " << svc.start(host, port) << "\n";
    wait_forever();
  } else {
    throw pdm::Error("ConfigError", "unknown service '" + kind + "'");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"policy-gated private data marketplace"};
  app.require_subcommand(1);

  // serve
  auto* serve = app.add_subcommand("serve", "run a service");
  std::string serve_kind, serve_config, serve_host = "127.0.0.1";
  int serve_port = 0;
  serve->add_option("kind", serve_kind, "storage | node | marketplace")
      ->required();
  serve->add_option("--config", serve_config, "service config file");
  serve->add_option("--host", serve_host, "bind host");
  serve->add_option("--port", serve_port, "bind port (0 = ephemeral)");

  // seller
  auto* seller = app.add_subcommand("seller", "seller operations");
  seller->require_subcommand(1);
  std::string market_url, storage_url, data_path, policy_path, meta_path;
  std::string seller_id, product_id, reg_user;
  int scale = 0;

  auto* seller_register = seller->add_subcommand("register", "create account");
  seller_register->add_option("--market", market_url)->required();
  seller_register->add_option("--user", reg_user)->required();

  auto* keys = seller->add_subcommand("keys", "key material");
  auto* keys_fetch = keys->add_subcommand("fetch", "fetch node key directory");
  keys_fetch->add_option("--market", market_url)->required();

  auto* sell = seller->add_subcommand("sell", "share, seal, upload, publish");
  sell->add_option("--market", market_url)->required();
  sell->add_option("--storage", storage_url)->required();
  sell->add_option("--data", data_path, "single-column integer CSV")
      ->required();
  sell->add_option("--policy", policy_path, ".tpl policy file")->required();
  sell->add_option("--meta", meta_path, "metadata JSON file");
  sell->add_option("--seller", seller_id, "seller account id")->required();
  sell->add_option("--id", product_id, "product id (default: random)");
  sell->add_option("--scale", scale, "fixed-point decimal scale");

  // buyer
  auto* buyer = app.add_subcommand("buyer", "buyer operations");
  buyer->require_subcommand(1);
  std::string wallet_path, op, query_text;
  std::vector<std::string> product_ids;
  std::vector<std::int64_t> weights;

  auto* buyer_register = buyer->add_subcommand("register", "create account");
  buyer_register->add_option("--market", market_url)->required();
  buyer_register->add_option("--user", reg_user)->required();

  auto* search = buyer->add_subcommand("search", "search the catalog");
  search->add_option("--market", market_url)->required();
  search->add_option("query", query_text);

  auto* buy = buyer->add_subcommand("buy", "purchase a computation");
  buy->add_option("--market", market_url)->required();
  buy->add_option("--products", product_ids, "product ids")
      ->required()
      ->delimiter(',');
  buy->add_option("--op", op, "sum | count | mean | dot")->required();
  buy->add_option("--weights", weights, "dot weights")->delimiter(',');
  buy->add_option("--wallet", wallet_path, "credential store JSON")
      ->required();

  // wallet / issuer utilities
  auto* wallet = app.add_subcommand("wallet", "credential store utilities");
  auto* wallet_create = wallet->add_subcommand("create", "new wallet");
  std::string did, out_path, issuer_path, cred_id;
  std::vector<std::string> claim_args;
  wallet_create->add_option("--did", did)->required();
  wallet_create->add_option("--out", out_path)->required();

  auto* issuer = app.add_subcommand("issuer", "test issuer utilities");
  issuer->require_subcommand(1);
  auto* issuer_keygen = issuer->add_subcommand("keygen", "new issuer keys");
  issuer_keygen->add_option("--did", did)->required();
  issuer_keygen->add_option("--out", out_path)->required();

  auto* issuer_issue = issuer->add_subcommand("issue", "sign a credential");
  issuer_issue->add_option("--issuer", issuer_path, "issuer key file")
      ->required();
  issuer_issue->add_option("--wallet", wallet_path)->required();
  issuer_issue->add_option("--id", cred_id)->required();
  issuer_issue->add_option("--claims", claim_args, "key=value")
      ->delimiter(',');

  auto* issuer_register_cmd =
      issuer->add_subcommand("register", "publish issuer DID document");
  std::string resolver_admin;
  issuer_register_cmd->add_option("--storage", resolver_admin,
                                  "storage service base URL")
      ->required();
  issuer_register_cmd->add_option("--issuer", issuer_path)->required();

  // tpl developer tool
  auto* tpl_cmd = app.add_subcommand("tpl", "policy developer tool");
  tpl_cmd->require_subcommand(1);
  std::string tpl_file, presentation_path, computation_type = "";
  std::uint64_t num_records = 0;
  bool show_trace = false;
  pdm::client::EvalFixtures fixtures;

  auto* tpl_check = tpl_cmd->add_subcommand("check", "parse and lint");
  tpl_check->add_option("file", tpl_file)->required();

  auto* tpl_eval_cmd = tpl_cmd->add_subcommand("eval", "evaluate offline");
  tpl_eval_cmd->add_option("file", tpl_file)->required();
  tpl_eval_cmd->add_option("--query", query_text,
                           "goal; buyer_presentation names the document");
  tpl_eval_cmd->add_option("--presentation", presentation_path);
  tpl_eval_cmd->add_option("--num-records", num_records);
  tpl_eval_cmd->add_option("--computation", computation_type);
  tpl_eval_cmd->add_option("--trustlist", fixtures.trustlist_path);
  tpl_eval_cmd->add_option("--revocation", fixtures.revocation_path);
  tpl_eval_cmd->add_option("--resolver", fixtures.resolver_path);
  tpl_eval_cmd->add_option("--formats", fixtures.formats_path);
  tpl_eval_cmd->add_flag("--trace", show_trace);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "interpreter benchmarks");
  std::vector<int> bench_policies{1, 100};
  std::vector<int> bench_preds{3, 20, 100};
  bench_cmd->add_option("--policies", bench_policies)->delimiter(',');
  bench_cmd->add_option("--preds", bench_preds)->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      return run_serve(serve_kind, serve_config, serve_host, serve_port);
    }

    if (*seller_register || *buyer_register) {
      httplib::Client client(market_url);
      auto res = client.Post(
          "/accounts",
          nlohmann::json{{"user", reg_user},
                         {"role", *seller_register ? "seller" : "buyer"}}
              .dump(),
          "application/json");
      if (!res) throw pdm::Error("ServiceUnreachable", market_url);
      std::cout << res->body << "\n";
      return res->status == 200 ? kExitOk : kExitInfra;
    }

    if (*keys_fetch) {
      httplib::Client client(market_url);
      auto res = client.Get("/nodes");
      if (!res) throw pdm::Error("ServiceUnreachable", market_url);
      std::cout << res->body << "\n";
      return res->status == 200 ? kExitOk : kExitInfra;
    }

    if (*sell) {
      pdm::client::SellerBundle bundle;
      bundle.records = read_records_csv(data_path, scale);
      bundle.policy_source = read_file(policy_path);
      bundle.metadata = meta_path.empty()
                            ? nlohmann::json::object()
                            : nlohmann::json::parse(read_file(meta_path));
      bundle.product_id = product_id;
      pdm::client::SellResult result =
          pdm::client::sell(market_url, storage_url, bundle, seller_id);
      std::cout << nlohmann::json{{"product_id", result.product_id}}.dump()
                << "\n";
      return kExitOk;
    }

    if (*search) {
      std::cout << pdm::client::search_products(market_url, query_text).dump(2)
                << "\n";
      return kExitOk;
    }

    if (*buy) {
      auto store = pdm::client::CredentialStore::from_file(wallet_path);
      std::optional<std::vector<std::int64_t>> w;
      if (!weights.empty()) w = weights;
      pdm::client::BuyerResult result =
          pdm::client::buy(market_url, product_ids, op, w, store);
      if (!result.granted) {
        nlohmann::json denials = nlohmann::json::array();
        for (const auto& d : result.denials) {
          denials.push_back({{"node_index", d.node_index},
                             {"code", d.code},
                             {"reason", d.reason},
                             {"detail", d.detail},
                             {"trace", d.trace}});
        }
        std::cout << nlohmann::json{{"granted", false},
                                    {"denials", denials}}
                         .dump(2)
                  << "\n";
        return kExitDenied;
      }
      nlohmann::json out{{"granted", true}, {"op", op}};
      if (op == "mean") {
        out["mean"] = {{"numerator", result.mean_numerator},
                       {"denominator", result.record_count}};
        out["approx"] = static_cast<double>(result.mean_numerator) /
                        static_cast<double>(result.record_count);
      } else {
        out["value"] = result.value;
      }
      std::cout << out.dump(2) << "\n";
      return kExitOk;
    }

    if (*wallet_create) {
      pdm::client::CredentialStore::create(did).save(out_path);
      std::cout << "wallet written to " << out_path << "\n";
      return kExitOk;
    }

    if (*issuer_keygen) {
      nlohmann::json doc{{"did", did}};
      auto keys_pair = pdm::crypto::generate_signing_keypair();
      doc["signing_public_key"] = keys_pair.public_key;
      doc["signing_secret_key"] = keys_pair.secret_key;
      std::ofstream out(out_path);
      out << doc.dump(2) << "\n";
      std::cout << "issuer keys written to " << out_path << "\n";
      return kExitOk;
    }

    if (*issuer_issue) {
      auto issuer_doc = nlohmann::json::parse(read_file(issuer_path));
      auto store = pdm::client::CredentialStore::from_file(wallet_path);
      store.credentials.push_back(pdm::creds::issue_credential(
          cred_id, store.did, parse_claims(claim_args),
          store.signing.public_key, store.encryption.public_key,
          issuer_doc.at("did").get<std::string>(),
          issuer_doc.at("signing_secret_key").get<std::string>()));
      store.save(wallet_path);
      std::cout << "credential " << cred_id << " added to " << wallet_path
                << "\n";
      return kExitOk;
    }

    if (*issuer_register_cmd) {
      auto issuer_doc = nlohmann::json::parse(read_file(issuer_path));
      httplib::Client client(resolver_admin);
      auto res = client.Post(
          "/admin/did",
          nlohmann::json{
              {"id", issuer_doc.at("did")},
              {"document",
               {{"id", issuer_doc.at("did")},
                {"verification_key", issuer_doc.at("signing_public_key")}}}}
              .dump(),
          "application/json");
      if (!res || res->status != 200) {
        throw pdm::Error("ServiceUnreachable", "cannot publish DID document");
      }
      std::cout << "issuer registered\n";
      return kExitOk;
    }

    if (*tpl_check) {
      try {
        pdm::tpl::Policy policy =
            pdm::tpl::parse_policy(read_file(tpl_file), tpl_file);
        std::cout << "ok: " << policy.clauses.size() << " clauses, entry "
                  << policy.entry_point.name << "/"
                  << policy.entry_point.arity << "\n";
        return kExitOk;
      } catch (const pdm::Error& e) {
        std::cerr << e.what() << "\n";
        return kExitInfra;
      }
    }

    if (*tpl_eval_cmd) {
      std::optional<nlohmann::json> presentation;
      if (!presentation_path.empty()) {
        presentation = nlohmann::json::parse(read_file(presentation_path));
      }
      std::optional<std::string> override;
      if (!query_text.empty()) override = query_text;
      pdm::client::EvalOutcome outcome = pdm::client::tpl_eval(
          read_file(tpl_file), tpl_file, presentation, num_records,
          computation_type, fixtures, override);
      std::cout << (outcome.granted ? "grant" : "deny") << "\n";
      if (show_trace) {
        for (const std::string& line : outcome.trace) {
          std::cout << "  " << line << "\n";
        }
      }
      return outcome.granted ? kExitOk : kExitDenied;
    }

    if (*bench_cmd) {
      auto rows = pdm::bench::run_grid(bench_policies, bench_preds);
      std::cout << pdm::bench::format_table(rows);
      return kExitOk;
    }
  } catch (const pdm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == "Denied" || e.code() == "PolicyDenied") return kExitDenied;
    return kExitInfra;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfra;
  }
  return kExitOk;
}
