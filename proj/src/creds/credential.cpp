#include "pdm/creds/credential.hpp"

#include <regex>

#include "pdm/crypto/suite.hpp"
#include "pdm/error.hpp"
#include "pdm/tpl/aggregate.hpp"
#include "pdm/tpl/parser.hpp"
#include "pdm/tpl/solver.hpp"

namespace pdm::creds {

namespace {

nlohmann::json claims_to_json(const std::map<std::string, ClaimValue>& claims) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [key, value] : claims) {
    if (std::holds_alternative<std::string>(value)) {
      out[key] = std::get<std::string>(value);
    } else {
      out[key] = std::get<std::int64_t>(value);
    }
  }
  return out;
}

std::map<std::string, ClaimValue> claims_from_json(const nlohmann::json& doc) {
  std::map<std::string, ClaimValue> out;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_string()) {
      out[key] = value.get<std::string>();
    } else if (value.is_number_integer()) {
      out[key] = value.get<std::int64_t>();
    } else {
      throw Error("MalformedCredential",
                  "claim '" + key + "' must be a string or an integer");
    }
  }
  return out;
}

}  // namespace

nlohmann::json Credential::to_json() const {
  nlohmann::json doc;
  doc["id"] = id;
  doc["subject"] = subject;
  doc["issuer"] = issuer;
  doc["claims"] = claims_to_json(claims);
  doc["verification_key"] = verification_key;
  doc["encryption_key"] = encryption_key;
  doc["issuer_signature"] = issuer_signature;
  return doc;
}

Credential Credential::from_json(const nlohmann::json& doc) {
  Credential c;
  c.id = doc.at("id").get<std::string>();
  c.subject = doc.at("subject").get<std::string>();
  c.issuer = doc.at("issuer").get<std::string>();
  c.claims = claims_from_json(doc.at("claims"));
  c.verification_key = doc.at("verification_key").get<std::string>();
  c.encryption_key = doc.at("encryption_key").get<std::string>();
  c.issuer_signature = doc.value("issuer_signature", "");
  return c;
}

std::string Credential::signing_bytes() const {
  nlohmann::json doc = to_json();
  doc.erase("issuer_signature");
  return doc.dump();  // nlohmann keeps keys sorted; compact by default
}

nlohmann::json Presentation::to_json() const {
  nlohmann::json doc;
  doc["mainCredential"] = main_credential.to_json();
  nlohmann::json extra = nlohmann::json::array();
  for (const Credential& c : additional) extra.push_back(c.to_json());
  doc["additional"] = std::move(extra);
  doc["challenge"] = challenge;
  doc["holder_signature"] = holder_signature;
  return doc;
}

Presentation Presentation::from_json(const nlohmann::json& doc) {
  Presentation p;
  p.main_credential = Credential::from_json(doc.at("mainCredential"));
  if (doc.contains("additional")) {
    for (const auto& c : doc.at("additional")) {
      p.additional.push_back(Credential::from_json(c));
    }
  }
  p.challenge = doc.at("challenge").get<std::string>();
  p.holder_signature = doc.value("holder_signature", "");
  return p;
}

std::string Presentation::signing_bytes() const {
  nlohmann::json doc = to_json();
  doc.erase("holder_signature");
  return doc.dump();
}

bool is_wellformed_did(const std::string& did) {
  static const std::regex kDid(R"(^did:[a-z0-9]+:.+$)");
  return std::regex_match(did, kDid);
}

void verify_presentation(const Presentation& p,
                         const std::string& expected_challenge_hex,
                         const IssuerKeyLookup& issuer_key) {
  if (!crypto::verify_detached(p.signing_bytes(), p.holder_signature,
                               p.main_credential.verification_key)) {
    throw Error("BadHolderSignature",
                "presentation proof of possession does not verify");
  }
  if (p.challenge != expected_challenge_hex) {
    throw Error("ChallengeMismatch",
                "presentation challenge does not match the request digest");
  }
  auto check_credential = [&](const Credential& c) {
    std::optional<std::string> key = issuer_key(c.issuer);
    if (!key || !crypto::verify_detached(c.signing_bytes(),
                                         c.issuer_signature, *key)) {
      throw Error("BadIssuerSignature",
                  "credential '" + c.id + "' signature does not verify");
    }
  };
  check_credential(p.main_credential);
  for (const Credential& c : p.additional) check_credential(c);
}

void same_subject(const Presentation& p) {
  const std::string& subject = p.main_credential.subject;
  std::string offenders;
  for (const Credential& c : p.additional) {
    if (c.subject != subject) {
      offenders += (offenders.empty() ? "" : ", ") + c.id;
    }
  }
  if (!offenders.empty()) {
    throw Error("SubjectMismatch",
                "credentials not bound to " + subject + ": " + offenders);
  }
}

std::vector<std::string> required_credentials(const tpl::Policy& aggregated) {
  tpl::Solver solver({aggregated}, nullptr);
  tpl::Term query = tpl::Term::compound(tpl::kRequiresCredentialPredicate,
                                        {tpl::Term::variable("Requirement")});
  std::vector<std::string> out;
  tpl::SolveAllResult all;
  try {
    all = solver.solve_all(query);
  } catch (const Error& e) {
    if (e.code() == "UnknownPredicate") return out;  // no facts declared
    throw;
  }
  for (const tpl::Bindings& b : all.solutions) {
    auto it = b.find("Requirement");
    if (it == b.end()) continue;
    const tpl::Term& t = it->second;
    std::string name;
    if (t.kind() == tpl::Term::Kind::Atom) {
      name = t.name();
    } else if (t.kind() == tpl::Term::Kind::Text) {
      name = t.text_value();
    } else {
      continue;
    }
    if (std::find(out.begin(), out.end(), name) == out.end()) {
      out.push_back(name);
    }
  }
  return out;
}

Credential issue_credential(const std::string& id, const std::string& subject,
                            const std::map<std::string, ClaimValue>& claims,
                            const std::string& holder_verification_key,
                            const std::string& holder_encryption_key,
                            const std::string& issuer_id,
                            const std::string& issuer_signing_secret) {
  Credential c;
  c.id = id;
  c.subject = subject;
  c.issuer = issuer_id;
  c.claims = claims;
  c.verification_key = holder_verification_key;
  c.encryption_key = holder_encryption_key;
  c.issuer_signature =
      crypto::sign_detached(c.signing_bytes(), issuer_signing_secret);
  return c;
}

Presentation make_presentation(Credential main, std::vector<Credential> more,
                               const std::string& challenge_hex,
                               const std::string& holder_signing_secret) {
  Presentation p;
  p.main_credential = std::move(main);
  p.additional = std::move(more);
  p.challenge = challenge_hex;
  p.holder_signature =
      crypto::sign_detached(p.signing_bytes(), holder_signing_secret);
  return p;
}

}  // namespace pdm::creds
