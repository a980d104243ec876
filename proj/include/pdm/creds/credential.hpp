#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "pdm/tpl/term.hpp"

namespace pdm::creds {

using ClaimValue = std::variant<std::string, std::int64_t>;

// A signed attestation of claims about a subject. The issuer signature
// covers the canonical serialization of every other field.
struct Credential {
  std::string id;
  std::string subject;  // DID of the holder
  std::string issuer;   // issuer id, resolvable to a verification key
  std::map<std::string, ClaimValue> claims;
  std::string verification_key;  // holder's Ed25519 public key (b64url)
  std::string encryption_key;    // holder's X25519 public key (b64url)
  std::string issuer_signature;  // b64url

  nlohmann::json to_json() const;
  static Credential from_json(const nlohmann::json& doc);

  // Canonical bytes the issuer signs: sorted keys, compact, UTF-8,
  // integers unquoted, signature field excluded.
  std::string signing_bytes() const;
};

// Credentials bundled with a holder proof of possession. The challenge binds
// the presentation to one computation request (it equals the request digest).
struct Presentation {
  Credential main_credential;
  std::vector<Credential> additional;
  std::string challenge;  // hex, 32 bytes
  std::string holder_signature;

  nlohmann::json to_json() const;
  static Presentation from_json(const nlohmann::json& doc);

  std::string signing_bytes() const;  // everything but holder_signature
};

bool is_wellformed_did(const std::string& did);

// Maps an issuer id to its Ed25519 verification key (b64url); empty optional
// when the issuer is unknown. Backed by the DID resolver in production.
using IssuerKeyLookup =
    std::function<std::optional<std::string>(const std::string& issuer_id)>;

// Throws Error("BadHolderSignature"), Error("ChallengeMismatch") or
// Error("BadIssuerSignature") naming the offending credential id.
void verify_presentation(const Presentation& p,
                         const std::string& expected_challenge_hex,
                         const IssuerKeyLookup& issuer_key);

// Throws Error("SubjectMismatch") listing the offending credential ids when
// any credential names a different subject than the main credential.
void same_subject(const Presentation& p);

// All solutions of requires_credential/1 over the (aggregated) policy,
// deduplicated, first-occurrence order.
std::vector<std::string> required_credentials(const tpl::Policy& aggregated);

// Test-issuer utility: builds and signs a credential.
Credential issue_credential(const std::string& id, const std::string& subject,
                            const std::map<std::string, ClaimValue>& claims,
                            const std::string& holder_verification_key,
                            const std::string& holder_encryption_key,
                            const std::string& issuer_id,
                            const std::string& issuer_signing_secret);

// Assembles and signs a presentation with the holder's signing key.
Presentation make_presentation(Credential main, std::vector<Credential> more,
                               const std::string& challenge_hex,
                               const std::string& holder_signing_secret);

}  // namespace pdm::creds
