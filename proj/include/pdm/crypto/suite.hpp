#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pdm::crypto {

using Bytes = std::vector<std::uint8_t>;

std::string to_hex(const Bytes& data);
Bytes from_hex(const std::string& hex);

// base64url without padding; used for every binary field on the wire.
std::string b64url_encode(const Bytes& data);
Bytes b64url_decode(const std::string& text);

Bytes sha256(const Bytes& data);
std::string sha256_hex(const std::string& data);

// Digest of a policy's exact source bytes; never normalized. This is the
// value sealed inside data packages and recomputed by every node.
std::string hash_policy(const std::string& source);

// HKDF-SHA-256 (extract + expand), 32-byte output.
Bytes hkdf_sha256(const Bytes& ikm, const Bytes& salt, const std::string& info);

struct SigningKeypair {
  std::string public_key;  // b64url, 32 bytes (Ed25519)
  std::string secret_key;  // b64url, 64 bytes
};

struct BoxKeypair {
  std::string public_key;  // b64url, 32 bytes (X25519)
  std::string secret_key;  // b64url, 32 bytes
};

SigningKeypair generate_signing_keypair();
SigningKeypair signing_keypair_from_seed(const Bytes& seed32);
BoxKeypair generate_box_keypair();
BoxKeypair box_keypair_from_seed(const Bytes& seed32);

std::string sign_detached(const std::string& message,
                          const std::string& secret_key_b64);
bool verify_detached(const std::string& message, const std::string& sig_b64,
                     const std::string& public_key_b64);

// Hybrid public-key encryption: ephemeral X25519 agreement, HKDF-SHA-256 key
// derivation, ChaCha20-Poly1305 AEAD. The associated data is bound into the
// tag; any tamper of ciphertext or aad fails decryption.
struct HybridCiphertext {
  std::string epk;    // b64url ephemeral public key
  std::string nonce;  // b64url 12 bytes
  std::string ct;     // b64url ciphertext + tag
};

HybridCiphertext hybrid_seal(const std::string& plaintext,
                             const std::string& recipient_public_b64,
                             const std::string& aad);

// Throws Error("DecryptionFailure") on wrong key or any tamper.
std::string hybrid_open(const HybridCiphertext& boxed,
                        const std::string& recipient_secret_b64,
                        const std::string& aad);

// Sealed data package for one computation node; aad is the product id.
struct SealedPackage {
  int recipient = 0;  // node index
  std::string product_id;
  HybridCiphertext box;
};

SealedPackage seal_for_node(const std::string& package_bytes, int node_index,
                            const std::string& node_public_b64,
                            const std::string& product_id);
std::string open_from_seller(const SealedPackage& sealed,
                             const std::string& node_secret_b64);

// Result-share envelope for the buyer; aad is the request id.
HybridCiphertext encrypt_result(const std::string& share_bytes,
                                const std::string& buyer_public_b64,
                                const std::string& request_id);
std::string decrypt_result(const HybridCiphertext& boxed,
                           const std::string& buyer_secret_b64,
                           const std::string& request_id);

}  // namespace pdm::crypto
