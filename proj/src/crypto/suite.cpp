#include "pdm/crypto/suite.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

#include "pdm/error.hpp"

namespace pdm::crypto {

namespace {

void ensure_sodium() {
  if (sodium_init() < 0) throw std::runtime_error("libsodium init failed");
}

Bytes to_bytes(const std::string& s) {
  return Bytes(s.begin(), s.end());
}

Bytes decode_key(const std::string& b64, size_t expected, const char* what) {
  Bytes k = b64url_decode(b64);
  if (k.size() != expected) {
    throw Error("InvalidKey", std::string(what) + ": expected " +
                                  std::to_string(expected) + " bytes");
  }
  return k;
}

}  // namespace

std::string to_hex(const Bytes& data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

Bytes from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw Error("InvalidHex", "odd length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error("InvalidHex", "bad digit");
  };
  Bytes out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) |
                                       nibble(hex[2 * i + 1]));
  }
  return out;
}

std::string b64url_encode(const Bytes& data) {
  ensure_sodium();
  std::string out(sodium_base64_encoded_len(
                      data.size(), sodium_base64_VARIANT_URLSAFE_NO_PADDING),
                  '\0');
  sodium_bin2base64(out.data(), out.size(), data.data(), data.size(),
                    sodium_base64_VARIANT_URLSAFE_NO_PADDING);
  out.resize(std::strlen(out.c_str()));
  return out;
}

Bytes b64url_decode(const std::string& text) {
  ensure_sodium();
  Bytes out(text.size() + 4);
  size_t out_len = 0;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(),
                        nullptr, &out_len, nullptr,
                        sodium_base64_VARIANT_URLSAFE_NO_PADDING) != 0) {
    throw Error("InvalidBase64", "malformed base64url input");
  }
  out.resize(out_len);
  return out;
}

Bytes sha256(const Bytes& data) {
  ensure_sodium();
  Bytes digest(crypto_hash_sha256_BYTES);
  crypto_hash_sha256(digest.data(), data.data(), data.size());
  return digest;
}

std::string sha256_hex(const std::string& data) {
  return to_hex(sha256(to_bytes(data)));
}

std::string hash_policy(const std::string& source) {
  return sha256_hex(source);
}

Bytes hkdf_sha256(const Bytes& ikm, const Bytes& salt,
                  const std::string& info) {
  ensure_sodium();
  // extract
  Bytes prk(crypto_auth_hmacsha256_BYTES);
  crypto_auth_hmacsha256_state st;
  Bytes key = salt.empty() ? Bytes(crypto_auth_hmacsha256_KEYBYTES, 0) : salt;
  crypto_auth_hmacsha256_init(&st, key.data(), key.size());
  crypto_auth_hmacsha256_update(&st, ikm.data(), ikm.size());
  crypto_auth_hmacsha256_final(&st, prk.data());
  // expand, single block (32 bytes out)
  Bytes out(crypto_auth_hmacsha256_BYTES);
  crypto_auth_hmacsha256_init(&st, prk.data(), prk.size());
  crypto_auth_hmacsha256_update(
      &st, reinterpret_cast<const std::uint8_t*>(info.data()), info.size());
  std::uint8_t counter = 1;
  crypto_auth_hmacsha256_update(&st, &counter, 1);
  crypto_auth_hmacsha256_final(&st, out.data());
  return out;
}

SigningKeypair generate_signing_keypair() {
  ensure_sodium();
  Bytes pk(crypto_sign_PUBLICKEYBYTES), sk(crypto_sign_SECRETKEYBYTES);
  crypto_sign_keypair(pk.data(), sk.data());
  return {b64url_encode(pk), b64url_encode(sk)};
}

SigningKeypair signing_keypair_from_seed(const Bytes& seed32) {
  ensure_sodium();
  if (seed32.size() != crypto_sign_SEEDBYTES) {
    throw Error("InvalidKey", "signing seed must be 32 bytes");
  }
  Bytes pk(crypto_sign_PUBLICKEYBYTES), sk(crypto_sign_SECRETKEYBYTES);
  crypto_sign_seed_keypair(pk.data(), sk.data(), seed32.data());
  return {b64url_encode(pk), b64url_encode(sk)};
}

BoxKeypair generate_box_keypair() {
  ensure_sodium();
  Bytes sk(crypto_scalarmult_SCALARBYTES);
  randombytes_buf(sk.data(), sk.size());
  Bytes pk(crypto_scalarmult_BYTES);
  crypto_scalarmult_base(pk.data(), sk.data());
  return {b64url_encode(pk), b64url_encode(sk)};
}

BoxKeypair box_keypair_from_seed(const Bytes& seed32) {
  ensure_sodium();
  if (seed32.size() != crypto_scalarmult_SCALARBYTES) {
    throw Error("InvalidKey", "box seed must be 32 bytes");
  }
  Bytes pk(crypto_scalarmult_BYTES);
  crypto_scalarmult_base(pk.data(), seed32.data());
  return {b64url_encode(pk), b64url_encode(seed32)};
}

std::string sign_detached(const std::string& message,
                          const std::string& secret_key_b64) {
  ensure_sodium();
  Bytes sk = decode_key(secret_key_b64, crypto_sign_SECRETKEYBYTES,
                        "signing secret key");
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr,
                       reinterpret_cast<const std::uint8_t*>(message.data()),
                       message.size(), sk.data());
  return b64url_encode(sig);
}

bool verify_detached(const std::string& message, const std::string& sig_b64,
                     const std::string& public_key_b64) {
  ensure_sodium();
  Bytes sig, pk;
  try {
    sig = b64url_decode(sig_b64);
    pk = decode_key(public_key_b64, crypto_sign_PUBLICKEYBYTES,
                    "signing public key");
  } catch (const Error&) {
    return false;
  }
  if (sig.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(
             sig.data(),
             reinterpret_cast<const std::uint8_t*>(message.data()),
             message.size(), pk.data()) == 0;
}

namespace {

// Context string mixed into key derivation; versions the wire format.
constexpr const char* kHpkeInfo = "pdm-hpke-v1";

Bytes derive_session_key(const Bytes& shared, const Bytes& epk,
                         const Bytes& rpk) {
  Bytes ikm;
  ikm.reserve(shared.size() + epk.size() + rpk.size());
  ikm.insert(ikm.end(), shared.begin(), shared.end());
  ikm.insert(ikm.end(), epk.begin(), epk.end());
  ikm.insert(ikm.end(), rpk.begin(), rpk.end());
  return hkdf_sha256(ikm, {}, kHpkeInfo);
}

}  // namespace

HybridCiphertext hybrid_seal(const std::string& plaintext,
                             const std::string& recipient_public_b64,
                             const std::string& aad) {
  ensure_sodium();
  Bytes rpk = decode_key(recipient_public_b64, crypto_scalarmult_BYTES,
                         "recipient public key");

  Bytes esk(crypto_scalarmult_SCALARBYTES);
  randombytes_buf(esk.data(), esk.size());
  Bytes epk(crypto_scalarmult_BYTES);
  crypto_scalarmult_base(epk.data(), esk.data());

  Bytes shared(crypto_scalarmult_BYTES);
  if (crypto_scalarmult(shared.data(), esk.data(), rpk.data()) != 0) {
    throw Error("InvalidKey", "key agreement failed");
  }
  Bytes key = derive_session_key(shared, epk, rpk);

  Bytes nonce(crypto_aead_chacha20poly1305_ietf_NPUBBYTES);
  randombytes_buf(nonce.data(), nonce.size());

  Bytes ct(plaintext.size() + crypto_aead_chacha20poly1305_ietf_ABYTES);
  unsigned long long ct_len = 0;
  crypto_aead_chacha20poly1305_ietf_encrypt(
      ct.data(), &ct_len,
      reinterpret_cast<const std::uint8_t*>(plaintext.data()),
      plaintext.size(), reinterpret_cast<const std::uint8_t*>(aad.data()),
      aad.size(), nullptr, nonce.data(), key.data());
  ct.resize(ct_len);

  return {b64url_encode(epk), b64url_encode(nonce), b64url_encode(ct)};
}

std::string hybrid_open(const HybridCiphertext& boxed,
                        const std::string& recipient_secret_b64,
                        const std::string& aad) {
  ensure_sodium();
  Bytes rsk = decode_key(recipient_secret_b64, crypto_scalarmult_SCALARBYTES,
                         "recipient secret key");
  Bytes epk, nonce, ct;
  try {
    epk = decode_key(boxed.epk, crypto_scalarmult_BYTES, "ephemeral key");
    nonce = decode_key(boxed.nonce, crypto_aead_chacha20poly1305_ietf_NPUBBYTES,
                       "nonce");
    ct = b64url_decode(boxed.ct);
  } catch (const Error&) {
    throw Error("DecryptionFailure", "malformed ciphertext envelope");
  }
  if (ct.size() < crypto_aead_chacha20poly1305_ietf_ABYTES) {
    throw Error("DecryptionFailure", "ciphertext too short");
  }

  Bytes rpk(crypto_scalarmult_BYTES);
  crypto_scalarmult_base(rpk.data(), rsk.data());
  Bytes shared(crypto_scalarmult_BYTES);
  if (crypto_scalarmult(shared.data(), rsk.data(), epk.data()) != 0) {
    throw Error("DecryptionFailure", "key agreement failed");
  }
  Bytes key = derive_session_key(shared, epk, rpk);

  std::string pt(ct.size() - crypto_aead_chacha20poly1305_ietf_ABYTES, '\0');
  unsigned long long pt_len = 0;
  if (crypto_aead_chacha20poly1305_ietf_decrypt(
          reinterpret_cast<std::uint8_t*>(pt.data()), &pt_len, nullptr,
          ct.data(), ct.size(),
          reinterpret_cast<const std::uint8_t*>(aad.data()), aad.size(),
          nonce.data(), key.data()) != 0) {
    throw Error("DecryptionFailure", "authentication failed");
  }
  pt.resize(pt_len);
  return pt;
}

SealedPackage seal_for_node(const std::string& package_bytes, int node_index,
                            const std::string& node_public_b64,
                            const std::string& product_id) {
  return {node_index, product_id,
          hybrid_seal(package_bytes, node_public_b64, product_id)};
}

std::string open_from_seller(const SealedPackage& sealed,
                             const std::string& node_secret_b64) {
  return hybrid_open(sealed.box, node_secret_b64, sealed.product_id);
}

HybridCiphertext encrypt_result(const std::string& share_bytes,
                                const std::string& buyer_public_b64,
                                const std::string& request_id) {
  return hybrid_seal(share_bytes, buyer_public_b64, request_id);
}

std::string decrypt_result(const HybridCiphertext& boxed,
                           const std::string& buyer_secret_b64,
                           const std::string& request_id) {
  return hybrid_open(boxed, buyer_secret_b64, request_id);
}

}  // namespace pdm::crypto
