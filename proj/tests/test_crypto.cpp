#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>
#include <set>

#include "doctest.h"
#include "pdm/crypto/suite.hpp"
#include "pdm/error.hpp"

using namespace pdm;
using namespace pdm::crypto;

namespace {

std::string random_blob(std::mt19937_64& rng, size_t len) {
  std::string out(len, '\0');
  for (char& c : out) c = static_cast<char>(rng() & 0xff);
  return out;
}

}  // namespace

TEST_CASE("sha256 matches the standard empty-input vector") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(hash_policy("accept(A,B,C).") == hash_policy("accept(A,B,C)."));
  CHECK(hash_policy("accept(A,B,C).") != hash_policy("accept(A,B,C). "));
}

TEST_CASE("base64url and hex round trip") {
  std::mt19937_64 rng(1);
  for (size_t len : {0, 1, 2, 31, 32, 33, 1000}) {
    std::string blob = random_blob(rng, len);
    Bytes bytes(blob.begin(), blob.end());
    CHECK(b64url_decode(b64url_encode(bytes)) == bytes);
    CHECK(from_hex(to_hex(bytes)) == bytes);
  }
  CHECK_THROWS_AS(b64url_decode("!!!"), Error);
}

TEST_CASE("signing round trip and mutation detection") {
  auto keys = generate_signing_keypair();
  std::string message = "the canonical bytes";
  std::string sig = sign_detached(message, keys.secret_key);
  CHECK(verify_detached(message, sig, keys.public_key));
  CHECK_FALSE(verify_detached(message + "x", sig, keys.public_key));
  auto other = generate_signing_keypair();
  CHECK_FALSE(verify_detached(message, sig, other.public_key));
}

TEST_CASE("deterministic keypairs from seeds") {
  Bytes seed(32, 7);
  auto a = signing_keypair_from_seed(seed);
  auto b = signing_keypair_from_seed(seed);
  CHECK(a.public_key == b.public_key);
  CHECK(a.secret_key == b.secret_key);
  auto ba = box_keypair_from_seed(seed);
  auto bb = box_keypair_from_seed(seed);
  CHECK(ba.public_key == bb.public_key);
}

TEST_CASE("hybrid seal/open round trips and fails closed") {
  std::mt19937_64 rng(2);
  auto node = generate_box_keypair();

  SUBCASE("identity on random payloads") {
    for (int i = 0; i < 20; ++i) {
      std::string payload = random_blob(rng, 1 + rng() % 2048);
      HybridCiphertext ct = hybrid_seal(payload, node.public_key, "aad");
      CHECK(hybrid_open(ct, node.secret_key, "aad") == payload);
    }
  }

  SUBCASE("1 KiB round trip, bit flip breaks it") {
    std::string payload = random_blob(rng, 1024);
    HybridCiphertext ct = hybrid_seal(payload, node.public_key, "product-1");
    CHECK(hybrid_open(ct, node.secret_key, "product-1") == payload);

    Bytes raw = b64url_decode(ct.ct);
    raw[raw.size() / 2] ^= 0x01;
    HybridCiphertext tampered = ct;
    tampered.ct = b64url_encode(raw);
    CHECK_THROWS_AS(hybrid_open(tampered, node.secret_key, "product-1"),
                    Error);
  }

  SUBCASE("wrong recipient key fails") {
    auto other = generate_box_keypair();
    HybridCiphertext ct = hybrid_seal("secret", node.public_key, "aad");
    CHECK_THROWS_WITH_AS(hybrid_open(ct, other.secret_key, "aad"),
                         doctest::Contains("authentication failed"), Error);
  }

  SUBCASE("associated data is covered by the tag") {
    HybridCiphertext ct = hybrid_seal("secret", node.public_key, "product-1");
    CHECK_THROWS_AS(hybrid_open(ct, node.secret_key, "product-2"), Error);
  }
}

TEST_CASE("sealed packages bind the product id") {
  auto node = generate_box_keypair();
  SealedPackage sealed = seal_for_node("package bytes", 2, node.public_key,
                                       "prod-abc");
  CHECK(sealed.recipient == 2);
  CHECK(open_from_seller(sealed, node.secret_key) == "package bytes");

  SealedPackage renamed = sealed;
  renamed.product_id = "prod-other";
  CHECK_THROWS_AS(open_from_seller(renamed, node.secret_key), Error);
}

TEST_CASE("result encryption is only for the buyer") {
  auto buyer = generate_box_keypair();
  auto marketplace = generate_box_keypair();
  HybridCiphertext ct = encrypt_result("share", buyer.public_key, "req-1");
  CHECK(decrypt_result(ct, buyer.secret_key, "req-1") == "share");
  CHECK_THROWS_AS(decrypt_result(ct, marketplace.secret_key, "req-1"), Error);
}

TEST_CASE("nonces and ephemeral keys never repeat within a run") {
  auto node = generate_box_keypair();
  std::set<std::string> nonces, epks;
  for (int i = 0; i < 2000; ++i) {
    HybridCiphertext ct = hybrid_seal("x", node.public_key, "aad");
    CHECK(nonces.insert(ct.nonce).second);
    CHECK(epks.insert(ct.epk).second);
  }
}

TEST_CASE("hkdf is deterministic and input sensitive") {
  Bytes ikm(32, 1), salt(16, 2);
  Bytes a = hkdf_sha256(ikm, salt, "info");
  CHECK(a == hkdf_sha256(ikm, salt, "info"));
  CHECK(a != hkdf_sha256(ikm, salt, "other"));
  CHECK(a.size() == 32);
}
