#pragma once

#include <cstdint>
#include <functional>

namespace pdm::sss {

// Uniform 64-bit generator; shares are sampled from it by rejection.
using RandomSource = std::function<std::uint64_t()>;

// Cryptographically seeded default source (libsodium).
RandomSource default_random();

// Arithmetic modulo a prime that fits in 61 bits. The production modulus is
// 2^61 - 1; tests also instantiate tiny fields (e.g. p = 101) for
// distribution checks.
class PrimeField {
 public:
  static constexpr std::uint64_t kDefaultPrime = (1ULL << 61) - 1;

  explicit PrimeField(std::uint64_t prime = kDefaultPrime);

  std::uint64_t prime() const noexcept { return p_; }

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const;
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const;
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const;
  std::uint64_t pow(std::uint64_t base, std::uint64_t exp) const;
  std::uint64_t inv(std::uint64_t a) const;  // a != 0
  std::uint64_t neg(std::uint64_t a) const;

  // Signed values are centered: v >= 0 maps to v, v < 0 maps to p + v.
  // Requires |v| < p/2.
  std::uint64_t encode(std::int64_t v) const;
  std::int64_t decode(std::uint64_t e) const;

  // Uniform element of [0, p) by rejection sampling.
  std::uint64_t uniform(RandomSource& rng) const;

 private:
  std::uint64_t p_;
  std::uint64_t rejection_mask_;
};

}  // namespace pdm::sss
