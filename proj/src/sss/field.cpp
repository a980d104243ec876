#include "pdm/sss/field.hpp"

#include <sodium.h>

#include <bit>
#include <cassert>
#include <stdexcept>

namespace pdm::sss {

RandomSource default_random() {
  if (sodium_init() < 0) throw std::runtime_error("libsodium init failed");
  return [] {
    std::uint64_t v;
    randombytes_buf(&v, sizeof(v));
    return v;
  };
}

PrimeField::PrimeField(std::uint64_t prime) : p_(prime) {
  if (prime < 3 || prime > (1ULL << 61)) {
    throw std::invalid_argument("prime out of supported range");
  }
  int bits = 64 - std::countl_zero(prime);
  rejection_mask_ = (bits >= 64) ? ~0ULL : ((1ULL << bits) - 1);
}

std::uint64_t PrimeField::add(std::uint64_t a, std::uint64_t b) const {
  std::uint64_t s = a + b;  // no overflow: both < 2^61
  return s >= p_ ? s - p_ : s;
}

std::uint64_t PrimeField::sub(std::uint64_t a, std::uint64_t b) const {
  return a >= b ? a - b : a + p_ - b;
}

std::uint64_t PrimeField::mul(std::uint64_t a, std::uint64_t b) const {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(a) * b) % p_);
}

std::uint64_t PrimeField::pow(std::uint64_t base, std::uint64_t exp) const {
  std::uint64_t acc = 1 % p_;
  std::uint64_t cur = base % p_;
  while (exp > 0) {
    if (exp & 1) acc = mul(acc, cur);
    cur = mul(cur, cur);
    exp >>= 1;
  }
  return acc;
}

std::uint64_t PrimeField::inv(std::uint64_t a) const {
  assert(a % p_ != 0);
  return pow(a, p_ - 2);  // Fermat; p is prime
}

std::uint64_t PrimeField::neg(std::uint64_t a) const {
  return a == 0 ? 0 : p_ - a;
}

std::uint64_t PrimeField::encode(std::int64_t v) const {
  const std::uint64_t half = p_ / 2;
  if (v >= 0) {
    if (static_cast<std::uint64_t>(v) >= half) {
      throw std::out_of_range("value exceeds encoding range");
    }
    return static_cast<std::uint64_t>(v);
  }
  std::uint64_t mag = static_cast<std::uint64_t>(-(v + 1)) + 1;
  if (mag >= half) throw std::out_of_range("value exceeds encoding range");
  return p_ - mag;
}

std::int64_t PrimeField::decode(std::uint64_t e) const {
  if (e > p_ / 2) return -static_cast<std::int64_t>(p_ - e);
  return static_cast<std::int64_t>(e);
}

std::uint64_t PrimeField::uniform(RandomSource& rng) const {
  for (;;) {
    std::uint64_t v = rng() & rejection_mask_;
    if (v < p_) return v;
  }
}

}  // namespace pdm::sss
