#pragma once

#include <cstdint>
#include <vector>

#include "pdm/sss/field.hpp"

namespace pdm::sss {

// One evaluation point of the sharing polynomial. x is the node index
// (1-based), y the field element held by that node.
struct Share {
  int x = 0;
  std::uint64_t y = 0;

  friend bool operator==(const Share&, const Share&) = default;
};

// Full-threshold sharing: every one of the n shares is needed to
// reconstruct (polynomial degree n - 1).
struct SharingParams {
  int n = 3;
  std::uint64_t prime = PrimeField::kDefaultPrime;
};

// Records accepted for sale must fit a 32-bit magnitude so that sums over
// 10^6 records and weighted dot products stay inside the field's signed
// range. Public computation bounds are checked against this constant.
inline constexpr std::int64_t kRecordBound = (1LL << 31) - 1;

// Splits secret into n shares: evaluations at x = 1..n of a uniformly random
// degree-(n-1) polynomial whose constant term encodes the secret.
// Throws Error("SecretOutOfRange") if |secret| >= p/2.
std::vector<Share> share(std::int64_t secret, const SharingParams& params,
                         RandomSource& rng);

// Lagrange interpolation at x = 0 over exactly n distinct shares, decoded by
// centering. Throws Error("InsufficientShares") when fewer (or more) than n
// shares are supplied and Error("DuplicateEvaluationPoint") on repeated x.
std::int64_t reconstruct(const std::vector<Share>& shares,
                         const SharingParams& params);

// Share-local linear combinations. Both operate on the y-values one node
// holds for a sequence of records; reconstructing the per-node outputs
// yields the plaintext sum / dot product.
std::uint64_t local_sum(const std::vector<std::uint64_t>& record_shares,
                        const PrimeField& field);

// weights are public signed integers. Throws Error("LengthMismatch") and
// Error("ResultOutOfRange") when the statically checkable bound
// sum(|w_i|) * kRecordBound would leave the signed field range.
std::uint64_t local_dot(const std::vector<std::uint64_t>& record_shares,
                        const std::vector<std::int64_t>& weights,
                        const PrimeField& field);

// Bound checks shared with request validation (public data only).
void check_sum_bound(std::uint64_t record_count, const PrimeField& field);
void check_dot_bound(const std::vector<std::int64_t>& weights,
                     const PrimeField& field);

}  // namespace pdm::sss
