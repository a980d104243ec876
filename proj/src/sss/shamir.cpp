#include "pdm/sss/shamir.hpp"

#include <cstdlib>
#include <set>
#include <string>

#include "pdm/error.hpp"

namespace pdm::sss {

namespace {

std::uint64_t eval_poly(const std::vector<std::uint64_t>& coeffs,
                        std::uint64_t x, const PrimeField& f) {
  // Horner, highest coefficient first is not required; coeffs[k] is for x^k.
  std::uint64_t acc = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    acc = f.add(f.mul(acc, x), *it);
  }
  return acc;
}

}  // namespace

std::vector<Share> share(std::int64_t secret, const SharingParams& params,
                         RandomSource& rng) {
  if (params.n < 2) throw Error("InvalidParams", "node count must be >= 2");
  PrimeField f(params.prime);

  std::uint64_t a0;
  try {
    a0 = f.encode(secret);
  } catch (const std::out_of_range&) {
    throw Error("SecretOutOfRange",
                "secret " + std::to_string(secret) + " exceeds |v| < p/2");
  }

  std::vector<std::uint64_t> coeffs(static_cast<size_t>(params.n));
  coeffs[0] = a0;
  for (int k = 1; k < params.n; ++k) coeffs[static_cast<size_t>(k)] = f.uniform(rng);

  std::vector<Share> out;
  out.reserve(static_cast<size_t>(params.n));
  for (int i = 1; i <= params.n; ++i) {
    out.push_back(Share{i, eval_poly(coeffs, static_cast<std::uint64_t>(i), f)});
  }
  return out;
}

std::int64_t reconstruct(const std::vector<Share>& shares,
                         const SharingParams& params) {
  PrimeField f(params.prime);
  if (static_cast<int>(shares.size()) != params.n) {
    throw Error("InsufficientShares",
                "need exactly " + std::to_string(params.n) + " shares, got " +
                    std::to_string(shares.size()));
  }
  std::set<int> seen;
  for (const Share& s : shares) {
    if (s.x < 1) throw Error("InvalidShare", "evaluation point must be >= 1");
    if (!seen.insert(s.x).second) {
      throw Error("DuplicateEvaluationPoint",
                  "duplicate x = " + std::to_string(s.x));
    }
  }

  // Lagrange basis at x = 0: l_i = prod_{j != i} x_j / (x_j - x_i).
  std::uint64_t acc = 0;
  for (size_t i = 0; i < shares.size(); ++i) {
    std::uint64_t num = 1;
    std::uint64_t den = 1;
    std::uint64_t xi = f.encode(shares[i].x);
    for (size_t j = 0; j < shares.size(); ++j) {
      if (j == i) continue;
      std::uint64_t xj = f.encode(shares[j].x);
      num = f.mul(num, xj);
      den = f.mul(den, f.sub(xj, xi));
    }
    acc = f.add(acc, f.mul(shares[i].y, f.mul(num, f.inv(den))));
  }
  return f.decode(acc);
}

std::uint64_t local_sum(const std::vector<std::uint64_t>& record_shares,
                        const PrimeField& field) {
  std::uint64_t acc = 0;
  for (std::uint64_t y : record_shares) acc = field.add(acc, y % field.prime());
  return acc;
}

std::uint64_t local_dot(const std::vector<std::uint64_t>& record_shares,
                        const std::vector<std::int64_t>& weights,
                        const PrimeField& field) {
  if (record_shares.size() != weights.size()) {
    throw Error("LengthMismatch",
                "weights length " + std::to_string(weights.size()) +
                    " != records length " + std::to_string(record_shares.size()));
  }
  check_dot_bound(weights, field);
  std::uint64_t acc = 0;
  for (size_t i = 0; i < record_shares.size(); ++i) {
    std::uint64_t w = field.encode(weights[i]);
    acc = field.add(acc, field.mul(record_shares[i] % field.prime(), w));
  }
  return acc;
}

void check_sum_bound(std::uint64_t record_count, const PrimeField& field) {
  const unsigned __int128 bound =
      static_cast<unsigned __int128>(record_count) *
      static_cast<unsigned __int128>(kRecordBound);
  if (bound >= field.prime() / 2) {
    throw Error("ResultOutOfRange", "sum over " + std::to_string(record_count) +
                                        " records may leave the field range");
  }
}

void check_dot_bound(const std::vector<std::int64_t>& weights,
                     const PrimeField& field) {
  unsigned __int128 total = 0;
  for (std::int64_t w : weights) {
    unsigned __int128 mag =
        w >= 0 ? static_cast<unsigned __int128>(w)
               : static_cast<unsigned __int128>(-(w + 1)) + 1;
    total += mag * static_cast<unsigned __int128>(kRecordBound);
    if (total >= field.prime() / 2) {
      throw Error("ResultOutOfRange",
                  "weighted sum bound exceeds the field range");
    }
  }
}

}  // namespace pdm::sss
