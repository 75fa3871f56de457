#include "pcol/ckks/modarith.h"

#include <array>

#include "pcol/errors.h"

namespace pcol::ckks {

Modulus::Modulus(u64 q) : q_(q) {
  if (q < 2 || q >= (u64{1} << 61)) {
    throw Error(ErrorCode::kInvalidParams, "modulus must be in [2, 2^61)");
  }
  // floor(2^128 / q) = floor((2^128 - 1) / q) for q not a power of two.
  const u128 all_ones = ~u128{0};
  u128 ratio = all_ones / q;
  if (all_ones % q == q - 1) ++ratio;
  ratio_hi_ = static_cast<u64>(ratio >> 64);
  ratio_lo_ = static_cast<u64>(ratio);
}

u64 Modulus::Reduce(u128 x) const {
  const u64 x0 = static_cast<u64>(x);
  const u64 x1 = static_cast<u64>(x >> 64);
  const u128 t = (static_cast<u128>(x0) * ratio_lo_) >> 64;
  const u128 m1 = static_cast<u128>(x0) * ratio_hi_ + t;
  const u128 m2 = static_cast<u128>(x1) * ratio_lo_ + static_cast<u64>(m1);
  const u64 qhat =
      x1 * ratio_hi_ + static_cast<u64>(m1 >> 64) + static_cast<u64>(m2 >> 64);
  u64 r = x0 - qhat * q_;
  while (r >= q_) r -= q_;
  return r;
}

u64 Modulus::ReduceSigned(std::int64_t x) const {
  if (x >= 0) return Reduce(static_cast<u64>(x));
  const u64 m = Reduce(static_cast<u64>(-(x + 1)) + 1);
  return Neg(m);
}

u64 Modulus::ReduceSigned(i128 x) const {
  if (x >= 0) return Reduce(static_cast<u128>(x) % q_);
  const u128 mag = static_cast<u128>(-(x + 1)) + 1;
  return Neg(static_cast<u64>(mag % q_));
}

u64 Modulus::Pow(u64 base, u64 exp) const {
  u64 result = 1 % q_;
  base = Reduce(base);
  while (exp > 0) {
    if (exp & 1) result = Mul(result, base);
    base = Mul(base, base);
    exp >>= 1;
  }
  return result;
}

u64 Modulus::Inverse(u64 a) const {
  if (Reduce(a) == 0) throw Error(ErrorCode::kInvalidParams, "zero has no inverse");
  return Pow(a, q_ - 2);
}

bool IsPrime(u64 n) {
  if (n < 2) return false;
  static constexpr std::array<u64, 12> kBases = {2, 3, 5, 7, 11, 13,
                                                 17, 19, 23, 29, 31, 37};
  for (u64 p : kBases) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  auto mulmod = [n](u64 a, u64 b) {
    return static_cast<u64>(static_cast<u128>(a) * b % n);
  };
  for (u64 a : kBases) {
    u64 x = 1, base = a, e = d;
    while (e > 0) {
      if (e & 1) x = mulmod(x, base);
      base = mulmod(base, base);
      e >>= 1;
    }
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

u64 PrimitiveRoot2n(const Modulus& q, u64 two_n) {
  const u64 p = q.value();
  if ((p - 1) % two_n != 0) {
    throw Error(ErrorCode::kInvalidParams, "prime is not 1 mod 2n");
  }
  // For a power-of-two order, psi is primitive iff psi^(n) = -1.
  for (u64 g = 2; g < p; ++g) {
    const u64 psi = q.Pow(g, (p - 1) / two_n);
    if (q.Pow(psi, two_n / 2) != p - 1) continue;
    // Smallest primitive root among the odd powers, for determinism.
    u64 best = psi;
    const u64 psi2 = q.Mul(psi, psi);
    u64 cur = psi;
    for (u64 k = 1; k < two_n; k += 2) {
      if (cur < best) best = cur;
      cur = q.Mul(cur, psi2);
    }
    return best;
  }
  throw Error(ErrorCode::kInvalidParams, "no primitive 2n-th root found");
}

}  // namespace pcol::ckks
