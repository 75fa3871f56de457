#ifndef PCOL_CKKS_MODARITH_H_
#define PCOL_CKKS_MODARITH_H_

#include <cstdint>

namespace pcol::ckks {

using u64 = std::uint64_t;
using u128 = unsigned __int128;
using i128 = __int128;

// Prime modulus below 2^61 with a precomputed Barrett ratio floor(2^128 / q).
class Modulus {
 public:
  Modulus() = default;
  explicit Modulus(u64 q);

  u64 value() const { return q_; }

  u64 Reduce(u128 x) const;
  u64 Reduce(u64 x) const { return x >= q_ ? x % q_ : x; }
  // Residue of a signed value in [0, q).
  u64 ReduceSigned(std::int64_t x) const;
  u64 ReduceSigned(i128 x) const;

  u64 Add(u64 a, u64 b) const {
    const u64 s = a + b;
    return s >= q_ ? s - q_ : s;
  }
  u64 Sub(u64 a, u64 b) const { return a >= b ? a - b : a + q_ - b; }
  u64 Neg(u64 a) const { return a == 0 ? 0 : q_ - a; }
  u64 Mul(u64 a, u64 b) const { return Reduce(static_cast<u128>(a) * b); }
  u64 Pow(u64 base, u64 exp) const;
  u64 Inverse(u64 a) const;  // q prime

  // Shoup precomputation floor(w * 2^64 / q) for a fixed multiplicand w.
  u64 ShoupPrecompute(u64 w) const {
    return static_cast<u64>((static_cast<u128>(w) << 64) / q_);
  }
  u64 MulShoup(u64 a, u64 w, u64 w_shoup) const {
    const u64 qhat = static_cast<u64>((static_cast<u128>(a) * w_shoup) >> 64);
    const u64 r = a * w - qhat * q_;
    return r >= q_ ? r - q_ : r;
  }

  // Centered representative in (-q/2, q/2].
  std::int64_t Center(u64 a) const {
    return a > q_ / 2 ? static_cast<std::int64_t>(a) - static_cast<std::int64_t>(q_)
                      : static_cast<std::int64_t>(a);
  }

 private:
  u64 q_ = 0;
  u64 ratio_hi_ = 0;
  u64 ratio_lo_ = 0;
};

// Deterministic Miller-Rabin for 64-bit inputs.
bool IsPrime(u64 n);

// Smallest primitive 2n-th root of unity modulo q; requires q = 1 mod 2n.
u64 PrimitiveRoot2n(const Modulus& q, u64 two_n);

}  // namespace pcol::ckks

#endif  // PCOL_CKKS_MODARITH_H_
