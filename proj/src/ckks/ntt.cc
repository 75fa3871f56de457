#include "pcol/ckks/ntt.h"

#include <bit>

namespace pcol::ckks {

std::size_t BitReverse(std::size_t x, int bits) {
  std::size_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (x & 1);
    x >>= 1;
  }
  return r;
}

NttTables::NttTables(std::size_t n, const Modulus& q)
    : n_(n), q_(q), psi_(PrimitiveRoot2n(q, 2 * n)) {
  const int bits = std::countr_zero(n);
  const u64 inv_psi = q_.Inverse(psi_);
  std::vector<u64> pow(n), inv_pow(n);
  pow[0] = inv_pow[0] = 1;
  for (std::size_t i = 1; i < n; ++i) {
    pow[i] = q_.Mul(pow[i - 1], psi_);
    inv_pow[i] = q_.Mul(inv_pow[i - 1], inv_psi);
  }
  psi_brv_.resize(n);
  psi_brv_shoup_.resize(n);
  inv_psi_brv_.resize(n);
  inv_psi_brv_shoup_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = BitReverse(i, bits);
    psi_brv_[i] = pow[r];
    psi_brv_shoup_[i] = q_.ShoupPrecompute(pow[r]);
    inv_psi_brv_[i] = inv_pow[r];
    inv_psi_brv_shoup_[i] = q_.ShoupPrecompute(inv_pow[r]);
  }
  n_inv_ = q_.Inverse(n);
  n_inv_shoup_ = q_.ShoupPrecompute(n_inv_);
}

void NttTables::Forward(u64* a) const {
  std::size_t t = n_;
  for (std::size_t m = 1; m < n_; m <<= 1) {
    t >>= 1;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j1 = 2 * i * t;
      const u64 w = psi_brv_[m + i];
      const u64 ws = psi_brv_shoup_[m + i];
      for (std::size_t j = j1; j < j1 + t; ++j) {
        const u64 u = a[j];
        const u64 v = q_.MulShoup(a[j + t], w, ws);
        a[j] = q_.Add(u, v);
        a[j + t] = q_.Sub(u, v);
      }
    }
  }
}

void NttTables::Inverse(u64* a) const {
  std::size_t t = 1;
  for (std::size_t m = n_; m > 1; m >>= 1) {
    const std::size_t h = m >> 1;
    std::size_t j1 = 0;
    for (std::size_t i = 0; i < h; ++i) {
      const u64 w = inv_psi_brv_[h + i];
      const u64 ws = inv_psi_brv_shoup_[h + i];
      for (std::size_t j = j1; j < j1 + t; ++j) {
        const u64 u = a[j];
        const u64 v = a[j + t];
        a[j] = q_.Add(u, v);
        a[j + t] = q_.MulShoup(q_.Sub(u, v), w, ws);
      }
      j1 += 2 * t;
    }
    t <<= 1;
  }
  for (std::size_t j = 0; j < n_; ++j) a[j] = q_.MulShoup(a[j], n_inv_, n_inv_shoup_);
}

std::vector<std::size_t> GaloisPermutation(std::size_t n, u64 galois) {
  const int bits = std::countr_zero(n);
  const u64 two_n_mask = 2 * n - 1;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) {
    const u64 exponent = 2 * BitReverse(i, bits) + 1;
    const u64 target = (exponent * galois) & two_n_mask;
    perm[i] = BitReverse(static_cast<std::size_t>((target - 1) >> 1), bits);
  }
  return perm;
}

}  // namespace pcol::ckks
