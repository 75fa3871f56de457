#ifndef PCOL_CKKS_NTT_H_
#define PCOL_CKKS_NTT_H_

#include <cstddef>
#include <vector>

#include "pcol/ckks/modarith.h"

namespace pcol::ckks {

// Negacyclic NTT over Z_q[X]/(X^n + 1). Forward output index i holds the
// evaluation at psi^(2 brv(i) + 1), where brv reverses log2(n) bits.
class NttTables {
 public:
  NttTables(std::size_t n, const Modulus& q);

  void Forward(u64* a) const;
  void Inverse(u64* a) const;

  std::size_t n() const { return n_; }
  const Modulus& modulus() const { return q_; }
  u64 psi() const { return psi_; }

 private:
  std::size_t n_;
  Modulus q_;
  u64 psi_;
  std::vector<u64> psi_brv_, psi_brv_shoup_;
  std::vector<u64> inv_psi_brv_, inv_psi_brv_shoup_;
  u64 n_inv_, n_inv_shoup_;
};

std::size_t BitReverse(std::size_t x, int bits);

// Index permutation implementing X -> X^galois on NTT-form vectors:
// out[i] = in[perm[i]].
std::vector<std::size_t> GaloisPermutation(std::size_t n, u64 galois);

}  // namespace pcol::ckks

#endif  // PCOL_CKKS_NTT_H_
