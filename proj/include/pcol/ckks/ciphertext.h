#ifndef PCOL_CKKS_CIPHERTEXT_H_
#define PCOL_CKKS_CIPHERTEXT_H_

#include <cstddef>

#include "pcol/ckks/poly.h"

namespace pcol::ckks {

// Encoded message m(X) with slots = m / scale. NTT form over q_0..q_level.
struct Plaintext {
  RnsPoly poly;
  int level = 0;
  double scale = 1.0;
  double value_bound = 0.0;  // max |slot| at encoding time
};

// (c0, c1) with c0 + c1 s = m + e over q_0..q_level. `noise` is a heuristic
// bound on |e| in coefficient units; `value_bound` bounds |slot values|.
struct Ciphertext {
  RnsPoly c0;
  RnsPoly c1;
  int level = 0;
  double scale = 1.0;
  long double noise = 0.0L;
  double value_bound = 0.0;

  std::size_t slot_count() const { return c0.n() / 2; }
};

}  // namespace pcol::ckks

#endif  // PCOL_CKKS_CIPHERTEXT_H_
