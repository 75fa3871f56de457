#ifndef PCOL_CKKS_KEYS_H_
#define PCOL_CKKS_KEYS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "pcol/ckks/poly.h"
#include "pcol/ckks/sampling.h"

namespace pcol::ckks {

struct SecretKey {
  std::vector<std::int64_t> coeffs;  // small signed coefficients
  RnsPoly ntt;                       // full chain plus special prime
};

// b = -a s + e at the top level.
struct PublicKey {
  RnsPoly b;
  RnsPoly a;
};

// One digit per chain prime: b_j + a_j s = P g_j s_from + e_j over Q_L P,
// where g_j is 1 mod q_j and 0 mod the other chain primes.
struct KeySwitchKey {
  std::vector<RnsPoly> b;
  std::vector<RnsPoly> a;
  bool empty() const { return b.empty(); }
};

// Keyed by left-rotation step in [0, n/2).
struct RotationKeys {
  std::map<std::size_t, KeySwitchKey> keys;
  const KeySwitchKey* Find(std::size_t step) const;
};

struct KeyMaterial {
  SecretKey secret_key;
  PublicKey public_key;
  KeySwitchKey relin_key;
  RotationKeys rotation_keys;
};

SecretKey MakeSecretKey(const Context& ctx, std::vector<std::int64_t> coeffs);

PublicKey GenPublicKey(const Context& ctx, const SecretKey& sk, const RnsPoly& a,
                       Prng& noise);

// Switching key from `from_ntt` (full basis, NTT form) to `to`, with the
// uniform a_j drawn from `crs`.
KeySwitchKey GenKeySwitchKey(const Context& ctx, const RnsPoly& from_ntt,
                             const SecretKey& to, Prng& noise, Prng& crs);

// The gadget term P g_j s for digit j: s at component j times (P mod q_j).
RnsPoly GadgetTerm(const Context& ctx, const RnsPoly& s_ntt, std::size_t digit);

// s(X^g) on a full-basis NTT-form secret.
RnsPoly GaloisSecret(const Context& ctx, const RnsPoly& s_ntt, std::size_t steps);

std::size_t NormalizeStep(const Context& ctx, long long steps);
// Steps 1, 2, 4, .. below `active_slots` rounded up to a power of two.
std::vector<std::size_t> SumSlotsSteps(std::size_t active_slots);

// Single-party key generation, deterministic in `seed`.
KeyMaterial KeyGen(const ContextPtr& ctx, std::uint64_t seed,
                   std::span<const long long> rotation_steps = {});

}  // namespace pcol::ckks

#endif  // PCOL_CKKS_KEYS_H_
