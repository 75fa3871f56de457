#ifndef PCOL_CKKS_EVALUATOR_H_
#define PCOL_CKKS_EVALUATOR_H_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pcol/ckks/ciphertext.h"
#include "pcol/ckks/encoder.h"
#include "pcol/ckks/keys.h"
#include "pcol/ckks/sampling.h"

namespace pcol::ckks {

// Stateless homomorphic operations. Products rescale immediately, so a
// ciphertext at level l with the canonical scale of level l multiplied by a
// canonical operand lands on the canonical scale of level l - 1.
class Evaluator {
 public:
  explicit Evaluator(ContextPtr ctx);

  const ContextPtr& context() const { return ctx_; }
  const Encoder& encoder() const { return encoder_; }

  // `pt` must be at max_level.
  Ciphertext Encrypt(const Plaintext& pt, const PublicKey& pk, Prng& prng) const;
  // Convenience: encode at max_level with the nominal scale and encrypt.
  Ciphertext EncryptValues(std::span<const double> values, const PublicKey& pk,
                           Prng& prng) const;
  // Throws NoiseOverflow when the tracked estimate reaches Q_level / 4.
  Plaintext Decrypt(const Ciphertext& ct, const SecretKey& sk) const;
  std::vector<double> DecryptValues(const Ciphertext& ct, const SecretKey& sk) const;

  Ciphertext Add(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext Sub(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext Negate(const Ciphertext& a) const;
  Ciphertext AddPlain(const Ciphertext& a, const Plaintext& pt) const;
  Ciphertext AddConst(const Ciphertext& a, double c) const;

  // Multiply by a public real constant and rescale (one level).
  Ciphertext MultConst(const Ciphertext& a, double c) const;
  // Multiply by a public integer; no level consumed, scale unchanged.
  Ciphertext MulInteger(const Ciphertext& a, std::int64_t k) const;
  // Multiply by 2^bits and record the larger scale; the slot values are
  // unchanged while the absolute noise added later (e.g. smudging) shrinks
  // relative to the scale. Throws Overflow without headroom.
  Ciphertext BoostScale(const Ciphertext& a, int bits) const;
  // Largest boost keeping scale * value_bound below Q_level / 2^margin_bits.
  int MaxBoostBits(const Ciphertext& a, int margin_bits) const;

  // Slotwise product with a plaintext at the ciphertext's level (one level).
  Ciphertext MultPlain(const Ciphertext& a, const Plaintext& pt) const;
  // Encodes `values` so that MultPlain(a, .) ends at `out_scale` (default:
  // canonical scale of the next level).
  Plaintext EncodeForMult(std::span<const double> values, const Ciphertext& a,
                          double out_scale = 0.0) const;

  Ciphertext Mult(const Ciphertext& a, const Ciphertext& b, const KeySwitchKey& relin) const;
  Ciphertext Square(const Ciphertext& a, const KeySwitchKey& relin) const;

  // Cyclic left rotation of the slot vector by `steps`.
  Ciphertext Rotate(const Ciphertext& a, long long steps, const RotationKeys& keys) const;
  // Slot 0 of the result holds the sum of slots [0, active_slots) after
  // ceil(log2 active_slots) rotate-and-add steps. Slots between active_slots
  // and the next power of two must be zero.
  Ciphertext SumSlots(const Ciphertext& a, std::size_t active_slots,
                      const RotationKeys& keys) const;

  Ciphertext Rescale(const Ciphertext& a) const;
  // Moves to a lower level and onto that level's canonical scale.
  Ciphertext DropToLevel(const Ciphertext& a, int level) const;

  // Key-switches `d` (NTT form at some level) with `key`; returns the pair to
  // add to (c0, c1).
  std::pair<RnsPoly, RnsPoly> KeySwitch(const RnsPoly& d, const KeySwitchKey& key) const;

  // Heuristic noise terms in coefficient units.
  long double FreshNoise() const;
  long double RescaleNoise() const;
  long double KeySwitchNoise(int level) const;

 private:
  void CheckSameLevelAndScale(const Ciphertext& a, const Ciphertext& b) const;

  ContextPtr ctx_;
  Encoder encoder_;
};

}  // namespace pcol::ckks

#endif  // PCOL_CKKS_EVALUATOR_H_
