#ifndef PCOL_CKKS_SAMPLING_H_
#define PCOL_CKKS_SAMPLING_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "pcol/ckks/poly.h"

namespace pcol::ckks {

using Seed = std::array<std::uint8_t, 32>;

// Deterministic ChaCha20 keystream. Child streams are derived by hashing the
// parent seed with a label, so protocol roles get independent randomness.
class Prng {
 public:
  explicit Prng(const Seed& seed);
  static Prng FromU64(std::uint64_t seed, std::string_view domain = "pcol");

  Prng Derive(std::string_view label) const;
  Seed DeriveSeed(std::string_view label) const;
  const Seed& seed() const { return seed_; }

  void Fill(std::uint8_t* out, std::size_t len);
  std::uint64_t NextU64();
  std::uint64_t UniformBelow(std::uint64_t bound);
  double UniformDouble();  // (0, 1)
  double Normal();

 private:
  void Refill();

  Seed seed_;
  std::uint64_t block_ = 0;
  std::array<std::uint8_t, 4096> buffer_{};
  std::size_t pos_ = 4096;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Seed HashSeed(std::string_view domain, std::uint64_t value);

std::vector<std::int64_t> SampleTernary(std::size_t n, Prng& prng);
// Rounded Gaussian truncated at 6 sigma.
std::vector<std::int64_t> SampleGaussian(std::size_t n, double stddev, Prng& prng);
// Rounded Gaussian with sigma = 2^bits / 6, rejected outside |e| <= 2^bits.
std::vector<std::int64_t> SampleSmudging(std::size_t n, int bits, Prng& prng);
// Uniform residues over the given basis, marked as NTT form.
RnsPoly SampleUniform(const Context& ctx, std::size_t num_q, bool special, Prng& prng);

}  // namespace pcol::ckks

#endif  // PCOL_CKKS_SAMPLING_H_
