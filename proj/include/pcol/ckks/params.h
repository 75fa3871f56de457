#ifndef PCOL_CKKS_PARAMS_H_
#define PCOL_CKKS_PARAMS_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pcol/ckks/modarith.h"
#include "pcol/ckks/ntt.h"

namespace pcol::ckks {

// Chain q_0 (first_prime_bits), q_1..q_L (close to the scale) and one special
// prime P used only inside key switching. Presets are labels; no security
// estimate is attached to them.
struct Params {
  std::size_t ring_degree = 0;
  int max_level = 0;
  double scale = 0.0;
  double error_stddev = 3.2;
  std::vector<u64> chain;  // q_0 .. q_L
  u64 special_prime = 0;
  std::string preset_label;

  std::size_t slot_count() const { return ring_degree / 2; }
  friend bool operator==(const Params&, const Params&) = default;
};

struct ParamsSpec {
  std::size_t ring_degree = 8192;
  int max_level = 12;
  int scale_bits = 40;
  int first_prime_bits = 60;
  int special_prime_bits = 60;
  double error_stddev = 3.2;
  std::string label = "custom";
};

// "toy" (n = 32), "desk" (n = 8192, L = 12) or "std-like" (n = 32768, L = 26).
Params GenParams(std::string_view preset);
// Throws InvalidParams on non-power-of-two n, n < 16, L < 1 or bit sizes that
// cannot host NTT-friendly primes.
Params GenParams(const ParamsSpec& spec);
// Re-checks an externally supplied parameter set (e.g. after parsing).
void ValidateParams(const Params& params);

// Immutable precomputation shared by encoder, evaluator and protocols.
// Component index c addresses q_c for c <= L and the special prime for
// c == special_index().
class Context {
 public:
  static std::shared_ptr<const Context> Create(const Params& params);

  const Params& params() const { return params_; }
  std::size_t n() const { return params_.ring_degree; }
  std::size_t slots() const { return params_.ring_degree / 2; }
  int max_level() const { return params_.max_level; }
  std::size_t special_index() const { return params_.chain.size(); }

  const Modulus& modulus(std::size_t component) const { return moduli_[component]; }
  const NttTables& ntt(std::size_t component) const { return ntt_[component]; }

  // Canonical scale at each level: the scale after a rescale of two
  // canonical-scale operands from the level above.
  double level_scale(int level) const { return level_scales_[level]; }
  long double log2_modulus(int level) const { return log2_q_[level]; }

  u64 inv_q_mod(int top, std::size_t i) const { return inv_q_[top][i]; }
  u64 inv_p_mod(std::size_t i) const { return inv_p_[i]; }
  u64 p_mod(std::size_t i) const { return p_mod_[i]; }
  // q_j^{-1} mod q_i for j < i (Garner reconstruction).
  u64 garner_inv(std::size_t i, std::size_t j) const { return garner_[i][j]; }

  // 5^steps mod 2n, the Galois element rotating slots left by `steps`.
  u64 GaloisElement(std::size_t steps) const;

 private:
  explicit Context(const Params& params);

  Params params_;
  std::vector<Modulus> moduli_;
  std::vector<NttTables> ntt_;
  std::vector<double> level_scales_;
  std::vector<long double> log2_q_;
  std::vector<std::vector<u64>> inv_q_;
  std::vector<u64> inv_p_;
  std::vector<u64> p_mod_;
  std::vector<std::vector<u64>> garner_;
};

using ContextPtr = std::shared_ptr<const Context>;

}  // namespace pcol::ckks

#endif  // PCOL_CKKS_PARAMS_H_
