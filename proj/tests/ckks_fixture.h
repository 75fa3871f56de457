#ifndef PCOL_TESTS_CKKS_FIXTURE_H_
#define PCOL_TESTS_CKKS_FIXTURE_H_

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "pcol/ckks/evaluator.h"
#include "pcol/ckks/keys.h"
#include "pcol/ckks/params.h"
#include "test_util.h"

namespace pcol::testutil {

// Context, keys with power-of-two rotations, and an evaluator for a preset.
struct CkksSetup {
  explicit CkksSetup(const char* preset, std::uint64_t seed = 1,
                     std::vector<long long> extra_steps = {})
      : ctx(ckks::Context::Create(ckks::GenParams(preset))), eval(ctx), prng(ckks::Prng::FromU64(seed, "test")) {
    std::vector<long long> steps = std::move(extra_steps);
    for (std::size_t s : ckks::SumSlotsSteps(ctx->slots())) steps.push_back(static_cast<long long>(s));
    keys = ckks::KeyGen(ctx, seed, steps);
  }

  ckks::Ciphertext Encrypt(const std::vector<double>& v) {
    return eval.EncryptValues(v, keys.public_key, prng);
  }
  std::vector<double> Decrypt(const ckks::Ciphertext& ct) const {
    return eval.DecryptValues(ct, keys.secret_key);
  }

  ckks::ContextPtr ctx;
  ckks::Evaluator eval;
  ckks::KeyMaterial keys;
  ckks::Prng prng;
};

inline std::vector<double> RandomVector(Rng& rng, std::size_t n, double lo = -1.0,
                                        double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.Uniform(lo, hi);
  return v;
}

inline double MaxAbsDiff(const std::vector<double>& a, const std::vector<double>& b,
                         std::size_t count) {
  double m = 0.0;
  for (std::size_t i = 0; i < count; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace pcol::testutil

#endif  // PCOL_TESTS_CKKS_FIXTURE_H_
