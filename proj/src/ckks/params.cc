#include "pcol/ckks/params.h"

#include <algorithm>
#include <bit>
#include <cmath>

#include "pcol/errors.h"

namespace pcol::ckks {
namespace {

bool Used(const std::vector<u64>& used, u64 p) {
  return std::find(used.begin(), used.end(), p) != used.end();
}

// Largest prime = 1 mod 2n strictly below 2^bits, skipping `used`.
u64 LargestPrimeBelow(int bits, u64 two_n, const std::vector<u64>& used) {
  u64 candidate = ((u64{1} << bits) - 1) / two_n * two_n + 1;
  while (candidate > two_n) {
    if (candidate < (u64{1} << bits) && IsPrime(candidate) && !Used(used, candidate)) {
      return candidate;
    }
    candidate -= two_n;
  }
  throw Error(ErrorCode::kInvalidParams, "no NTT-friendly prime of requested size");
}

// Prime = 1 mod 2n closest to `target`, skipping `used`.
u64 ClosestPrime(long double target, u64 two_n, const std::vector<u64>& used) {
  const u64 base = static_cast<u64>(target / two_n) * two_n + 1;
  for (u64 k = 0; k < (u64{1} << 30); ++k) {
    for (u64 candidate : {base + k * two_n, base - k * two_n}) {
      if (candidate > two_n && IsPrime(candidate) && !Used(used, candidate)) {
        return candidate;
      }
    }
  }
  throw Error(ErrorCode::kInvalidParams, "no NTT-friendly prime near scale");
}

}  // namespace

Params GenParams(std::string_view preset) {
  ParamsSpec spec;
  if (preset == "toy") {
    spec.ring_degree = 32;
    spec.max_level = 6;
  } else if (preset == "desk") {
    spec.ring_degree = 8192;
    spec.max_level = 12;
  } else if (preset == "std-like") {
    spec.ring_degree = 32768;
    spec.max_level = 26;
  } else {
    throw Error(ErrorCode::kInvalidParams,
                "unknown preset '" + std::string(preset) + "' (toy, desk, std-like)");
  }
  spec.label = std::string(preset);
  return GenParams(spec);
}

Params GenParams(const ParamsSpec& spec) {
  const std::size_t n = spec.ring_degree;
  if (n < 16 || !std::has_single_bit(n) || n > (std::size_t{1} << 17)) {
    throw Error(ErrorCode::kInvalidParams, "ring degree must be a power of two in [16, 2^17]");
  }
  if (spec.max_level < 1 || spec.max_level > 60) {
    throw Error(ErrorCode::kInvalidParams, "max_level must be in [1, 60]");
  }
  if (spec.scale_bits < 20 || spec.scale_bits > 58 ||
      spec.first_prime_bits <= spec.scale_bits || spec.first_prime_bits > 60 ||
      spec.special_prime_bits < spec.first_prime_bits - 2 ||
      spec.special_prime_bits > 60) {
    throw Error(ErrorCode::kInvalidParams, "inconsistent prime bit sizes");
  }
  if (!(spec.error_stddev > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "error_stddev must be positive");
  }

  const u64 two_n = 2 * n;
  Params p;
  p.ring_degree = n;
  p.max_level = spec.max_level;
  p.scale = std::ldexp(1.0, spec.scale_bits);
  p.error_stddev = spec.error_stddev;
  p.preset_label = spec.label;
  p.chain.assign(spec.max_level + 1, 0);

  std::vector<u64> used;
  p.chain[0] = LargestPrimeBelow(spec.first_prime_bits, two_n, used);
  used.push_back(p.chain[0]);
  p.special_prime = LargestPrimeBelow(spec.special_prime_bits, two_n, used);
  used.push_back(p.special_prime);

  // Top-down: q_l close to scale_l^2 / scale keeps every canonical level
  // scale within a hair of the nominal scale.
  long double level_scale = p.scale;
  for (int level = spec.max_level; level >= 1; --level) {
    const u64 q = ClosestPrime(level_scale * level_scale / p.scale, two_n, used);
    p.chain[level] = q;
    used.push_back(q);
    level_scale = level_scale * level_scale / q;
  }
  ValidateParams(p);
  return p;
}

void ValidateParams(const Params& p) {
  const std::size_t n = p.ring_degree;
  if (n < 16 || !std::has_single_bit(n)) {
    throw Error(ErrorCode::kInvalidParams, "ring degree must be a power of two >= 16");
  }
  if (p.max_level < 1 || p.chain.size() != static_cast<std::size_t>(p.max_level) + 1) {
    throw Error(ErrorCode::kInvalidParams, "chain length must be max_level + 1");
  }
  if (!(p.scale > 1.0) || !(p.error_stddev > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "scale and error_stddev must be positive");
  }
  std::vector<u64> all = p.chain;
  all.push_back(p.special_prime);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const u64 q = all[i];
    if (q >= (u64{1} << 61) || !IsPrime(q) || (q - 1) % (2 * n) != 0) {
      throw Error(ErrorCode::kInvalidParams, "chain primes must be NTT-friendly and < 2^61");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (all[j] == q) throw Error(ErrorCode::kInvalidParams, "chain primes must be distinct");
    }
  }
}

Context::Context(const Params& params) : params_(params) {
  ValidateParams(params_);
  const std::size_t count = params_.chain.size() + 1;
  moduli_.reserve(count);
  ntt_.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    const u64 q = c < params_.chain.size() ? params_.chain[c] : params_.special_prime;
    moduli_.emplace_back(q);
    ntt_.emplace_back(params_.ring_degree, moduli_.back());
  }

  const int levels = params_.max_level;
  level_scales_.assign(levels + 1, 0.0);
  long double s = params_.scale;
  level_scales_[levels] = static_cast<double>(s);
  for (int l = levels; l >= 1; --l) {
    s = s * s / params_.chain[l];
    level_scales_[l - 1] = static_cast<double>(s);
  }

  log2_q_.assign(levels + 1, 0.0L);
  long double acc = 0.0L;
  for (int l = 0; l <= levels; ++l) {
    acc += std::log2(static_cast<long double>(params_.chain[l]));
    log2_q_[l] = acc;
  }

  inv_q_.assign(levels + 1, {});
  garner_.assign(levels + 1, {});
  for (int top = 0; top <= levels; ++top) {
    for (int i = 0; i < top; ++i) {
      inv_q_[top].push_back(moduli_[i].Inverse(params_.chain[top] % params_.chain[i]));
      garner_[top].push_back(moduli_[top].Inverse(params_.chain[i] % params_.chain[top]));
    }
  }
  for (int i = 0; i <= levels; ++i) {
    p_mod_.push_back(params_.special_prime % params_.chain[i]);
    inv_p_.push_back(moduli_[i].Inverse(p_mod_.back()));
  }
}

std::shared_ptr<const Context> Context::Create(const Params& params) {
  return std::shared_ptr<const Context>(new Context(params));
}

u64 Context::GaloisElement(std::size_t steps) const {
  const u64 two_n = 2 * params_.ring_degree;
  u64 g = 1;
  for (std::size_t i = 0; i < steps % slots(); ++i) g = g * 5 % two_n;
  return g;
}

}  // namespace pcol::ckks
