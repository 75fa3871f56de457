#include "pcol/ckks/evaluator.h"

#include <algorithm>
#include <cmath>

#include "pcol/errors.h"

namespace pcol::ckks {
namespace {

constexpr double kScaleTolerance = 0x1p-10;

long double Log2(long double x) { return std::log2(std::max(x, 1.0L)); }

}  // namespace

Evaluator::Evaluator(ContextPtr ctx) : ctx_(std::move(ctx)), encoder_(ctx_) {}

long double Evaluator::FreshNoise() const {
  const long double n = ctx_->n();
  const long double sigma = ctx_->params().error_stddev;
  const long double h = 2.0L * n / 3.0L;
  return 8.0L * std::sqrt(2.0L) * sigma * n + 6.0L * sigma * std::sqrt(n) +
         16.0L * sigma * std::sqrt(h * n);
}

long double Evaluator::RescaleNoise() const {
  const long double n = ctx_->n();
  const long double h = 2.0L * n / 3.0L;
  return std::sqrt(n / 3.0L) * (3.0L + 8.0L * std::sqrt(h));
}

long double Evaluator::KeySwitchNoise(int level) const {
  const auto& chain = ctx_->params().chain;
  const long double q_max = *std::max_element(chain.begin(), chain.begin() + level + 1);
  const long double n = ctx_->n();
  return (level + 1) * q_max * 8.0L * ctx_->params().error_stddev * n /
             (std::sqrt(3.0L) * ctx_->params().special_prime) +
         RescaleNoise();
}

Ciphertext Evaluator::Encrypt(const Plaintext& pt, const PublicKey& pk, Prng& prng) const {
  if (pt.level != ctx_->max_level()) {
    throw Error(ErrorCode::kLevelMismatch, "encryption expects a plaintext at max_level");
  }
  const std::size_t num_q = pt.poly.num_q();
  const double sigma = ctx_->params().error_stddev;
  const RnsPoly v = FromSigned(*ctx_, SampleTernary(ctx_->n(), prng), num_q, false, true);
  Ciphertext ct;
  ct.c0 = FromSigned(*ctx_, SampleGaussian(ctx_->n(), sigma, prng), num_q, false, true);
  ct.c1 = FromSigned(*ctx_, SampleGaussian(ctx_->n(), sigma, prng), num_q, false, true);
  MulAddInPlace(*ctx_, ct.c0, pk.b, v);
  MulAddInPlace(*ctx_, ct.c1, pk.a, v);
  AddInPlace(*ctx_, ct.c0, pt.poly);
  ct.level = pt.level;
  ct.scale = pt.scale;
  ct.noise = FreshNoise();
  ct.value_bound = pt.value_bound;
  return ct;
}

Ciphertext Evaluator::EncryptValues(std::span<const double> values, const PublicKey& pk,
                                    Prng& prng) const {
  return Encrypt(encoder_.Encode(values, ctx_->max_level(), ctx_->params().scale), pk, prng);
}

Plaintext Evaluator::Decrypt(const Ciphertext& ct, const SecretKey& sk) const {
  const long double magnitude =
      ct.noise + static_cast<long double>(ct.scale) * ct.value_bound;
  if (Log2(magnitude) >= ctx_->log2_modulus(ct.level) - 2) {
    throw Error(ErrorCode::kNoiseOverflow,
                "tracked noise estimate exceeds a quarter of the modulus");
  }
  Plaintext pt;
  pt.level = ct.level;
  pt.scale = ct.scale;
  pt.value_bound = ct.value_bound;
  pt.poly = Mul(*ctx_, ct.c1, Restrict(sk.ntt, ct.c1.num_q(), false));
  AddInPlace(*ctx_, pt.poly, ct.c0);
  return pt;
}

std::vector<double> Evaluator::DecryptValues(const Ciphertext& ct, const SecretKey& sk) const {
  return encoder_.Decode(Decrypt(ct, sk));
}

void Evaluator::CheckSameLevelAndScale(const Ciphertext& a, const Ciphertext& b) const {
  if (a.level != b.level) {
    throw Error(ErrorCode::kLevelMismatch, "operands are at different levels");
  }
  if (std::abs(a.scale / b.scale - 1.0) > kScaleTolerance) {
    throw Error(ErrorCode::kScaleMismatch, "operand scales differ by more than 2^-10");
  }
}

Ciphertext Evaluator::Add(const Ciphertext& a, const Ciphertext& b) const {
  CheckSameLevelAndScale(a, b);
  Ciphertext out = a;
  AddInPlace(*ctx_, out.c0, b.c0);
  AddInPlace(*ctx_, out.c1, b.c1);
  out.noise = a.noise + b.noise;
  out.value_bound = a.value_bound + b.value_bound;
  return out;
}

Ciphertext Evaluator::Sub(const Ciphertext& a, const Ciphertext& b) const {
  CheckSameLevelAndScale(a, b);
  Ciphertext out = a;
  SubInPlace(*ctx_, out.c0, b.c0);
  SubInPlace(*ctx_, out.c1, b.c1);
  out.noise = a.noise + b.noise;
  out.value_bound = a.value_bound + b.value_bound;
  return out;
}

Ciphertext Evaluator::Negate(const Ciphertext& a) const {
  Ciphertext out = a;
  NegateInPlace(*ctx_, out.c0);
  NegateInPlace(*ctx_, out.c1);
  return out;
}

Ciphertext Evaluator::AddPlain(const Ciphertext& a, const Plaintext& pt) const {
  if (pt.level < a.level) {
    throw Error(ErrorCode::kLevelMismatch, "plaintext below ciphertext level");
  }
  if (std::abs(a.scale / pt.scale - 1.0) > kScaleTolerance) {
    throw Error(ErrorCode::kScaleMismatch, "plaintext scale differs by more than 2^-10");
  }
  Ciphertext out = a;
  AddInPlace(*ctx_, out.c0, Restrict(pt.poly, a.c0.num_q(), false));
  out.value_bound = a.value_bound + pt.value_bound;
  return out;
}

Ciphertext Evaluator::AddConst(const Ciphertext& a, double c) const {
  const long double k = std::round(static_cast<long double>(c) * a.scale);
  if (!std::isfinite(static_cast<double>(k)) ||
      Log2(std::abs(k)) >= ctx_->log2_modulus(a.level) - 2) {
    throw Error(ErrorCode::kOverflow, "constant exceeds the modulus headroom");
  }
  Ciphertext out = a;
  AddConstantInPlace(*ctx_, out.c0, static_cast<__int128>(k));
  out.value_bound = a.value_bound + std::abs(c);
  out.noise = a.noise + 0.5L;
  return out;
}

Ciphertext Evaluator::Rescale(const Ciphertext& a) const {
  if (a.level < 1) throw Error(ErrorCode::kOutOfLevels, "no level left to rescale");
  const u64 q = ctx_->params().chain[a.level];
  Ciphertext out = a;
  RescaleInPlace(*ctx_, out.c0);
  RescaleInPlace(*ctx_, out.c1);
  out.level = a.level - 1;
  out.scale = a.scale / static_cast<double>(q);
  out.noise = a.noise / q + RescaleNoise();
  return out;
}

Ciphertext Evaluator::MultConst(const Ciphertext& a, double c) const {
  if (a.level < 1) throw Error(ErrorCode::kOutOfLevels, "multiplication at level 0");
  const long double target = ctx_->level_scale(a.level - 1);
  const long double s = target * ctx_->params().chain[a.level] / a.scale;
  const long double k = std::round(static_cast<long double>(c) * s);
  if (!std::isfinite(static_cast<double>(k)) || std::abs(k) >= 0x1p100L) {
    throw Error(ErrorCode::kOverflow, "constant too large for the scale");
  }
  Ciphertext out = a;
  MulScalarInPlace(*ctx_, out.c0, static_cast<__int128>(k));
  MulScalarInPlace(*ctx_, out.c1, static_cast<__int128>(k));
  out.noise = a.noise * std::abs(k) + 0.5L * s;
  out.value_bound = a.value_bound * std::abs(c);
  out = Rescale(out);
  out.scale = static_cast<double>(target);
  return out;
}

Ciphertext Evaluator::MulInteger(const Ciphertext& a, std::int64_t k) const {
  Ciphertext out = a;
  MulScalarInPlace(*ctx_, out.c0, k);
  MulScalarInPlace(*ctx_, out.c1, k);
  const long double mag = std::abs(static_cast<long double>(k));
  out.noise = a.noise * mag;
  out.value_bound = a.value_bound * static_cast<double>(mag);
  return out;
}

int Evaluator::MaxBoostBits(const Ciphertext& a, int margin_bits) const {
  const long double used =
      Log2(static_cast<long double>(a.scale) * std::max(a.value_bound, 1.0) + a.noise);
  const long double room = ctx_->log2_modulus(a.level) - margin_bits - used;
  return room <= 0 ? 0 : static_cast<int>(std::min<long double>(std::floor(room), 62.0L));
}

Ciphertext Evaluator::BoostScale(const Ciphertext& a, int bits) const {
  if (bits < 0 || bits > 62) throw Error(ErrorCode::kInvalidInput, "boost bits out of range");
  if (bits == 0) return a;
  if (bits > MaxBoostBits(a, 2)) {
    throw Error(ErrorCode::kOverflow, "not enough modulus headroom to boost the scale");
  }
  Ciphertext out = MulInteger(a, std::int64_t{1} << bits);
  out.value_bound = a.value_bound;
  out.scale = std::ldexp(a.scale, bits);
  return out;
}

Ciphertext Evaluator::MultPlain(const Ciphertext& a, const Plaintext& pt) const {
  if (a.level < 1) throw Error(ErrorCode::kOutOfLevels, "multiplication at level 0");
  if (pt.level < a.level) {
    throw Error(ErrorCode::kLevelMismatch, "plaintext below ciphertext level");
  }
  const RnsPoly p = Restrict(pt.poly, a.c0.num_q(), false);
  Ciphertext out = a;
  out.c0 = Mul(*ctx_, a.c0, p);
  out.c1 = Mul(*ctx_, a.c1, p);
  out.scale = a.scale * pt.scale;
  out.noise = a.noise * pt.scale * std::max(pt.value_bound, 1.0) * std::sqrt(ctx_->n());
  out.value_bound = a.value_bound * pt.value_bound;
  return Rescale(out);
}

Plaintext Evaluator::EncodeForMult(std::span<const double> values, const Ciphertext& a,
                                   double out_scale) const {
  if (a.level < 1) throw Error(ErrorCode::kOutOfLevels, "multiplication at level 0");
  if (out_scale <= 0.0) out_scale = ctx_->level_scale(a.level - 1);
  const double s = static_cast<double>(static_cast<long double>(out_scale) *
                                       ctx_->params().chain[a.level] / a.scale);
  return encoder_.Encode(values, a.level, s);
}

std::pair<RnsPoly, RnsPoly> Evaluator::KeySwitch(const RnsPoly& d,
                                                const KeySwitchKey& key) const {
  const Context& ctx = *ctx_;
  const std::size_t num = d.num_q();
  const std::size_t n = ctx.n();
  const std::size_t key_special = ctx.params().chain.size();
  RnsPoly acc0(n, num, true, true), acc1(n, num, true, true);
  RnsPoly coeff = d;
  FromNtt(ctx, coeff);
  std::vector<u64> digit(n);
  for (std::size_t j = 0; j < num; ++j) {
    const RnsPoly& kb = key.b[j];
    const RnsPoly& ka = key.a[j];
    for (std::size_t c = 0; c <= num; ++c) {
      const std::size_t ctx_index = c < num ? c : ctx.special_index();
      const std::size_t key_index = c < num ? c : key_special;
      const Modulus& q = ctx.modulus(ctx_index);
      const u64* src;
      if (c == j) {
        src = d[j].data();
      } else {
        auto cj = coeff[j];
        for (std::size_t i = 0; i < n; ++i) digit[i] = q.Reduce(cj[i]);
        ctx.ntt(ctx_index).Forward(digit.data());
        src = digit.data();
      }
      auto b = kb[key_index];
      auto a = ka[key_index];
      auto o0 = acc0[c];
      auto o1 = acc1[c];
      for (std::size_t i = 0; i < n; ++i) {
        o0[i] = q.Add(o0[i], q.Mul(src[i], b[i]));
        o1[i] = q.Add(o1[i], q.Mul(src[i], a[i]));
      }
    }
  }
  ModDownInPlace(ctx, acc0);
  ModDownInPlace(ctx, acc1);
  return {std::move(acc0), std::move(acc1)};
}

Ciphertext Evaluator::Mult(const Ciphertext& a, const Ciphertext& b,
                           const KeySwitchKey& relin) const {
  if (a.level != b.level) throw Error(ErrorCode::kLevelMismatch, "operands at different levels");
  if (a.level < 1) throw Error(ErrorCode::kOutOfLevels, "multiplication at level 0");
  if (relin.empty()) throw Error(ErrorCode::kInvalidInput, "missing relinearization key");
  const long double product_scale = static_cast<long double>(a.scale) * b.scale;
  if (Log2(product_scale) >= ctx_->log2_modulus(a.level) - 4) {
    throw Error(ErrorCode::kScaleOverflow, "product scale exceeds the modulus");
  }
  RnsPoly d0 = Mul(*ctx_, a.c0, b.c0);
  RnsPoly d1 = Mul(*ctx_, a.c0, b.c1);
  MulAddInPlace(*ctx_, d1, a.c1, b.c0);
  const RnsPoly d2 = Mul(*ctx_, a.c1, b.c1);
  auto [k0, k1] = KeySwitch(d2, relin);
  AddInPlace(*ctx_, d0, k0);
  AddInPlace(*ctx_, d1, k1);

  Ciphertext out;
  out.c0 = std::move(d0);
  out.c1 = std::move(d1);
  out.level = a.level;
  out.scale = static_cast<double>(product_scale);
  out.noise = a.noise * b.scale * std::max(b.value_bound, 1.0) +
              b.noise * a.scale * std::max(a.value_bound, 1.0) + a.noise * b.noise +
              KeySwitchNoise(a.level);
  out.value_bound = a.value_bound * b.value_bound;
  return Rescale(out);
}

Ciphertext Evaluator::Square(const Ciphertext& a, const KeySwitchKey& relin) const {
  return Mult(a, a, relin);
}

Ciphertext Evaluator::Rotate(const Ciphertext& a, long long steps,
                             const RotationKeys& keys) const {
  const std::size_t step = NormalizeStep(*ctx_, steps);
  if (step == 0) return a;
  const KeySwitchKey* key = keys.Find(step);
  if (key == nullptr) {
    throw Error(ErrorCode::kMissingRotationKey,
                "no rotation key for step " + std::to_string(step));
  }
  const auto perm = GaloisPermutation(ctx_->n(), ctx_->GaloisElement(step));
  Ciphertext out = a;
  out.c0 = ApplyGalois(a.c0, perm);
  const RnsPoly c1 = ApplyGalois(a.c1, perm);
  auto [k0, k1] = KeySwitch(c1, *key);
  AddInPlace(*ctx_, out.c0, k0);
  out.c1 = std::move(k1);
  out.noise = a.noise + KeySwitchNoise(a.level);
  return out;
}

Ciphertext Evaluator::SumSlots(const Ciphertext& a, std::size_t active_slots,
                               const RotationKeys& keys) const {
  if (active_slots == 0 || active_slots > ctx_->slots()) {
    throw Error(ErrorCode::kInvalidInput, "active_slots must be in [1, n/2]");
  }
  Ciphertext acc = a;
  for (std::size_t step : SumSlotsSteps(active_slots)) {
    acc = Add(acc, Rotate(acc, static_cast<long long>(step), keys));
  }
  return acc;
}

Ciphertext Evaluator::DropToLevel(const Ciphertext& a, int level) const {
  if (level == a.level) return a;
  if (level > a.level || level < 0) {
    throw Error(ErrorCode::kLevelMismatch, "can only drop to a lower level");
  }
  Ciphertext out = a;
  const std::size_t keep = static_cast<std::size_t>(level) + 2;
  out.c0 = Restrict(a.c0, keep, false);
  out.c1 = Restrict(a.c1, keep, false);
  out.level = level + 1;
  const long double target = ctx_->level_scale(level);
  const long double k =
      std::round(target * ctx_->params().chain[level + 1] / static_cast<long double>(a.scale));
  if (k < 1.0L || k >= 0x1p100L) {
    throw Error(ErrorCode::kScaleOverflow, "cannot map the scale onto the target level");
  }
  MulScalarInPlace(*ctx_, out.c0, static_cast<__int128>(k));
  MulScalarInPlace(*ctx_, out.c1, static_cast<__int128>(k));
  out.noise = a.noise * k;
  out.scale = static_cast<double>(static_cast<long double>(a.scale) * k);
  return Rescale(out);
}

}  // namespace pcol::ckks
