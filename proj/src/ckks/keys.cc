#include "pcol/ckks/keys.h"

#include <bit>
#include <string>

#include "pcol/errors.h"

namespace pcol::ckks {

const KeySwitchKey* RotationKeys::Find(std::size_t step) const {
  const auto it = keys.find(step);
  return it == keys.end() ? nullptr : &it->second;
}

SecretKey MakeSecretKey(const Context& ctx, std::vector<std::int64_t> coeffs) {
  if (coeffs.size() != ctx.n()) {
    throw Error(ErrorCode::kInvalidInput, "secret key has the wrong ring degree");
  }
  SecretKey sk;
  sk.ntt = FromSigned(ctx, coeffs, ctx.params().chain.size(), true, true);
  sk.coeffs = std::move(coeffs);
  return sk;
}

PublicKey GenPublicKey(const Context& ctx, const SecretKey& sk, const RnsPoly& a,
                       Prng& noise) {
  const std::size_t num_q = ctx.params().chain.size();
  const auto e = SampleGaussian(ctx.n(), ctx.params().error_stddev, noise);
  PublicKey pk;
  pk.a = a;
  pk.b = FromSigned(ctx, e, num_q, false, true);
  const RnsPoly as = Mul(ctx, a, Restrict(sk.ntt, num_q, false));
  SubInPlace(ctx, pk.b, as);
  return pk;
}

RnsPoly GadgetTerm(const Context& ctx, const RnsPoly& s_ntt, std::size_t digit) {
  RnsPoly out(ctx.n(), s_ntt.num_q(), s_ntt.has_special(), true);
  const Modulus& q = ctx.modulus(digit);
  const u64 p = ctx.p_mod(digit);
  const u64 ps = q.ShoupPrecompute(p);
  auto src = s_ntt[digit];
  auto dst = out[digit];
  for (std::size_t i = 0; i < ctx.n(); ++i) dst[i] = q.MulShoup(src[i], p, ps);
  return out;
}

KeySwitchKey GenKeySwitchKey(const Context& ctx, const RnsPoly& from_ntt,
                             const SecretKey& to, Prng& noise, Prng& crs) {
  const std::size_t num_q = ctx.params().chain.size();
  KeySwitchKey k;
  for (std::size_t j = 0; j < num_q; ++j) {
    RnsPoly a = SampleUniform(ctx, num_q, true, crs);
    const auto e = SampleGaussian(ctx.n(), ctx.params().error_stddev, noise);
    RnsPoly b = FromSigned(ctx, e, num_q, true, true);
    SubInPlace(ctx, b, Mul(ctx, a, to.ntt));
    AddInPlace(ctx, b, GadgetTerm(ctx, from_ntt, j));
    k.b.push_back(std::move(b));
    k.a.push_back(std::move(a));
  }
  return k;
}

RnsPoly GaloisSecret(const Context& ctx, const RnsPoly& s_ntt, std::size_t steps) {
  return ApplyGalois(s_ntt, GaloisPermutation(ctx.n(), ctx.GaloisElement(steps)));
}

std::size_t NormalizeStep(const Context& ctx, long long steps) {
  const long long slots = static_cast<long long>(ctx.slots());
  long long s = steps % slots;
  if (s < 0) s += slots;
  return static_cast<std::size_t>(s);
}

std::vector<std::size_t> SumSlotsSteps(std::size_t active_slots) {
  std::vector<std::size_t> steps;
  const std::size_t padded = std::bit_ceil(std::max<std::size_t>(active_slots, 1));
  for (std::size_t s = 1; s < padded; s <<= 1) steps.push_back(s);
  return steps;
}

KeyMaterial KeyGen(const ContextPtr& ctx, std::uint64_t seed,
                   std::span<const long long> rotation_steps) {
  const Prng root = Prng::FromU64(seed, "pcol/keygen");
  Prng secret = root.Derive("secret");
  Prng noise = root.Derive("noise");
  Prng crs = root.Derive("crs");

  KeyMaterial km;
  km.secret_key = MakeSecretKey(*ctx, SampleTernary(ctx->n(), secret));
  const RnsPoly pk_a = SampleUniform(*ctx, ctx->params().chain.size(), false, crs);
  km.public_key = GenPublicKey(*ctx, km.secret_key, pk_a, noise);
  const RnsPoly s2 = Mul(*ctx, km.secret_key.ntt, km.secret_key.ntt);
  km.relin_key = GenKeySwitchKey(*ctx, s2, km.secret_key, noise, crs);
  for (long long raw : rotation_steps) {
    const std::size_t step = NormalizeStep(*ctx, raw);
    if (step == 0 || km.rotation_keys.keys.count(step)) continue;
    Prng rot_noise = noise.Derive("rot" + std::to_string(step));
    Prng rot_crs = crs.Derive("rot" + std::to_string(step));
    km.rotation_keys.keys.emplace(
        step, GenKeySwitchKey(*ctx, GaloisSecret(*ctx, km.secret_key.ntt, step),
                              km.secret_key, rot_noise, rot_crs));
  }
  return km;
}

}  // namespace pcol::ckks
