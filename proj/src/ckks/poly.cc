#include "pcol/ckks/poly.h"

#include <cmath>

#include "pcol/errors.h"

namespace pcol::ckks {

RnsPoly::RnsPoly(std::size_t n, std::size_t num_q, bool special, bool ntt_form)
    : n_(n), num_q_(num_q), special_(special), ntt_(ntt_form),
      data_(n * (num_q + (special ? 1 : 0)), 0) {}

RnsPoly FromSigned(const Context& ctx, std::span<const std::int64_t> coeffs,
                   std::size_t num_q, bool special, bool to_ntt) {
  RnsPoly p(ctx.n(), num_q, special, false);
  for (std::size_t c = 0; c < p.components(); ++c) {
    const Modulus& q = ctx.modulus(p.ContextIndex(ctx, c));
    auto dst = p[c];
    for (std::size_t i = 0; i < ctx.n(); ++i) dst[i] = q.ReduceSigned(coeffs[i]);
  }
  if (to_ntt) ToNtt(ctx, p);
  return p;
}

void ToNtt(const Context& ctx, RnsPoly& p) {
  if (p.is_ntt()) return;
  for (std::size_t c = 0; c < p.components(); ++c) {
    ctx.ntt(p.ContextIndex(ctx, c)).Forward(p[c].data());
  }
  p.set_ntt(true);
}

void FromNtt(const Context& ctx, RnsPoly& p) {
  if (!p.is_ntt()) return;
  for (std::size_t c = 0; c < p.components(); ++c) {
    ctx.ntt(p.ContextIndex(ctx, c)).Inverse(p[c].data());
  }
  p.set_ntt(false);
}

namespace {

void CheckCompatible(const RnsPoly& a, const RnsPoly& b) {
  if (a.n() != b.n() || a.num_q() != b.num_q() || a.has_special() != b.has_special() ||
      a.is_ntt() != b.is_ntt()) {
    throw Error(ErrorCode::kLevelMismatch, "ring elements live in different rings");
  }
}

}  // namespace

void AddInPlace(const Context& ctx, RnsPoly& a, const RnsPoly& b) {
  CheckCompatible(a, b);
  for (std::size_t c = 0; c < a.components(); ++c) {
    const Modulus& q = ctx.modulus(a.ContextIndex(ctx, c));
    auto x = a[c];
    auto y = b[c];
    for (std::size_t i = 0; i < a.n(); ++i) x[i] = q.Add(x[i], y[i]);
  }
}

void SubInPlace(const Context& ctx, RnsPoly& a, const RnsPoly& b) {
  CheckCompatible(a, b);
  for (std::size_t c = 0; c < a.components(); ++c) {
    const Modulus& q = ctx.modulus(a.ContextIndex(ctx, c));
    auto x = a[c];
    auto y = b[c];
    for (std::size_t i = 0; i < a.n(); ++i) x[i] = q.Sub(x[i], y[i]);
  }
}

void NegateInPlace(const Context& ctx, RnsPoly& a) {
  for (std::size_t c = 0; c < a.components(); ++c) {
    const Modulus& q = ctx.modulus(a.ContextIndex(ctx, c));
    for (auto& v : a[c]) v = q.Neg(v);
  }
}

RnsPoly Mul(const Context& ctx, const RnsPoly& a, const RnsPoly& b) {
  CheckCompatible(a, b);
  RnsPoly out(a.n(), a.num_q(), a.has_special(), true);
  for (std::size_t c = 0; c < a.components(); ++c) {
    const Modulus& q = ctx.modulus(a.ContextIndex(ctx, c));
    auto x = a[c];
    auto y = b[c];
    auto z = out[c];
    for (std::size_t i = 0; i < a.n(); ++i) z[i] = q.Mul(x[i], y[i]);
  }
  return out;
}

void MulAddInPlace(const Context& ctx, RnsPoly& acc, const RnsPoly& a, const RnsPoly& b) {
  CheckCompatible(acc, a);
  CheckCompatible(a, b);
  for (std::size_t c = 0; c < a.components(); ++c) {
    const Modulus& q = ctx.modulus(a.ContextIndex(ctx, c));
    auto x = a[c];
    auto y = b[c];
    auto z = acc[c];
    for (std::size_t i = 0; i < a.n(); ++i) z[i] = q.Add(z[i], q.Mul(x[i], y[i]));
  }
}

void MulScalarInPlace(const Context& ctx, RnsPoly& a, __int128 k) {
  for (std::size_t c = 0; c < a.components(); ++c) {
    const Modulus& q = ctx.modulus(a.ContextIndex(ctx, c));
    const u64 w = q.ReduceSigned(k);
    const u64 ws = q.ShoupPrecompute(w);
    for (auto& v : a[c]) v = q.MulShoup(v, w, ws);
  }
}

void AddConstantInPlace(const Context& ctx, RnsPoly& a, __int128 k) {
  for (std::size_t c = 0; c < a.components(); ++c) {
    const Modulus& q = ctx.modulus(a.ContextIndex(ctx, c));
    const u64 w = q.ReduceSigned(k);
    auto x = a[c];
    if (a.is_ntt()) {
      for (auto& v : x) v = q.Add(v, w);
    } else {
      x[0] = q.Add(x[0], w);
    }
  }
}

RnsPoly Restrict(const RnsPoly& a, std::size_t num_q, bool special) {
  if (num_q > a.num_q() || (special && !a.has_special())) {
    throw Error(ErrorCode::kLevelMismatch, "cannot restrict to a larger basis");
  }
  RnsPoly out(a.n(), num_q, special, a.is_ntt());
  for (std::size_t c = 0; c < num_q; ++c) {
    std::copy(a[c].begin(), a[c].end(), out[c].begin());
  }
  if (special) {
    std::copy(a[a.num_q()].begin(), a[a.num_q()].end(), out[num_q].begin());
  }
  return out;
}

RnsPoly ApplyGalois(const RnsPoly& a, const std::vector<std::size_t>& perm) {
  if (!a.is_ntt()) throw Error(ErrorCode::kInvalidInput, "Galois map expects NTT form");
  RnsPoly out(a.n(), a.num_q(), a.has_special(), true);
  for (std::size_t c = 0; c < a.components(); ++c) {
    auto src = a[c];
    auto dst = out[c];
    for (std::size_t i = 0; i < a.n(); ++i) dst[i] = src[perm[i]];
  }
  return out;
}

namespace {

// Subtracts the centered lift of `top` (coefficient form, modulus qt) from
// every component c < count and multiplies by inv[c].
void DivideByTop(const Context& ctx, RnsPoly& a, std::vector<u64> top, const Modulus& qt,
                 std::size_t count, const std::vector<u64>& inv) {
  const std::size_t n = a.n();
  std::vector<u64> tmp(n);
  const u64 half = qt.value() >> 1;
  for (std::size_t c = 0; c < count; ++c) {
    const Modulus& q = ctx.modulus(c);
    // Adding qt/2 before and subtracting it after turns floor into rounding.
    const u64 half_mod = q.Reduce(half);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = q.Sub(q.Reduce(top[i]), half_mod);
    ctx.ntt(c).Forward(tmp.data());
    const u64 w = inv[c];
    const u64 ws = q.ShoupPrecompute(w);
    auto x = a[c];
    for (std::size_t i = 0; i < n; ++i) x[i] = q.MulShoup(q.Sub(x[i], tmp[i]), w, ws);
  }
}

}  // namespace

void RescaleInPlace(const Context& ctx, RnsPoly& a) {
  if (!a.is_ntt() || a.has_special() || a.num_q() < 2) {
    throw Error(ErrorCode::kOutOfLevels, "rescale needs at least two chain primes");
  }
  const std::size_t top = a.num_q() - 1;
  const Modulus& qt = ctx.modulus(top);
  std::vector<u64> last(a[top].begin(), a[top].end());
  ctx.ntt(top).Inverse(last.data());
  // Shift by qt/2 so that the subtracted remainder is the centered one.
  const u64 half = qt.value() >> 1;
  for (auto& v : last) v = qt.Add(v, half);
  std::vector<u64> inv(top);
  for (std::size_t c = 0; c < top; ++c) inv[c] = ctx.inv_q_mod(static_cast<int>(top), c);
  DivideByTop(ctx, a, std::move(last), qt, top, inv);
  a = Restrict(a, top, false);
}

void ModDownInPlace(const Context& ctx, RnsPoly& a) {
  if (!a.has_special() || !a.is_ntt()) {
    throw Error(ErrorCode::kInvalidInput, "mod-down needs an NTT-form element with P");
  }
  const std::size_t sp = a.num_q();
  const Modulus& p = ctx.modulus(ctx.special_index());
  std::vector<u64> last(a[sp].begin(), a[sp].end());
  ctx.ntt(ctx.special_index()).Inverse(last.data());
  const u64 half = p.value() >> 1;
  for (auto& v : last) v = p.Add(v, half);
  std::vector<u64> inv(sp);
  for (std::size_t c = 0; c < sp; ++c) inv[c] = ctx.inv_p_mod(c);
  DivideByTop(ctx, a, std::move(last), p, sp, inv);
  a = Restrict(a, sp, false);
}

namespace {

// Mixed-radix digits of the residues of one coefficient.
void GarnerDigits(const Context& ctx, const std::vector<u64>& residues,
                  std::vector<u64>& digits) {
  const std::size_t k = residues.size();
  digits.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const Modulus& q = ctx.modulus(i);
    u64 t = residues[i];
    for (std::size_t j = 0; j < i; ++j) {
      t = q.Mul(q.Sub(t, q.Reduce(digits[j])), ctx.garner_inv(i, j));
    }
    digits[i] = t;
  }
}

struct LiftWork {
  std::vector<long double> weights;  // prod_{j<i} q_j
  std::vector<u128> weights_mod;     // same, mod 2^128
};

LiftWork MakeWeights(const Context& ctx, std::size_t k) {
  LiftWork w;
  long double acc = 1.0L;
  u128 acc_mod = 1;
  for (std::size_t i = 0; i < k; ++i) {
    w.weights.push_back(acc);
    w.weights_mod.push_back(acc_mod);
    acc *= static_cast<long double>(ctx.params().chain[i]);
    acc_mod *= ctx.params().chain[i];
  }
  return w;
}

template <typename Emit>
void LiftEach(const Context& ctx, const RnsPoly& a, Emit&& emit) {
  if (a.is_ntt() || a.has_special()) {
    throw Error(ErrorCode::kInvalidInput, "lift expects a coefficient-form chain element");
  }
  const std::size_t k = a.num_q();
  const LiftWork w = MakeWeights(ctx, k);
  std::vector<u64> res(k), neg(k), d_pos, d_neg;
  for (std::size_t i = 0; i < a.n(); ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      res[c] = a[c][i];
      neg[c] = ctx.modulus(c).Neg(res[c]);
    }
    GarnerDigits(ctx, res, d_pos);
    GarnerDigits(ctx, neg, d_neg);
    long double pos = 0.0L, ngv = 0.0L;
    u128 pos_mod = 0, neg_mod = 0;
    for (std::size_t c = k; c-- > 0;) {
      pos += static_cast<long double>(d_pos[c]) * w.weights[c];
      ngv += static_cast<long double>(d_neg[c]) * w.weights[c];
      pos_mod += static_cast<u128>(d_pos[c]) * w.weights_mod[c];
      neg_mod += static_cast<u128>(d_neg[c]) * w.weights_mod[c];
    }
    emit(i, pos <= ngv, pos, ngv, pos_mod, neg_mod);
  }
}

}  // namespace

std::vector<long double> CenteredLift(const Context& ctx, const RnsPoly& a) {
  std::vector<long double> out(a.n());
  LiftEach(ctx, a, [&](std::size_t i, bool positive, long double pos, long double neg,
                       u128, u128) { out[i] = positive ? pos : -neg; });
  return out;
}

std::vector<__int128> CenteredLift128(const Context& ctx, const RnsPoly& a) {
  std::vector<__int128> out(a.n());
  LiftEach(ctx, a, [&](std::size_t i, bool positive, long double, long double, u128 pos,
                       u128 neg) {
    out[i] = positive ? static_cast<__int128>(pos) : -static_cast<__int128>(neg);
  });
  return out;
}

}  // namespace pcol::ckks
