#include "pcol/threshold.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

namespace pcol::threshold {
namespace {

using ckks::ByteReader;
using ckks::ByteWriter;
using ckks::Context;
using ckks::i128;
using ckks::u128;
using ckks::u64;

constexpr char kMessageMagic[7] = {'P', 'C', 'O', 'L', 'M', 'S', 'G'};
constexpr std::uint16_t kMessageVersion = 1;
constexpr int kDecryptMarginBits = 10;
constexpr int kRefreshHidingBits = 40;
constexpr int kMaxRefreshGainBits = 24;

std::size_t ChainSize(const Context& ctx) { return ctx.params().chain.size(); }

Bytes EncodePayload(std::uint64_t aux, std::span<const RnsPoly> polys) {
  ByteWriter w;
  w.U64(aux);
  w.U32(static_cast<std::uint32_t>(polys.size()));
  for (const RnsPoly& p : polys) w.Poly(p);
  return w.Take();
}

// Uniform in [-2^bits, 2^bits).
i128 SampleMask(ckks::Prng& prng, int bits) {
  const u128 raw = (static_cast<u128>(prng.NextU64()) << 64) | prng.NextU64();
  const u128 span = static_cast<u128>(1) << (bits + 1);
  return static_cast<i128>(raw & (span - 1)) - (static_cast<i128>(1) << bits);
}

// round(x * alpha / 2^62) for |x| < 2^122 and alpha < 2^64, half away from
// zero so that the map is odd.
i128 MulAlpha(i128 x, u64 alpha) {
  const bool neg = x < 0;
  const u128 m = static_cast<u128>(neg ? -x : x);
  const u128 hi = m >> 62;
  const u128 lo = m & ((static_cast<u128>(1) << 62) - 1);
  const u128 r = hi * alpha + ((lo * alpha + (static_cast<u128>(1) << 61)) >> 62);
  return neg ? -static_cast<i128>(r) : static_cast<i128>(r);
}

RnsPoly FromWide(const Context& ctx, std::span<const i128> coeffs, std::size_t num_q) {
  RnsPoly p(ctx.n(), num_q, false, false);
  for (std::size_t c = 0; c < num_q; ++c) {
    const ckks::Modulus& q = ctx.modulus(c);
    auto dst = p[c];
    for (std::size_t i = 0; i < coeffs.size(); ++i) dst[i] = q.ReduceSigned(coeffs[i]);
  }
  ckks::ToNtt(ctx, p);
  return p;
}

RnsPoly Gaussian(const Context& ctx, std::size_t num_q, bool special, ckks::Prng& prng) {
  return ckks::FromSigned(ctx, ckks::SampleGaussian(ctx.n(), ctx.params().error_stddev, prng),
                          num_q, special, true);
}

int CeilLog2(std::size_t x) { return static_cast<int>(std::bit_width(x - 1)); }

void CheckSmudgingBits(int bits) {
  if (bits < 0 || bits > 62) {
    throw Error(ErrorCode::kInvalidInput, "smudging bits must lie in [0, 62]");
  }
}

}  // namespace

SessionId MakeSessionId(std::uint64_t seed) {
  const Seed h = ckks::HashSeed("pcol/session", seed);
  SessionId id{};
  std::copy_n(h.begin(), id.size(), id.begin());
  return id;
}

CommonReference CommonReference::FromU64(std::uint64_t seed) {
  return CommonReference{ckks::HashSeed("pcol/crs", seed)};
}

ckks::Prng CommonReference::Stream(std::string_view label) const {
  return ckks::Prng(seed).Derive(label);
}

RnsPoly CommonReference::PublicKeyA(const Context& ctx) const {
  ckks::Prng prng = Stream("pk");
  return ckks::SampleUniform(ctx, ChainSize(ctx), false, prng);
}

std::vector<RnsPoly> CommonReference::KeySwitchA(const Context& ctx,
                                                 std::string_view label) const {
  ckks::Prng prng = Stream(label);
  std::vector<RnsPoly> out;
  for (std::size_t j = 0; j < ChainSize(ctx); ++j) {
    out.push_back(ckks::SampleUniform(ctx, ChainSize(ctx), true, prng));
  }
  return out;
}

RnsPoly CommonReference::RefreshA(const Context& ctx, std::uint64_t nonce) const {
  ckks::Prng prng = Stream("refresh" + std::to_string(nonce));
  return ckks::SampleUniform(ctx, ChainSize(ctx), false, prng);
}

const char* RoundTagName(RoundTag tag) {
  switch (tag) {
    case RoundTag::kPubKeyShare: return "PubKeyShare";
    case RoundTag::kRelinShareRound1: return "RelinShareRound1";
    case RoundTag::kRelinShareRound2: return "RelinShareRound2";
    case RoundTag::kRotKeyShare: return "RotKeyShare";
    case RoundTag::kPartialDecryption: return "PartialDecryption";
    case RoundTag::kRefreshShare: return "RefreshShare";
  }
  return "Unknown";
}

const char* SessionStateName(SessionState state) {
  switch (state) {
    case SessionState::kAwaitingKeyShares: return "AwaitingKeyShares";
    case SessionState::kKeysReady: return "KeysReady";
    case SessionState::kAwaitingPartials: return "AwaitingPartials";
    case SessionState::kDone: return "Done";
    case SessionState::kFailed: return "Failed";
  }
  return "Unknown";
}

Bytes ProtocolMessage::Serialize() const {
  ByteWriter w;
  w.Raw({reinterpret_cast<const std::uint8_t*>(kMessageMagic), sizeof(kMessageMagic)});
  w.U16(kMessageVersion);
  w.Raw(session_id);
  w.U16(sender);
  w.U8(static_cast<std::uint8_t>(round_tag));
  w.U64(payload.size());
  w.Raw(payload);
  return w.Take();
}

ProtocolMessage ProtocolMessage::Deserialize(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  const auto magic = r.Raw(sizeof(kMessageMagic));
  if (std::memcmp(magic.data(), kMessageMagic, sizeof(kMessageMagic)) != 0) {
    throw Error(ErrorCode::kSerialization, "not a protocol message");
  }
  if (r.U16() != kMessageVersion) {
    throw Error(ErrorCode::kSerialization, "unsupported protocol message version");
  }
  ProtocolMessage msg;
  const auto sid = r.Raw(msg.session_id.size());
  std::copy(sid.begin(), sid.end(), msg.session_id.begin());
  msg.sender = r.U16();
  const std::uint8_t tag = r.U8();
  if (tag < 1 || tag > 6) throw Error(ErrorCode::kSerialization, "unknown round tag");
  msg.round_tag = static_cast<RoundTag>(tag);
  const std::uint64_t len = r.U64();
  const auto body = r.Raw(len);
  msg.payload.assign(body.begin(), body.end());
  r.ExpectDone();
  return msg;
}

SecretKey GenSecretShare(const ContextPtr& ctx, std::uint64_t seed) {
  ckks::Prng prng = ckks::Prng::FromU64(seed, "pcol/share");
  return ckks::MakeSecretKey(*ctx, ckks::SampleTernary(ctx->n(), prng));
}

SecretKey JointSecret(const Context& ctx, std::span<const SecretKey> shares) {
  std::vector<std::int64_t> sum(ctx.n(), 0);
  for (const SecretKey& s : shares) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += s.coeffs[i];
  }
  return ckks::MakeSecretKey(ctx, std::move(sum));
}

RnsPoly PartialDecrypt(const Context& ctx, const Ciphertext& ct, const SecretKey& share,
                       int smudging_bits, ckks::Prng& prng) {
  CheckSmudgingBits(smudging_bits);
  const std::size_t num_q = ct.c1.num_q();
  RnsPoly d = ckks::FromSigned(ctx, ckks::SampleSmudging(ctx.n(), smudging_bits, prng), num_q,
                               false, true);
  ckks::MulAddInPlace(ctx, d, ct.c1, ckks::Restrict(share.ntt, num_q, false));
  return d;
}

ckks::Plaintext CombinePartialsUnchecked(const Context& ctx, const Ciphertext& ct,
                                         std::span<const RnsPoly> partials) {
  ckks::Plaintext pt;
  pt.poly = ct.c0;
  for (const RnsPoly& d : partials) ckks::AddInPlace(ctx, pt.poly, d);
  pt.level = ct.level;
  pt.scale = ct.scale;
  pt.value_bound = ct.value_bound;
  return pt;
}

Party::Party(ContextPtr ctx, PartyId id, std::uint64_t seed)
    : ctx_(std::move(ctx)),
      id_(id),
      root_(ckks::Prng::FromU64(seed, "pcol/party")),
      share_(GenSecretShare(ctx_, seed)) {}

ckks::Prng Party::NextStream(std::string_view label) {
  return root_.Derive(std::string(label) + "/" + std::to_string(counter_++));
}

ProtocolMessage Party::PubKeyShare(const SessionId& sid, const CommonReference& crs) {
  ckks::Prng noise = NextStream("pk");
  const PublicKey share = ckks::GenPublicKey(*ctx_, share_, crs.PublicKeyA(*ctx_), noise);
  return {sid, id_, RoundTag::kPubKeyShare, EncodePayload(0, {&share.b, 1})};
}

ProtocolMessage Party::RelinRound1(const SessionId& sid, const CommonReference& crs) {
  const Context& ctx = *ctx_;
  ckks::Prng prng = NextStream("relin1");
  relin_u_ = ckks::MakeSecretKey(ctx, ckks::SampleTernary(ctx.n(), prng)).ntt;
  const std::vector<RnsPoly> a = crs.KeySwitchA(ctx, "relin");
  const std::size_t digits = a.size();
  std::vector<RnsPoly> out(2 * digits);
  for (std::size_t j = 0; j < digits; ++j) {
    // h0 = -u a + P g_j s_i + e,  h1 = s_i a + e
    RnsPoly h0 = Gaussian(ctx, digits, true, prng);
    ckks::SubInPlace(ctx, h0, ckks::Mul(ctx, *relin_u_, a[j]));
    ckks::AddInPlace(ctx, h0, ckks::GadgetTerm(ctx, share_.ntt, j));
    RnsPoly h1 = Gaussian(ctx, digits, true, prng);
    ckks::MulAddInPlace(ctx, h1, share_.ntt, a[j]);
    out[j] = std::move(h0);
    out[digits + j] = std::move(h1);
  }
  return {sid, id_, RoundTag::kRelinShareRound1, EncodePayload(0, out)};
}

ProtocolMessage Party::RelinRound2(const SessionId& sid, const KeySwitchKey& aggregate) {
  if (!relin_u_) {
    throw Error(ErrorCode::kProtocolOrder, "relinearization round 2 before round 1");
  }
  const Context& ctx = *ctx_;
  ckks::Prng prng = NextStream("relin2");
  RnsPoly u_minus_s = *relin_u_;
  ckks::SubInPlace(ctx, u_minus_s, share_.ntt);
  const std::size_t digits = aggregate.b.size();
  std::vector<RnsPoly> out(2 * digits);
  for (std::size_t j = 0; j < digits; ++j) {
    // h0' = s_i h0 + e,  h1' = (u_i - s_i) h1 + e
    RnsPoly h0 = Gaussian(ctx, ChainSize(ctx), true, prng);
    ckks::MulAddInPlace(ctx, h0, share_.ntt, aggregate.b[j]);
    RnsPoly h1 = Gaussian(ctx, ChainSize(ctx), true, prng);
    ckks::MulAddInPlace(ctx, h1, u_minus_s, aggregate.a[j]);
    out[j] = std::move(h0);
    out[digits + j] = std::move(h1);
  }
  relin_u_.reset();
  return {sid, id_, RoundTag::kRelinShareRound2, EncodePayload(0, out)};
}

ProtocolMessage Party::RotKeyShare(const SessionId& sid, const CommonReference& crs,
                                   std::size_t step) {
  const Context& ctx = *ctx_;
  ckks::Prng prng = NextStream("rot");
  const std::vector<RnsPoly> a = crs.KeySwitchA(ctx, "rot" + std::to_string(step));
  const RnsPoly rotated = ckks::GaloisSecret(ctx, share_.ntt, step);
  std::vector<RnsPoly> out;
  for (std::size_t j = 0; j < a.size(); ++j) {
    RnsPoly b = Gaussian(ctx, a.size(), true, prng);
    ckks::SubInPlace(ctx, b, ckks::Mul(ctx, a[j], share_.ntt));
    ckks::AddInPlace(ctx, b, ckks::GadgetTerm(ctx, rotated, j));
    out.push_back(std::move(b));
  }
  return {sid, id_, RoundTag::kRotKeyShare, EncodePayload(step, out)};
}

ProtocolMessage Party::PartialDecryption(const SessionId& sid, const Ciphertext& ct,
                                         int smudging_bits) {
  ckks::Prng prng = NextStream("decrypt");
  const RnsPoly d = PartialDecrypt(*ctx_, ct, share_, smudging_bits, prng);
  return {sid, id_, RoundTag::kPartialDecryption,
          EncodePayload(static_cast<std::uint64_t>(smudging_bits), {&d, 1})};
}

ProtocolMessage Party::RefreshShare(const SessionId& sid, const CommonReference& crs,
                                    const RefreshRequest& request) {
  const Context& ctx = *ctx_;
  CheckSmudgingBits(request.smudging_bits);
  ckks::Prng prng = NextStream("refresh");
  const Ciphertext& ct = request.input;
  const std::size_t low = ct.c1.num_q();
  const std::size_t top = ChainSize(ctx);

  std::vector<i128> mask(ctx.n()), scaled(ctx.n());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = SampleMask(prng, request.mask_bits);
    scaled[i] = MulAlpha(mask[i], request.alpha);
  }
  // h0 = -M + s_i c1 + smudge over Q_level.
  RnsPoly h0 = PartialDecrypt(ctx, ct, share_, request.smudging_bits, prng);
  ckks::SubInPlace(ctx, h0, FromWide(ctx, mask, low));
  // h1 = round(alpha M) - s_i a + e over Q_L.
  RnsPoly h1 = FromWide(ctx, scaled, top);
  ckks::AddInPlace(ctx, h1, Gaussian(ctx, top, false, prng));
  ckks::SubInPlace(ctx, h1,
                   ckks::Mul(ctx, crs.RefreshA(ctx, request.nonce),
                             ckks::Restrict(share_.ntt, top, false)));
  const RnsPoly parts[2] = {std::move(h0), std::move(h1)};
  return {sid, id_, RoundTag::kRefreshShare, EncodePayload(request.nonce, parts)};
}

Session::Session(ContextPtr ctx, SessionId id, std::size_t parties, CommonReference crs)
    : ctx_(std::move(ctx)), eval_(ctx_), id_(id), parties_(parties), crs_(crs) {
  if (parties < 2 || parties > 0xffff) {
    throw Error(ErrorCode::kInvalidInput, "a full-threshold session needs at least 2 parties");
  }
}

void Session::Fail(ErrorCode code, const std::string& message) {
  state_ = SessionState::kFailed;
  expected_.reset();
  round_.clear();
  throw Error(code, message);
}

void Session::RequireUsable() const {
  if (state_ == SessionState::kFailed) {
    throw Error(ErrorCode::kProtocolOrder, "session has failed");
  }
}

void Session::RequireIdle() {
  RequireUsable();
  if ((state_ != SessionState::kKeysReady && state_ != SessionState::kDone) || expected_) {
    Fail(ErrorCode::kProtocolOrder, "session is not ready for a new protocol");
  }
}

void Session::Expect(RoundTag tag) {
  expected_ = tag;
  round_.clear();
}

Session::Contribution Session::Parse(const ProtocolMessage& msg) const {
  const Context& ctx = *ctx_;
  const std::size_t full = ChainSize(ctx);
  ByteReader r(msg.payload);
  Contribution c;
  c.aux = r.U64();
  const std::uint32_t count = r.U32();
  if (count > 2 * full) throw Error(ErrorCode::kSerialization, "too many ring elements");
  for (std::uint32_t i = 0; i < count; ++i) c.polys.push_back(r.Poly(ctx));
  r.ExpectDone();

  auto shape = [&](std::size_t expected_count, std::size_t num_q, bool special) {
    if (c.polys.size() != expected_count) return false;
    return std::all_of(c.polys.begin(), c.polys.end(), [&](const RnsPoly& p) {
      return p.num_q() == num_q && p.has_special() == special && p.is_ntt();
    });
  };
  bool ok = false;
  switch (msg.round_tag) {
    case RoundTag::kPubKeyShare:
      ok = c.aux == 0 && shape(1, full, false);
      break;
    case RoundTag::kRelinShareRound1:
    case RoundTag::kRelinShareRound2:
      ok = c.aux == 0 && shape(2 * full, full, true);
      break;
    case RoundTag::kRotKeyShare:
      ok = pending_step_ && c.aux == *pending_step_ && shape(full, full, true);
      break;
    case RoundTag::kPartialDecryption:
      ok = c.aux <= 62 && shape(1, pending_ct_->c1.num_q(), false);
      break;
    case RoundTag::kRefreshShare:
      ok = c.aux == pending_refresh_->nonce && c.polys.size() == 2 &&
           c.polys[0].num_q() == pending_refresh_->input.c1.num_q() &&
           c.polys[1].num_q() == full && !c.polys[0].has_special() &&
           !c.polys[1].has_special() && c.polys[0].is_ntt() && c.polys[1].is_ntt();
      break;
  }
  if (!ok) throw Error(ErrorCode::kSerialization, "payload does not match the round");
  return c;
}

void Session::Submit(const ProtocolMessage& msg) {
  RequireUsable();
  if (msg.session_id != id_) Fail(ErrorCode::kBadShare, "message for a different session");
  if (msg.sender >= parties_) Fail(ErrorCode::kBadShare, "unknown sender");
  if (!expected_ || msg.round_tag != *expected_) {
    Fail(ErrorCode::kProtocolOrder,
         std::string("unexpected ") + RoundTagName(msg.round_tag) + " message");
  }
  if (round_.count(msg.sender)) {
    Fail(ErrorCode::kProtocolOrder, "duplicate message from party " + std::to_string(msg.sender));
  }
  Contribution c;
  try {
    c = Parse(msg);
  } catch (const Error& e) {
    Fail(ErrorCode::kBadShare, e.what());
  }
  round_.emplace(msg.sender, std::move(c));
  transcript_.push_back({msg.sender, msg.round_tag, msg.payload.size()});
}

std::vector<Session::Contribution> Session::TakeRound(RoundTag tag) {
  RequireUsable();
  if (expected_ != tag) {
    Fail(ErrorCode::kProtocolOrder,
         std::string("cannot finish ") + RoundTagName(tag) + " in the current state");
  }
  if (round_.size() != parties_) {
    std::string missing;
    for (PartyId p = 0; p < parties_; ++p) {
      if (!round_.count(p)) missing += (missing.empty() ? "" : ",") + std::to_string(p);
    }
    Fail(ErrorCode::kMissingParty,
         std::string(RoundTagName(tag)) + " missing from parties " + missing);
  }
  std::vector<Contribution> out;
  for (auto& [id, c] : round_) out.push_back(std::move(c));
  round_.clear();
  expected_.reset();
  return out;
}

PublicKey Session::FinishPublicKey() {
  auto round = TakeRound(RoundTag::kPubKeyShare);
  const Context& ctx = *ctx_;
  PublicKey pk;
  pk.b = round[0].polys[0];
  for (std::size_t i = 1; i < round.size(); ++i) ckks::AddInPlace(ctx, pk.b, round[i].polys[0]);
  pk.a = crs_.PublicKeyA(ctx);
  public_key_ = pk;
  Expect(RoundTag::kRelinShareRound1);
  return pk;
}

KeySwitchKey Session::FinishRelinRound1() {
  auto round = TakeRound(RoundTag::kRelinShareRound1);
  const Context& ctx = *ctx_;
  const std::size_t digits = ChainSize(ctx);
  KeySwitchKey agg;
  for (std::size_t j = 0; j < 2 * digits; ++j) {
    RnsPoly acc = round[0].polys[j];
    for (std::size_t i = 1; i < round.size(); ++i) ckks::AddInPlace(ctx, acc, round[i].polys[j]);
    (j < digits ? agg.b : agg.a).push_back(std::move(acc));
  }
  relin_round1_ = agg;
  Expect(RoundTag::kRelinShareRound2);
  return agg;
}

KeySwitchKey Session::FinishRelinKey() {
  auto round = TakeRound(RoundTag::kRelinShareRound2);
  const Context& ctx = *ctx_;
  const std::size_t digits = ChainSize(ctx);
  KeySwitchKey key;
  for (std::size_t j = 0; j < digits; ++j) {
    RnsPoly b = round[0].polys[j];
    ckks::AddInPlace(ctx, b, round[0].polys[digits + j]);
    for (std::size_t i = 1; i < round.size(); ++i) {
      ckks::AddInPlace(ctx, b, round[i].polys[j]);
      ckks::AddInPlace(ctx, b, round[i].polys[digits + j]);
    }
    key.b.push_back(std::move(b));
    key.a.push_back(relin_round1_->a[j]);
  }
  relin_round1_.reset();
  relin_key_ = key;
  state_ = SessionState::kKeysReady;
  return key;
}

void Session::BeginRotation(std::size_t step) {
  RequireIdle();
  step = ckks::NormalizeStep(*ctx_, static_cast<long long>(step));
  if (step == 0) throw Error(ErrorCode::kInvalidInput, "rotation by zero needs no key");
  pending_step_ = step;
  Expect(RoundTag::kRotKeyShare);
}

KeySwitchKey Session::FinishRotationKey() {
  auto round = TakeRound(RoundTag::kRotKeyShare);
  const Context& ctx = *ctx_;
  KeySwitchKey key;
  key.a = crs_.KeySwitchA(ctx, "rot" + std::to_string(*pending_step_));
  for (std::size_t j = 0; j < key.a.size(); ++j) {
    RnsPoly b = round[0].polys[j];
    for (std::size_t i = 1; i < round.size(); ++i) ckks::AddInPlace(ctx, b, round[i].polys[j]);
    key.b.push_back(std::move(b));
  }
  rotation_keys_.keys[*pending_step_] = key;
  pending_step_.reset();
  return key;
}

const PublicKey& Session::public_key() const {
  if (!public_key_) throw Error(ErrorCode::kProtocolOrder, "public key not generated yet");
  return *public_key_;
}

const KeySwitchKey& Session::relin_key() const {
  if (!relin_key_) throw Error(ErrorCode::kProtocolOrder, "relinearization key not generated yet");
  return *relin_key_;
}

const Ciphertext& Session::BeginDecryption(const Ciphertext& ct) {
  RequireIdle();
  pending_ct_ = eval_.BoostScale(ct, eval_.MaxBoostBits(ct, kDecryptMarginBits));
  pending_refresh_.reset();
  state_ = SessionState::kAwaitingPartials;
  Expect(RoundTag::kPartialDecryption);
  return *pending_ct_;
}

ckks::Plaintext Session::FinishDecryption() {
  auto round = TakeRound(RoundTag::kPartialDecryption);
  const Ciphertext& ct = *pending_ct_;
  std::uint64_t bits = 0;
  std::vector<RnsPoly> partials;
  for (auto& c : round) {
    bits = std::max(bits, c.aux);
    partials.push_back(std::move(c.polys[0]));
  }
  const long double magnitude = ct.noise + static_cast<long double>(ct.scale) * ct.value_bound +
                                parties_ * std::ldexp(1.0L, static_cast<int>(bits));
  if (std::log2(magnitude) >= ctx_->log2_modulus(ct.level) - 2) {
    Fail(ErrorCode::kNoiseOverflow, "smudging noise exceeds the modulus headroom");
  }
  ckks::Plaintext pt = CombinePartialsUnchecked(*ctx_, ct, partials);
  pending_ct_.reset();
  state_ = SessionState::kDone;
  return pt;
}

const RefreshRequest& Session::BeginRefresh(const Ciphertext& ct, int smudging_bits) {
  RequireIdle();
  CheckSmudgingBits(smudging_bits);
  if (ct.level < 1) throw Error(ErrorCode::kOutOfLevels, "refresh needs an input at level >= 1");
  const long double used = ct.noise + static_cast<long double>(ct.scale) * ct.value_bound;
  const double log_q = ctx_->log2_modulus(ct.level);
  if (std::log2(std::max(used, 1.0L)) >= log_q - 2) {
    Fail(ErrorCode::kNoiseOverflow, "input noise estimate is already unreliable");
  }
  RefreshRequest req;
  req.mask_bits = std::min(120, static_cast<int>(std::floor(log_q)) - CeilLog2(parties_) - 3);
  // Pre-scaling by 2^gain shrinks the smudging error relative to the message
  // while the mask keeps kRefreshHidingBits of statistical distance.
  const double headroom = req.mask_bits - std::log2(ct.scale) -
                          std::log2(std::max(ct.value_bound, 1.0)) - kRefreshHidingBits;
  int gain = std::clamp(static_cast<int>(std::floor(headroom)), 0, kMaxRefreshGainBits);
  gain = std::min(gain, eval_.MaxBoostBits(ct, 2));
  req.input = eval_.BoostScale(ct, gain);
  const long double alpha = ctx_->level_scale(ctx_->max_level()) / req.input.scale;
  if (!(alpha < 4.0L)) {
    throw Error(ErrorCode::kScaleMismatch, "refresh input scale is too small");
  }
  req.alpha = static_cast<std::uint64_t>(std::llround(std::ldexp(alpha, 62)));
  req.nonce = refresh_count_;
  req.smudging_bits = smudging_bits;
  pending_refresh_ = std::move(req);
  pending_ct_.reset();
  state_ = SessionState::kAwaitingPartials;
  Expect(RoundTag::kRefreshShare);
  return *pending_refresh_;
}

Ciphertext Session::FinishRefresh() {
  auto round = TakeRound(RoundTag::kRefreshShare);
  const Context& ctx = *ctx_;
  const RefreshRequest& req = *pending_refresh_;
  const std::size_t top = ChainSize(ctx);

  RnsPoly masked = req.input.c0;
  for (const auto& c : round) ckks::AddInPlace(ctx, masked, c.polys[0]);
  ckks::FromNtt(ctx, masked);
  std::vector<i128> x = ckks::CenteredLift128(ctx, masked);
  for (auto& v : x) v = MulAlpha(v, req.alpha);

  Ciphertext out;
  out.c0 = FromWide(ctx, x, top);
  for (const auto& c : round) ckks::AddInPlace(ctx, out.c0, c.polys[1]);
  out.c1 = crs_.RefreshA(ctx, req.nonce);
  out.level = ctx.max_level();
  const long double alpha = std::ldexp(static_cast<long double>(req.alpha), -62);
  out.scale = static_cast<double>(alpha * req.input.scale);
  out.value_bound = req.input.value_bound;
  out.noise = alpha * (req.input.noise + parties_ * std::ldexp(1.0L, req.smudging_bits)) +
              parties_ * (eval_.FreshNoise() + 1.0L);
  pending_refresh_.reset();
  ++refresh_count_;
  state_ = SessionState::kDone;
  return out;
}

InProcessDriver::InProcessDriver(ContextPtr ctx, std::size_t parties, std::uint64_t seed)
    : ctx_(ctx),
      eval_(ctx),
      session_(ctx, MakeSessionId(seed), parties, CommonReference::FromU64(seed)),
      scheduler_(seed),
      encrypt_prng_(ckks::Prng::FromU64(seed, "pcol/driver/encrypt")) {
  ckks::Prng seeds = ckks::Prng::FromU64(seed, "pcol/driver/parties");
  for (std::size_t i = 0; i < parties; ++i) {
    parties_.emplace_back(ctx_, static_cast<PartyId>(i), seeds.NextU64());
  }
}

template <typename MakeMessage>
void InProcessDriver::RunRound(MakeMessage&& make) {
  std::vector<Bytes> wire;
  for (Party& p : parties_) {
    if (faults_.offline.count(p.id())) continue;
    wire.push_back(make(p).Serialize());
  }
  std::shuffle(wire.begin(), wire.end(), scheduler_);
  if (faults_.duplicate_first && !wire.empty()) wire.push_back(wire.front());
  for (const Bytes& bytes : wire) session_.Submit(ProtocolMessage::Deserialize(bytes));
}

void InProcessDriver::GenerateKeys(std::span<const long long> rotation_steps) {
  const SessionId& sid = session_.id();
  const CommonReference& crs = session_.crs();
  RunRound([&](Party& p) { return p.PubKeyShare(sid, crs); });
  session_.FinishPublicKey();
  RunRound([&](Party& p) { return p.RelinRound1(sid, crs); });
  const KeySwitchKey aggregate = session_.FinishRelinRound1();
  RunRound([&](Party& p) { return p.RelinRound2(sid, aggregate); });
  session_.FinishRelinKey();
  for (long long step : rotation_steps) GenerateRotationKey(step);
}

void InProcessDriver::GenerateRotationKey(long long step) {
  const std::size_t s = ckks::NormalizeStep(*ctx_, step);
  if (s == 0 || session_.rotation_keys().Find(s)) return;
  session_.BeginRotation(s);
  RunRound([&](Party& p) { return p.RotKeyShare(session_.id(), session_.crs(), s); });
  session_.FinishRotationKey();
}

Ciphertext InProcessDriver::Encrypt(std::span<const double> values) {
  return eval_.EncryptValues(values, session_.public_key(), encrypt_prng_);
}

ckks::Plaintext InProcessDriver::DecryptPlaintext(const Ciphertext& ct, int smudging_bits) {
  const Ciphertext target = session_.BeginDecryption(ct);
  RunRound([&](Party& p) { return p.PartialDecryption(session_.id(), target, smudging_bits); });
  return session_.FinishDecryption();
}

std::vector<double> InProcessDriver::Decrypt(const Ciphertext& ct, int smudging_bits) {
  return eval_.encoder().Decode(DecryptPlaintext(ct, smudging_bits));
}

Ciphertext InProcessDriver::Refresh(const Ciphertext& ct, int smudging_bits) {
  const RefreshRequest request = session_.BeginRefresh(ct, smudging_bits);
  RunRound([&](Party& p) { return p.RefreshShare(session_.id(), session_.crs(), request); });
  return session_.FinishRefresh();
}

SecretKey InProcessDriver::JointSecretForTesting() const {
  std::vector<SecretKey> shares;
  for (const Party& p : parties_) shares.push_back(p.share());
  return JointSecret(*ctx_, shares);
}

}  // namespace pcol::threshold
