#include "pcol/ckks/serialize.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <sodium.h>

#include "pcol/errors.h"

namespace pcol::ckks {
namespace {

constexpr std::uint8_t kMagic[4] = {'P', 'C', 'O', 'L'};

[[noreturn]] void Fail(const std::string& what) {
  throw Error(ErrorCode::kSerialization, what);
}

}  // namespace

void ByteWriter::U16(std::uint16_t v) {
  for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void ByteWriter::U32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void ByteWriter::U64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void ByteWriter::F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
void ByteWriter::Raw(std::span<const std::uint8_t> bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}
void ByteWriter::Str(std::string_view s) {
  U32(static_cast<std::uint32_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
}
void ByteWriter::Poly(const RnsPoly& p) {
  U32(static_cast<std::uint32_t>(p.n()));
  U16(static_cast<std::uint16_t>(p.num_q()));
  U8(p.has_special() ? 1 : 0);
  U8(p.is_ntt() ? 1 : 0);
  U64(p.data().size());
  const std::size_t start = buf_.size();
  buf_.resize(start + 8 * p.data().size());
  std::uint8_t* out = buf_.data() + start;
  for (std::uint64_t v : p.data()) {
    for (int i = 0; i < 8; ++i) *out++ = static_cast<std::uint8_t>(v >> (8 * i));
  }
}

std::span<const std::uint8_t> ByteReader::Raw(std::size_t len) {
  if (len > data_.size() - pos_) Fail("truncated input");
  auto out = data_.subspan(pos_, len);
  pos_ += len;
  return out;
}
std::uint8_t ByteReader::U8() { return Raw(1)[0]; }
std::uint16_t ByteReader::U16() {
  auto b = Raw(2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}
std::uint32_t ByteReader::U32() {
  auto b = Raw(4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
std::uint64_t ByteReader::U64() {
  auto b = Raw(8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
double ByteReader::F64() { return std::bit_cast<double>(U64()); }
std::string ByteReader::Str() {
  const std::uint32_t len = U32();
  auto b = Raw(len);
  return std::string(b.begin(), b.end());
}
void ByteReader::ExpectDone() const {
  if (!done()) Fail("trailing bytes");
}

RnsPoly ByteReader::Poly(const Context& ctx) {
  const std::uint32_t n = U32();
  const std::uint16_t num_q = U16();
  const std::uint8_t special = U8();
  const std::uint8_t ntt = U8();
  const std::uint64_t count = U64();
  if (n != ctx.n() || num_q < 1 || num_q > ctx.params().chain.size() || special > 1 ||
      ntt > 1) {
    Fail("ring element does not match the parameters");
  }
  RnsPoly p(n, num_q, special == 1, ntt == 1);
  if (count != p.data().size()) Fail("ring element length mismatch");
  auto raw = Raw(8 * count);
  const std::uint8_t* in = raw.data();
  for (std::size_t c = 0; c < p.components(); ++c) {
    const u64 q = ctx.modulus(p.ContextIndex(ctx, c)).value();
    for (auto& v : p[c]) {
      std::uint64_t x = 0;
      for (int i = 7; i >= 0; --i) x = (x << 8) | in[i];
      in += 8;
      if (x >= q) Fail("residue out of range");
      v = x;
    }
  }
  return p;
}

Bytes Frame(TypeTag tag, const Bytes& payload) {
  ByteWriter w;
  w.Raw(kMagic);
  w.U16(kFormatVersion);
  w.U8(static_cast<std::uint8_t>(tag));
  w.U64(payload.size());
  w.Raw(payload);
  return w.Take();
}

std::span<const std::uint8_t> Unframe(TypeTag tag, std::span<const std::uint8_t> data) {
  ByteReader r(data);
  auto magic = r.Raw(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) Fail("bad magic");
  if (r.U16() != kFormatVersion) Fail("unsupported format version");
  if (r.U8() != static_cast<std::uint8_t>(tag)) Fail("unexpected object type");
  const std::uint64_t len = r.U64();
  auto payload = r.Raw(len);
  r.ExpectDone();
  return payload;
}

Bytes Serialize(const Params& p) {
  ByteWriter w;
  w.U64(p.ring_degree);
  w.U32(static_cast<std::uint32_t>(p.max_level));
  w.F64(p.scale);
  w.F64(p.error_stddev);
  w.U32(static_cast<std::uint32_t>(p.chain.size()));
  for (u64 q : p.chain) w.U64(q);
  w.U64(p.special_prime);
  w.Str(p.preset_label);
  return Frame(TypeTag::kParams, w.Take());
}

Params DeserializeParams(std::span<const std::uint8_t> data) {
  ByteReader r(Unframe(TypeTag::kParams, data));
  Params p;
  p.ring_degree = r.U64();
  p.max_level = static_cast<int>(r.U32());
  p.scale = r.F64();
  p.error_stddev = r.F64();
  const std::uint32_t count = r.U32();
  if (count > 1024) Fail("implausible chain length");
  for (std::uint32_t i = 0; i < count; ++i) p.chain.push_back(r.U64());
  p.special_prime = r.U64();
  p.preset_label = r.Str();
  r.ExpectDone();
  try {
    ValidateParams(p);
  } catch (const Error& e) {
    Fail(std::string("invalid parameters: ") + e.what());
  }
  return p;
}

std::string ParamsHash(const Params& params) {
  if (sodium_init() < 0) throw Error(ErrorCode::kInternal, "libsodium initialization failed");
  const Bytes bytes = Serialize(params);
  unsigned char digest[32];
  crypto_generichash(digest, sizeof digest, bytes.data(), bytes.size(), nullptr, 0);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 15]);
  }
  return out;
}

Bytes Serialize(const Plaintext& pt) {
  ByteWriter w;
  w.U32(static_cast<std::uint32_t>(pt.level));
  w.F64(pt.scale);
  w.F64(pt.value_bound);
  w.Poly(pt.poly);
  return Frame(TypeTag::kPlaintext, w.Take());
}

Plaintext DeserializePlaintext(const Context& ctx, std::span<const std::uint8_t> data) {
  ByteReader r(Unframe(TypeTag::kPlaintext, data));
  Plaintext pt;
  pt.level = static_cast<int>(r.U32());
  pt.scale = r.F64();
  pt.value_bound = r.F64();
  pt.poly = r.Poly(ctx);
  r.ExpectDone();
  if (pt.level > ctx.max_level() || pt.poly.num_q() != static_cast<std::size_t>(pt.level) + 1 ||
      pt.poly.has_special() || !pt.poly.is_ntt() || !(pt.scale > 0.0)) {
    Fail("inconsistent plaintext");
  }
  return pt;
}

Bytes Serialize(const Ciphertext& ct) {
  ByteWriter w;
  w.U32(static_cast<std::uint32_t>(ct.level));
  w.F64(ct.scale);
  w.F64(static_cast<double>(std::log2(std::max(ct.noise, 1.0L))));
  w.F64(ct.value_bound);
  w.Poly(ct.c0);
  w.Poly(ct.c1);
  return Frame(TypeTag::kCiphertext, w.Take());
}

Ciphertext DeserializeCiphertext(const Context& ctx, std::span<const std::uint8_t> data) {
  ByteReader r(Unframe(TypeTag::kCiphertext, data));
  Ciphertext ct;
  ct.level = static_cast<int>(r.U32());
  ct.scale = r.F64();
  const double log_noise = r.F64();
  ct.value_bound = r.F64();
  ct.c0 = r.Poly(ctx);
  ct.c1 = r.Poly(ctx);
  r.ExpectDone();
  if (ct.level > ctx.max_level() || !(ct.scale > 0.0) || !std::isfinite(log_noise)) {
    Fail("inconsistent ciphertext header");
  }
  for (const RnsPoly* p : {&ct.c0, &ct.c1}) {
    if (p->num_q() != static_cast<std::size_t>(ct.level) + 1 || p->has_special() ||
        !p->is_ntt()) {
      Fail("ciphertext component does not match its level");
    }
  }
  ct.noise = std::exp2(static_cast<long double>(log_noise));
  return ct;
}

Bytes Serialize(const PublicKey& pk) {
  ByteWriter w;
  w.Poly(pk.b);
  w.Poly(pk.a);
  return Frame(TypeTag::kPublicKey, w.Take());
}

PublicKey DeserializePublicKey(const Context& ctx, std::span<const std::uint8_t> data) {
  ByteReader r(Unframe(TypeTag::kPublicKey, data));
  PublicKey pk;
  pk.b = r.Poly(ctx);
  pk.a = r.Poly(ctx);
  r.ExpectDone();
  const std::size_t full = ctx.params().chain.size();
  for (const RnsPoly* p : {&pk.b, &pk.a}) {
    if (p->num_q() != full || p->has_special() || !p->is_ntt()) Fail("malformed public key");
  }
  return pk;
}

namespace {

void WriteKsk(ByteWriter& w, const KeySwitchKey& key) {
  w.U32(static_cast<std::uint32_t>(key.b.size()));
  for (std::size_t j = 0; j < key.b.size(); ++j) {
    w.Poly(key.b[j]);
    w.Poly(key.a[j]);
  }
}

KeySwitchKey ReadKsk(const Context& ctx, ByteReader& r) {
  const std::size_t full = ctx.params().chain.size();
  if (r.U32() != full) Fail("switching key digit count mismatch");
  KeySwitchKey key;
  for (std::size_t j = 0; j < full; ++j) {
    key.b.push_back(r.Poly(ctx));
    key.a.push_back(r.Poly(ctx));
    for (const RnsPoly* p : {&key.b.back(), &key.a.back()}) {
      if (p->num_q() != full || !p->has_special() || !p->is_ntt()) {
        Fail("malformed switching key");
      }
    }
  }
  return key;
}

}  // namespace

Bytes Serialize(const KeySwitchKey& key) {
  ByteWriter w;
  WriteKsk(w, key);
  return Frame(TypeTag::kKeySwitchKey, w.Take());
}

KeySwitchKey DeserializeKeySwitchKey(const Context& ctx, std::span<const std::uint8_t> data) {
  ByteReader r(Unframe(TypeTag::kKeySwitchKey, data));
  KeySwitchKey key = ReadKsk(ctx, r);
  r.ExpectDone();
  return key;
}

Bytes Serialize(const RotationKeys& keys) {
  ByteWriter w;
  w.U32(static_cast<std::uint32_t>(keys.keys.size()));
  for (const auto& [step, key] : keys.keys) {
    w.U64(step);
    WriteKsk(w, key);
  }
  return Frame(TypeTag::kRotationKeys, w.Take());
}

RotationKeys DeserializeRotationKeys(const Context& ctx, std::span<const std::uint8_t> data) {
  ByteReader r(Unframe(TypeTag::kRotationKeys, data));
  RotationKeys keys;
  const std::uint32_t count = r.U32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint64_t step = r.U64();
    if (step == 0 || step >= ctx.slots() || keys.keys.count(step)) Fail("bad rotation step");
    keys.keys.emplace(step, ReadKsk(ctx, r));
  }
  r.ExpectDone();
  return keys;
}

Bytes ExportSecretKey(const SecretKey& sk) {
  ByteWriter w;
  w.U32(static_cast<std::uint32_t>(sk.coeffs.size()));
  for (std::int64_t c : sk.coeffs) w.I64(c);
  return Frame(TypeTag::kSecretKey, w.Take());
}

SecretKey ImportSecretKey(const Context& ctx, std::span<const std::uint8_t> data) {
  ByteReader r(Unframe(TypeTag::kSecretKey, data));
  const std::uint32_t n = r.U32();
  if (n != ctx.n()) Fail("secret key ring degree mismatch");
  std::vector<std::int64_t> coeffs(n);
  for (auto& c : coeffs) {
    c = r.I64();
    if (c < -(std::int64_t{1} << 20) || c > (std::int64_t{1} << 20)) Fail("secret coefficient too large");
  }
  r.ExpectDone();
  return MakeSecretKey(ctx, std::move(coeffs));
}

void WriteFile(const std::string& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail("write to " + path + " failed");
}

Bytes ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail("cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace pcol::ckks
