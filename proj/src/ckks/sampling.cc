#include "pcol/ckks/sampling.h"

#include <cmath>
#include <cstring>
#include <numbers>

#include <sodium.h>

#include "pcol/errors.h"

namespace pcol::ckks {
namespace {

void EnsureSodium() {
  static const int status = sodium_init();
  if (status < 0) throw Error(ErrorCode::kInternal, "libsodium initialization failed");
}

}  // namespace

Seed HashSeed(std::string_view domain, std::uint64_t value) {
  EnsureSodium();
  Seed out{};
  std::uint8_t le[8];
  for (int i = 0; i < 8; ++i) le[i] = static_cast<std::uint8_t>(value >> (8 * i));
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, out.size());
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(domain.data()),
                            domain.size());
  crypto_generichash_update(&st, le, sizeof le);
  crypto_generichash_final(&st, out.data(), out.size());
  return out;
}

Prng::Prng(const Seed& seed) : seed_(seed) { EnsureSodium(); }

Prng Prng::FromU64(std::uint64_t seed, std::string_view domain) {
  return Prng(HashSeed(domain, seed));
}

Seed Prng::DeriveSeed(std::string_view label) const {
  Seed out{};
  crypto_generichash_state st;
  crypto_generichash_init(&st, seed_.data(), seed_.size(), out.size());
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(label.data()),
                            label.size());
  crypto_generichash_final(&st, out.data(), out.size());
  return out;
}

Prng Prng::Derive(std::string_view label) const { return Prng(DeriveSeed(label)); }

void Prng::Refill() {
  std::uint8_t nonce[crypto_stream_chacha20_ietf_NONCEBYTES] = {};
  for (int i = 0; i < 8; ++i) nonce[i] = static_cast<std::uint8_t>(block_ >> (8 * i));
  ++block_;
  crypto_stream_chacha20_ietf(buffer_.data(), buffer_.size(), nonce, seed_.data());
  pos_ = 0;
}

void Prng::Fill(std::uint8_t* out, std::size_t len) {
  while (len > 0) {
    if (pos_ == buffer_.size()) Refill();
    const std::size_t take = std::min(len, buffer_.size() - pos_);
    std::memcpy(out, buffer_.data() + pos_, take);
    pos_ += take;
    out += take;
    len -= take;
  }
}

std::uint64_t Prng::NextU64() {
  std::uint8_t b[8];
  Fill(b, 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t Prng::UniformBelow(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::kInvalidInput, "empty range");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t v;
  do {
    v = NextU64();
  } while (v >= limit);
  return v % bound;
}

double Prng::UniformDouble() {
  return (static_cast<double>(NextU64() >> 11) + 0.5) * 0x1.0p-53;
}

double Prng::Normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(UniformDouble()));
  const double t = 2.0 * std::numbers::pi * UniformDouble();
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

std::vector<std::int64_t> SampleTernary(std::size_t n, Prng& prng) {
  std::vector<std::int64_t> out(n);
  for (auto& v : out) v = static_cast<std::int64_t>(prng.UniformBelow(3)) - 1;
  return out;
}

std::vector<std::int64_t> SampleGaussian(std::size_t n, double stddev, Prng& prng) {
  std::vector<std::int64_t> out(n);
  const double bound = 6.0 * stddev;
  for (auto& v : out) {
    double x;
    do {
      x = prng.Normal() * stddev;
    } while (std::abs(x) > bound);
    v = std::llround(x);
  }
  return out;
}

std::vector<std::int64_t> SampleSmudging(std::size_t n, int bits, Prng& prng) {
  if (bits < 0 || bits > 60) throw Error(ErrorCode::kInvalidInput, "smudging bits out of range");
  const double bound = std::ldexp(1.0, bits);
  const double stddev = bound / 6.0;
  std::vector<std::int64_t> out(n);
  for (auto& v : out) {
    double x;
    do {
      x = std::round(prng.Normal() * stddev);
    } while (std::abs(x) > bound);
    v = static_cast<std::int64_t>(x);
  }
  return out;
}

RnsPoly SampleUniform(const Context& ctx, std::size_t num_q, bool special, Prng& prng) {
  RnsPoly p(ctx.n(), num_q, special, true);
  for (std::size_t c = 0; c < p.components(); ++c) {
    const u64 q = ctx.modulus(p.ContextIndex(ctx, c)).value();
    for (auto& v : p[c]) v = prng.UniformBelow(q);
  }
  return p;
}

}  // namespace pcol::ckks
