#include "pcol/ckks/encoder.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "pcol/errors.h"

namespace pcol::ckks {
namespace {

void BitReverseInPlace(std::vector<std::complex<double>>& v) {
  const std::size_t size = v.size();
  for (std::size_t i = 1, j = 0; i < size; ++i) {
    std::size_t bit = size >> 1;
    for (; j >= bit; bit >>= 1) j -= bit;
    j += bit;
    if (i < j) std::swap(v[i], v[j]);
  }
}

}  // namespace

Encoder::Encoder(ContextPtr ctx) : ctx_(std::move(ctx)) {
  const std::size_t n = ctx_->n();
  const std::size_t m = 2 * n;
  rot_group_.resize(n / 2);
  std::size_t five = 1;
  for (std::size_t j = 0; j < n / 2; ++j) {
    rot_group_[j] = five;
    five = five * 5 % m;
  }
  ksi_pows_.resize(m + 1);
  for (std::size_t k = 0; k < m; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / m;
    ksi_pows_[k] = {std::cos(angle), std::sin(angle)};
  }
  ksi_pows_[m] = ksi_pows_[0];
}

void Encoder::FftSpecial(std::vector<std::complex<double>>& vals) const {
  const std::size_t size = vals.size();
  const std::size_t m = 2 * ctx_->n();
  BitReverseInPlace(vals);
  for (std::size_t len = 2; len <= size; len <<= 1) {
    const std::size_t lenh = len >> 1;
    const std::size_t lenq = len << 2;
    const std::size_t gap = m / lenq;
    for (std::size_t i = 0; i < size; i += len) {
      for (std::size_t j = 0; j < lenh; ++j) {
        const std::size_t idx = (rot_group_[j] % lenq) * gap;
        const std::complex<double> u = vals[i + j];
        const std::complex<double> v = vals[i + j + lenh] * ksi_pows_[idx];
        vals[i + j] = u + v;
        vals[i + j + lenh] = u - v;
      }
    }
  }
}

void Encoder::FftSpecialInv(std::vector<std::complex<double>>& vals) const {
  const std::size_t size = vals.size();
  const std::size_t m = 2 * ctx_->n();
  for (std::size_t len = size; len >= 2; len >>= 1) {
    const std::size_t lenh = len >> 1;
    const std::size_t lenq = len << 2;
    const std::size_t gap = m / lenq;
    for (std::size_t i = 0; i < size; i += len) {
      for (std::size_t j = 0; j < lenh; ++j) {
        const std::size_t idx = (lenq - (rot_group_[j] % lenq)) * gap;
        const std::complex<double> u = vals[i + j] + vals[i + j + lenh];
        const std::complex<double> v = (vals[i + j] - vals[i + j + lenh]) * ksi_pows_[idx];
        vals[i + j] = u;
        vals[i + j + lenh] = v;
      }
    }
  }
  BitReverseInPlace(vals);
  const double inv = 1.0 / static_cast<double>(size);
  for (auto& v : vals) v *= inv;
}

Plaintext Encoder::Encode(std::span<const double> values, int level, double scale) const {
  std::vector<std::complex<double>> c(values.begin(), values.end());
  return Encode(std::span<const std::complex<double>>(c), level, scale);
}

Plaintext Encoder::Encode(std::span<const std::complex<double>> values, int level,
                          double scale) const {
  const std::size_t n = ctx_->n();
  const std::size_t slots = n / 2;
  if (values.size() > slots) {
    throw Error(ErrorCode::kInvalidInput, "more values than slots");
  }
  if (level < 0 || level > ctx_->max_level()) {
    throw Error(ErrorCode::kLevelMismatch, "encoding level outside the chain");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kInvalidInput, "scale must be positive and finite");
  }
  std::vector<std::complex<double>> vals(slots);
  double bound = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag())) {
      throw Error(ErrorCode::kInvalidInput, "non-finite slot value");
    }
    vals[i] = values[i];
    bound = std::max(bound, std::abs(values[i]));
  }
  FftSpecialInv(vals);

  std::vector<__int128> coeffs(n);
  long double max_abs = 0.0L;
  const long double s = scale;
  for (std::size_t i = 0; i < slots; ++i) {
    const long double re = std::round(static_cast<long double>(vals[i].real()) * s);
    const long double im = std::round(static_cast<long double>(vals[i].imag()) * s);
    max_abs = std::max({max_abs, std::abs(re), std::abs(im)});
    if (max_abs >= 0x1p125L) break;
    coeffs[i] = static_cast<__int128>(re);
    coeffs[i + slots] = static_cast<__int128>(im);
  }
  if (max_abs >= 0x1p125L || std::log2(max_abs + 1.0L) >= ctx_->log2_modulus(level) - 2) {
    throw Error(ErrorCode::kOverflow, "scaled values exceed the modulus headroom");
  }

  Plaintext pt;
  pt.level = level;
  pt.scale = scale;
  pt.value_bound = bound;
  pt.poly = RnsPoly(n, static_cast<std::size_t>(level) + 1, false, false);
  for (std::size_t c = 0; c < pt.poly.components(); ++c) {
    const Modulus& q = ctx_->modulus(c);
    auto dst = pt.poly[c];
    for (std::size_t i = 0; i < n; ++i) dst[i] = q.ReduceSigned(coeffs[i]);
  }
  ToNtt(*ctx_, pt.poly);
  return pt;
}

Plaintext Encoder::EncodeConstant(double value, int level, double scale) const {
  if (level < 0 || level > ctx_->max_level()) {
    throw Error(ErrorCode::kLevelMismatch, "encoding level outside the chain");
  }
  const long double k = std::round(static_cast<long double>(value) * scale);
  if (!std::isfinite(static_cast<double>(k)) || std::abs(k) >= 0x1p125L ||
      std::log2(std::abs(k) + 1.0L) >= ctx_->log2_modulus(level) - 2) {
    throw Error(ErrorCode::kOverflow, "scaled constant exceeds the modulus headroom");
  }
  Plaintext pt;
  pt.level = level;
  pt.scale = scale;
  pt.value_bound = std::abs(value);
  pt.poly = RnsPoly(ctx_->n(), static_cast<std::size_t>(level) + 1, false, true);
  AddConstantInPlace(*ctx_, pt.poly, static_cast<__int128>(k));
  return pt;
}

std::vector<std::complex<double>> Encoder::SlotsFromCoefficients(
    const std::vector<long double>& coeffs, double scale) const {
  const std::size_t slots = ctx_->slots();
  std::vector<std::complex<double>> vals(slots);
  const long double inv = 1.0L / scale;
  for (std::size_t i = 0; i < slots; ++i) {
    vals[i] = {static_cast<double>(coeffs[i] * inv),
               static_cast<double>(coeffs[i + slots] * inv)};
  }
  FftSpecial(vals);
  return vals;
}

std::vector<std::complex<double>> Encoder::DecodeComplex(const Plaintext& pt) const {
  RnsPoly p = pt.poly;
  FromNtt(*ctx_, p);
  return SlotsFromCoefficients(CenteredLift(*ctx_, p), pt.scale);
}

std::vector<double> Encoder::Decode(const Plaintext& pt) const {
  const auto c = DecodeComplex(pt);
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

}  // namespace pcol::ckks
