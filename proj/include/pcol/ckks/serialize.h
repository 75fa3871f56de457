#ifndef PCOL_CKKS_SERIALIZE_H_
#define PCOL_CKKS_SERIALIZE_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcol/ckks/ciphertext.h"
#include "pcol/ckks/keys.h"
#include "pcol/ckks/params.h"

namespace pcol::ckks {

// Little-endian framing shared by every serialized object:
// "PCOL" | u16 version | u8 type tag | u64 payload length | payload.
inline constexpr std::uint16_t kFormatVersion = 1;

enum class TypeTag : std::uint8_t {
  kParams = 1,
  kPlaintext = 2,
  kCiphertext = 3,
  kPublicKey = 4,
  kKeySwitchKey = 5,
  kRotationKeys = 6,
  kSecretKey = 7,
};

using Bytes = std::vector<std::uint8_t>;

class ByteWriter {
 public:
  void U8(std::uint8_t v) { buf_.push_back(v); }
  void U16(std::uint16_t v);
  void U32(std::uint32_t v);
  void U64(std::uint64_t v);
  void I64(std::int64_t v) { U64(static_cast<std::uint64_t>(v)); }
  void F64(double v);
  void Raw(std::span<const std::uint8_t> bytes);
  void Str(std::string_view s);
  void Poly(const RnsPoly& p);

  Bytes& bytes() { return buf_; }
  Bytes Take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

// Every read failure throws Error(kSerialization).
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t U8();
  std::uint16_t U16();
  std::uint32_t U32();
  std::uint64_t U64();
  std::int64_t I64() { return static_cast<std::int64_t>(U64()); }
  double F64();
  std::span<const std::uint8_t> Raw(std::size_t len);
  std::string Str();
  // Validates shape and residues against the context.
  RnsPoly Poly(const Context& ctx);

  bool done() const { return pos_ == data_.size(); }
  void ExpectDone() const;

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

// Wraps a payload in the common header.
Bytes Frame(TypeTag tag, const Bytes& payload);
// Checks the header and returns the payload view.
std::span<const std::uint8_t> Unframe(TypeTag tag, std::span<const std::uint8_t> data);

Bytes Serialize(const Params& params);
Params DeserializeParams(std::span<const std::uint8_t> data);
// Hex BLAKE2b-256 of the serialized parameters.
std::string ParamsHash(const Params& params);

Bytes Serialize(const Plaintext& pt);
Plaintext DeserializePlaintext(const Context& ctx, std::span<const std::uint8_t> data);
Bytes Serialize(const Ciphertext& ct);
Ciphertext DeserializeCiphertext(const Context& ctx, std::span<const std::uint8_t> data);
Bytes Serialize(const PublicKey& pk);
PublicKey DeserializePublicKey(const Context& ctx, std::span<const std::uint8_t> data);
Bytes Serialize(const KeySwitchKey& key);
KeySwitchKey DeserializeKeySwitchKey(const Context& ctx, std::span<const std::uint8_t> data);
Bytes Serialize(const RotationKeys& keys);
RotationKeys DeserializeRotationKeys(const Context& ctx, std::span<const std::uint8_t> data);

// The only way secret material leaves memory.
Bytes ExportSecretKey(const SecretKey& sk);
SecretKey ImportSecretKey(const Context& ctx, std::span<const std::uint8_t> data);

void WriteFile(const std::string& path, const Bytes& bytes);
Bytes ReadFile(const std::string& path);

}  // namespace pcol::ckks

#endif  // PCOL_CKKS_SERIALIZE_H_
