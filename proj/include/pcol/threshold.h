#ifndef PCOL_THRESHOLD_H_
#define PCOL_THRESHOLD_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcol/ckks/ciphertext.h"
#include "pcol/ckks/evaluator.h"
#include "pcol/ckks/keys.h"
#include "pcol/ckks/sampling.h"
#include "pcol/ckks/serialize.h"
#include "pcol/errors.h"

namespace pcol::threshold {

using ckks::Bytes;
using ckks::Ciphertext;
using ckks::ContextPtr;
using ckks::KeySwitchKey;
using ckks::PublicKey;
using ckks::RnsPoly;
using ckks::SecretKey;
using ckks::Seed;

using PartyId = std::uint16_t;
using SessionId = std::array<std::uint8_t, 16>;

inline constexpr int kDefaultSmudgingBits = 20;

SessionId MakeSessionId(std::uint64_t seed);

// Shared randomness for the uniform halves of collective keys.
struct CommonReference {
  Seed seed{};

  static CommonReference FromU64(std::uint64_t seed);
  ckks::Prng Stream(std::string_view label) const;

  RnsPoly PublicKeyA(const ckks::Context& ctx) const;
  // One uniform polynomial per key-switching digit, over Q_L P.
  std::vector<RnsPoly> KeySwitchA(const ckks::Context& ctx, std::string_view label) const;
  // Uniform polynomial at max_level for the refresh with the given nonce.
  RnsPoly RefreshA(const ckks::Context& ctx, std::uint64_t nonce) const;
};

enum class RoundTag : std::uint8_t {
  kPubKeyShare = 1,
  kRelinShareRound1 = 2,
  kRelinShareRound2 = 3,
  kRotKeyShare = 4,
  kPartialDecryption = 5,
  kRefreshShare = 6,
};

const char* RoundTagName(RoundTag tag);

// Wire format: "PCOLMSG" | u16 version | 16-byte session id | u16 sender |
// u8 round tag | u64 payload length | payload.
struct ProtocolMessage {
  SessionId session_id{};
  PartyId sender = 0;
  RoundTag round_tag = RoundTag::kPubKeyShare;
  Bytes payload;

  Bytes Serialize() const;
  static ProtocolMessage Deserialize(std::span<const std::uint8_t> data);
};

// Everything a party needs to contribute to one refresh.
struct RefreshRequest {
  Ciphertext input;          // already multiplied by 2^gain_bits
  std::uint64_t nonce = 0;   // selects the common polynomial
  std::uint64_t alpha = 0;   // output scale / input scale, times 2^62
  int mask_bits = 0;
  int smudging_bits = kDefaultSmudgingBits;
};

// Additive ternary share of the joint secret.
SecretKey GenSecretShare(const ContextPtr& ctx, std::uint64_t seed);
// The joint secret sum of all shares; used only to cross-check protocols.
SecretKey JointSecret(const ckks::Context& ctx, std::span<const SecretKey> shares);

// d_i = c1 s_i + e with |e| <= 2^smudging_bits, in NTT form at ct's level.
RnsPoly PartialDecrypt(const ckks::Context& ctx, const Ciphertext& ct, const SecretKey& share,
                       int smudging_bits, ckks::Prng& prng);
// c0 + sum of partials; the caller is responsible for completeness.
ckks::Plaintext CombinePartialsUnchecked(const ckks::Context& ctx, const Ciphertext& ct,
                                         std::span<const RnsPoly> partials);

// One operator. Holds its secret share and the ephemeral state of the
// two-round relinearization protocol.
class Party {
 public:
  Party(ContextPtr ctx, PartyId id, std::uint64_t seed);

  PartyId id() const { return id_; }
  const SecretKey& share() const { return share_; }

  ProtocolMessage PubKeyShare(const SessionId& sid, const CommonReference& crs);
  ProtocolMessage RelinRound1(const SessionId& sid, const CommonReference& crs);
  // `aggregate` is the sum of all round-1 shares as published by the session.
  ProtocolMessage RelinRound2(const SessionId& sid, const KeySwitchKey& aggregate);
  ProtocolMessage RotKeyShare(const SessionId& sid, const CommonReference& crs,
                              std::size_t step);
  ProtocolMessage PartialDecryption(const SessionId& sid, const Ciphertext& ct,
                                    int smudging_bits);
  ProtocolMessage RefreshShare(const SessionId& sid, const CommonReference& crs,
                               const RefreshRequest& request);

 private:
  ckks::Prng NextStream(std::string_view label);

  ContextPtr ctx_;
  PartyId id_;
  ckks::Prng root_;
  SecretKey share_;
  std::optional<RnsPoly> relin_u_;
  std::uint64_t counter_ = 0;
};

enum class SessionState { kAwaitingKeyShares, kKeysReady, kAwaitingPartials, kDone, kFailed };

const char* SessionStateName(SessionState state);

struct TranscriptEntry {
  PartyId sender = 0;
  RoundTag round_tag = RoundTag::kPubKeyShare;
  std::size_t payload_bytes = 0;
};

// Aggregator for one pairwise (or P-party) session. Accepts messages in any
// order within a round, rejects anything else, and fails atomically when a
// round is finalized without every party's contribution.
class Session {
 public:
  Session(ContextPtr ctx, SessionId id, std::size_t parties, CommonReference crs);

  const SessionId& id() const { return id_; }
  const CommonReference& crs() const { return crs_; }
  std::size_t parties() const { return parties_; }
  SessionState state() const { return state_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
  std::size_t refresh_count() const { return refresh_count_; }
  // Tag of the round currently being collected, if any.
  std::optional<RoundTag> expected() const { return expected_; }

  // Validates and records a message. Throws BadShare for foreign or
  // unparsable messages and ProtocolOrder for duplicates or wrong rounds;
  // either failure moves the session to Failed.
  void Submit(const ProtocolMessage& msg);

  // Key generation, in order. Each Finish* throws MissingParty (and fails the
  // session) unless every party has contributed to the round.
  PublicKey FinishPublicKey();
  KeySwitchKey FinishRelinRound1();
  KeySwitchKey FinishRelinKey();
  void BeginRotation(std::size_t step);
  KeySwitchKey FinishRotationKey();

  const PublicKey& public_key() const;
  const KeySwitchKey& relin_key() const;
  const ckks::RotationKeys& rotation_keys() const { return rotation_keys_; }

  // Decryption. Begin returns the ciphertext every party must partially
  // decrypt (the input with its scale boosted to shrink smudging error).
  const Ciphertext& BeginDecryption(const Ciphertext& ct);
  ckks::Plaintext FinishDecryption();

  // Collaborative refresh to max_level. Input level must be >= 1.
  const RefreshRequest& BeginRefresh(const Ciphertext& ct, int smudging_bits = kDefaultSmudgingBits);
  Ciphertext FinishRefresh();

 private:
  struct Contribution {
    std::uint64_t aux = 0;
    std::vector<RnsPoly> polys;
  };

  [[noreturn]] void Fail(ErrorCode code, const std::string& message);
  void RequireUsable() const;
  void RequireIdle();
  void Expect(RoundTag tag);
  // Moves the complete current round out, or fails with MissingParty.
  std::vector<Contribution> TakeRound(RoundTag tag);
  Contribution Parse(const ProtocolMessage& msg) const;

  ContextPtr ctx_;
  ckks::Evaluator eval_;
  SessionId id_;
  std::size_t parties_;
  CommonReference crs_;
  SessionState state_ = SessionState::kAwaitingKeyShares;
  std::optional<RoundTag> expected_ = RoundTag::kPubKeyShare;
  std::map<PartyId, Contribution> round_;
  std::vector<TranscriptEntry> transcript_;

  std::optional<PublicKey> public_key_;
  std::optional<KeySwitchKey> relin_round1_;
  std::optional<KeySwitchKey> relin_key_;
  std::optional<std::size_t> pending_step_;
  ckks::RotationKeys rotation_keys_;
  std::optional<Ciphertext> pending_ct_;
  std::optional<RefreshRequest> pending_refresh_;
  std::size_t refresh_count_ = 0;
};

// Fault injection for the in-process driver.
struct Faults {
  std::set<PartyId> offline;  // never send anything
  bool duplicate_first = false;  // resend the first message of every round
};

// Runs all parties and the session inside one process. Every message goes
// through the wire format, and delivery order within a round is shuffled by
// a deterministic scheduler.
class InProcessDriver {
 public:
  InProcessDriver(ContextPtr ctx, std::size_t parties, std::uint64_t seed);

  Session& session() { return session_; }
  const Session& session() const { return session_; }
  std::vector<Party>& parties() { return parties_; }
  Faults& faults() { return faults_; }
  const ContextPtr& context() const { return ctx_; }

  // Public key, relinearization key and the given rotation keys.
  void GenerateKeys(std::span<const long long> rotation_steps = {});
  void GenerateRotationKey(long long step);

  Ciphertext Encrypt(std::span<const double> values);
  ckks::Plaintext DecryptPlaintext(const Ciphertext& ct,
                                   int smudging_bits = kDefaultSmudgingBits);
  std::vector<double> Decrypt(const Ciphertext& ct, int smudging_bits = kDefaultSmudgingBits);
  Ciphertext Refresh(const Ciphertext& ct, int smudging_bits = kDefaultSmudgingBits);

  SecretKey JointSecretForTesting() const;

 private:
  template <typename MakeMessage>
  void RunRound(MakeMessage&& make);

  ContextPtr ctx_;
  ckks::Evaluator eval_;
  Session session_;
  std::vector<Party> parties_;
  Faults faults_;
  std::mt19937_64 scheduler_;
  ckks::Prng encrypt_prng_;
};

}  // namespace pcol::threshold

#endif  // PCOL_THRESHOLD_H_
