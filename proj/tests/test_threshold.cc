#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "ckks_fixture.h"
#include "pcol/threshold.h"

namespace pcol::threshold {
namespace {

using testutil::MaxAbsDiff;
using testutil::RandomVector;

ContextPtr Toy() {
  static const ContextPtr ctx = ckks::Context::Create(ckks::GenParams("toy"));
  return ctx;
}

double MaxAbs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

TEST(SecretShare, TernaryAndDeterministic) {
  const SecretKey a = GenSecretShare(Toy(), 9);
  EXPECT_EQ(a.coeffs, GenSecretShare(Toy(), 9).coeffs);
  EXPECT_NE(a.coeffs, GenSecretShare(Toy(), 10).coeffs);
  for (auto c : a.coeffs) EXPECT_TRUE(c >= -1 && c <= 1);
}

TEST(ProtocolMessage, WireRoundTrip) {
  ProtocolMessage msg{MakeSessionId(4), 3, RoundTag::kRotKeyShare, {1, 2, 3}};
  const Bytes bytes = msg.Serialize();
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 7), "PCOLMSG");
  const ProtocolMessage back = ProtocolMessage::Deserialize(bytes);
  EXPECT_EQ(back.session_id, msg.session_id);
  EXPECT_EQ(back.sender, 3);
  EXPECT_EQ(back.round_tag, RoundTag::kRotKeyShare);
  EXPECT_EQ(back.payload, msg.payload);
  Bytes bad = bytes;
  bad[0] = 'Q';
  EXPECT_PCOL_ERROR(ProtocolMessage::Deserialize(bad), ErrorCode::kSerialization);
  bad = bytes;
  bad[7 + 2 + 16 + 2] = 9;
  EXPECT_PCOL_ERROR(ProtocolMessage::Deserialize(bad), ErrorCode::kSerialization);
  EXPECT_PCOL_ERROR(ProtocolMessage::Deserialize(std::span(bytes).first(bytes.size() - 1)),
                    ErrorCode::kSerialization);
}

class JointKeys : public ::testing::TestWithParam<int> {};

TEST_P(JointKeys, EncryptComputeDecrypt) {
  const int parties = GetParam();
  InProcessDriver driver(Toy(), parties, 100 + parties);
  const long long steps[] = {1};
  driver.GenerateKeys(steps);
  EXPECT_EQ(driver.session().state(), SessionState::kKeysReady);

  testutil::Rng rng(parties);
  const auto x = RandomVector(rng, 16);
  const auto y = RandomVector(rng, 16);
  const ckks::Evaluator eval(Toy());
  const Ciphertext cx = driver.Encrypt(x);
  const Ciphertext cy = driver.Encrypt(y);

  const auto dx = driver.Decrypt(cx);
  EXPECT_LT(MaxAbsDiff(dx, x, 16), 1e-5);
  EXPECT_EQ(driver.session().state(), SessionState::kDone);
  // Same answer as single-party decryption under the summed secret.
  const auto joint = eval.DecryptValues(cx, driver.JointSecretForTesting());
  EXPECT_LT(MaxAbsDiff(dx, joint, 16), 1e-6);

  const auto prod = driver.Decrypt(eval.Mult(cx, cy, driver.session().relin_key()));
  for (int i = 0; i < 16; ++i) EXPECT_NEAR(prod[i], x[i] * y[i], 1e-4);

  const auto rot = driver.Decrypt(eval.Rotate(cx, 1, driver.session().rotation_keys()));
  for (int i = 0; i < 16; ++i) EXPECT_NEAR(rot[i], x[(i + 1) % 16], 1e-5);
  const auto same = driver.Decrypt(eval.Rotate(cx, 0, driver.session().rotation_keys()));
  EXPECT_LT(MaxAbsDiff(same, x, 16), 1e-5);

  std::size_t partials = 0;
  for (const auto& e : driver.session().transcript()) {
    if (e.round_tag == RoundTag::kPartialDecryption) ++partials;
  }
  EXPECT_EQ(partials, 4u * parties);
}

INSTANTIATE_TEST_SUITE_P(Parties, JointKeys, ::testing::Values(2, 3, 5));

TEST(Threshold, StrictSubsetCannotDecrypt) {
  InProcessDriver driver(Toy(), 3, 7);
  driver.GenerateKeys();
  ckks::Prng prng = ckks::Prng::FromU64(1, "subset");
  int garbage = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Ciphertext ct = driver.Encrypt(std::vector<double>{0.5, -0.25});
    std::vector<RnsPoly> partials;
    for (int p = 0; p < 2; ++p) {
      partials.push_back(PartialDecrypt(*Toy(), ct, driver.parties()[(trial + p) % 3].share(),
                                        kDefaultSmudgingBits, prng));
    }
    const ckks::Encoder encoder(Toy());
    if (MaxAbs(encoder.Decode(CombinePartialsUnchecked(*Toy(), ct, partials))) > 1e3) ++garbage;
  }
  EXPECT_GE(garbage, 99);
}

TEST(Threshold, WithheldPublicKeyShare) {
  InProcessDriver driver(Toy(), 2, 8);
  driver.faults().offline.insert(1);
  EXPECT_PCOL_ERROR(driver.GenerateKeys(), ErrorCode::kMissingParty);
  EXPECT_EQ(driver.session().state(), SessionState::kFailed);
  EXPECT_PCOL_ERROR(driver.session().public_key(), ErrorCode::kProtocolOrder);
  EXPECT_PCOL_ERROR(driver.session().FinishPublicKey(), ErrorCode::kProtocolOrder);
}

TEST(Threshold, WithheldPartialOrRefresh) {
  for (bool refresh : {false, true}) {
    InProcessDriver driver(Toy(), 3, 9);
    driver.GenerateKeys();
    const Ciphertext ct = driver.Encrypt(std::vector<double>{1.0});
    driver.faults().offline.insert(2);
    if (refresh) {
      EXPECT_PCOL_ERROR(driver.Refresh(ct), ErrorCode::kMissingParty);
    } else {
      EXPECT_PCOL_ERROR(driver.Decrypt(ct), ErrorCode::kMissingParty);
    }
    EXPECT_EQ(driver.session().state(), SessionState::kFailed);
  }
}

TEST(Threshold, WithheldRotationShare) {
  InProcessDriver driver(Toy(), 2, 10);
  driver.GenerateKeys();
  driver.faults().offline.insert(0);
  EXPECT_PCOL_ERROR(driver.GenerateRotationKey(2), ErrorCode::kMissingParty);
}

TEST(Threshold, DuplicateMessageRejected) {
  InProcessDriver driver(Toy(), 2, 11);
  driver.faults().duplicate_first = true;
  EXPECT_PCOL_ERROR(driver.GenerateKeys(), ErrorCode::kProtocolOrder);
  EXPECT_EQ(driver.session().state(), SessionState::kFailed);
}

TEST(Threshold, RoundOrderEnforced) {
  InProcessDriver driver(Toy(), 2, 12);
  Session& s = driver.session();
  // Round 2 before round 1.
  EXPECT_PCOL_ERROR(s.FinishRelinKey(), ErrorCode::kProtocolOrder);

  InProcessDriver d2(Toy(), 2, 12);
  Session& s2 = d2.session();
  s2.Submit(d2.parties()[0].PubKeyShare(s2.id(), s2.crs()));
  s2.Submit(d2.parties()[1].PubKeyShare(s2.id(), s2.crs()));
  EXPECT_PCOL_ERROR(s2.Submit(d2.parties()[0].RelinRound1(s2.id(), s2.crs())),
                    ErrorCode::kProtocolOrder);

  InProcessDriver d3(Toy(), 2, 12);
  EXPECT_PCOL_ERROR(d3.Decrypt(Ciphertext{}), ErrorCode::kProtocolOrder);
}

TEST(Threshold, ForeignOrMalformedMessages) {
  InProcessDriver driver(Toy(), 2, 13);
  Session& s = driver.session();
  ProtocolMessage msg = driver.parties()[0].PubKeyShare(s.id(), s.crs());
  ProtocolMessage foreign = msg;
  foreign.session_id = MakeSessionId(999);
  EXPECT_PCOL_ERROR(s.Submit(foreign), ErrorCode::kBadShare);

  InProcessDriver d2(Toy(), 2, 13);
  msg.payload.resize(msg.payload.size() / 2);
  EXPECT_PCOL_ERROR(d2.session().Submit(msg), ErrorCode::kBadShare);

  InProcessDriver d3(Toy(), 2, 13);
  ProtocolMessage stranger = d3.parties()[0].PubKeyShare(d3.session().id(), d3.session().crs());
  stranger.sender = 7;
  EXPECT_PCOL_ERROR(d3.session().Submit(stranger), ErrorCode::kBadShare);
}

TEST(Threshold, SmudgingBeyondHeadroom) {
  InProcessDriver driver(Toy(), 2, 14);
  driver.GenerateKeys();
  const ckks::Evaluator eval(Toy());
  const Ciphertext low = eval.DropToLevel(driver.Encrypt(std::vector<double>{0.5}), 0);
  EXPECT_PCOL_ERROR(driver.Decrypt(low, 60), ErrorCode::kNoiseOverflow);
}

TEST(Threshold, CollectiveRefresh) {
  InProcessDriver driver(Toy(), 2, 15);
  driver.GenerateKeys();
  const ckks::Evaluator eval(Toy());
  testutil::Rng rng(4);
  auto v = RandomVector(rng, 16, 0.5, 1.0);
  Ciphertext ct = driver.Encrypt(v);
  auto expected = v;
  while (ct.level > 1) {
    ct = eval.Square(ct, driver.session().relin_key());
    for (auto& e : expected) e *= e;
  }
  const Ciphertext fresh = driver.Refresh(ct);
  EXPECT_EQ(fresh.level, Toy()->max_level());
  EXPECT_NEAR(fresh.scale / Toy()->params().scale, 1.0, 0x1p-10);
  EXPECT_EQ(driver.session().refresh_count(), 1u);
  EXPECT_LT(MaxAbsDiff(driver.Decrypt(fresh), expected, 16), 1e-4);

  // The refreshed ciphertext supports a full new round of products.
  Ciphertext again = fresh;
  for (int i = 0; i < 3; ++i) {
    again = eval.Square(again, driver.session().relin_key());
    for (auto& e : expected) e *= e;
  }
  EXPECT_LT(MaxAbsDiff(driver.Decrypt(again), expected, 16), 1e-4);

  const Ciphertext top = driver.Encrypt(v);
  EXPECT_LT(MaxAbsDiff(driver.Decrypt(driver.Refresh(top)), v, 16), 1e-5);
  EXPECT_EQ(driver.session().refresh_count(), 2u);
  EXPECT_PCOL_ERROR(driver.Refresh(eval.DropToLevel(top, 0)), ErrorCode::kOutOfLevels);
}

TEST(Threshold, SessionsAreIndependent) {
  InProcessDriver a(Toy(), 2, 21);
  InProcessDriver b(Toy(), 2, 22);
  a.GenerateKeys();
  b.GenerateKeys();
  const ckks::Evaluator eval(Toy());
  const Ciphertext ct = a.Encrypt(std::vector<double>{0.3, 0.6});
  EXPECT_GT(MaxAbs(eval.DecryptValues(ct, b.JointSecretForTesting())), 1e3);
  EXPECT_NEAR(a.Decrypt(ct)[1], 0.6, 1e-5);
}

// Random drops, duplicates and cross-round replays of public-key round
// messages never yield a key: the session either completes with every share
// or stops with a typed error.
TEST(ThresholdProperty, TranscriptFuzzing) {
  testutil::Rng rng(77);
  int completed = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t parties = 2 + rng.Int(0, 2);
    InProcessDriver driver(Toy(), parties, 500 + trial);
    Session& s = driver.session();
    std::vector<ProtocolMessage> wire;
    for (Party& p : driver.parties()) wire.push_back(p.PubKeyShare(s.id(), s.crs()));
    const int fault = static_cast<int>(rng.Int(0, 3));
    if (fault == 0) wire.erase(wire.begin() + rng.Int(0, parties - 1));
    if (fault == 1) wire.push_back(wire[rng.Int(0, parties - 1)]);
    if (fault == 2) wire.push_back(driver.parties()[0].RelinRound1(s.id(), s.crs()));
    std::shuffle(wire.begin(), wire.end(), rng.engine());
    try {
      for (const auto& m : wire) s.Submit(m);
      s.FinishPublicKey();
      ASSERT_EQ(fault, 3);
      ++completed;
    } catch (const Error& e) {
      ASSERT_NE(fault, 3);
      EXPECT_TRUE(e.code() == ErrorCode::kMissingParty || e.code() == ErrorCode::kProtocolOrder)
          << e.what();
      EXPECT_EQ(s.state(), SessionState::kFailed);
    }
  }
  EXPECT_GT(completed, 0);
}

}  // namespace
}  // namespace pcol::threshold

namespace pcol::threshold {
namespace {

TEST(ThresholdDesk, DecryptAndRefreshAfterTenProducts) {
  const ContextPtr ctx = ckks::Context::Create(ckks::GenParams("desk"));
  InProcessDriver driver(ctx, 2, 31);
  driver.GenerateKeys();
  const ckks::Evaluator eval(ctx);
  testutil::Rng rng(5);
  const auto v = testutil::RandomVector(rng, ctx->slots(), -1.0, 1.0);
  Ciphertext ct = driver.Encrypt(v);
  EXPECT_LT(testutil::MaxAbsDiff(driver.Decrypt(ct), v, v.size()), 1e-4);
  // x * 1.0 ten times keeps the values comparable while consuming depth.
  auto expected = v;
  const Ciphertext one = driver.Encrypt(std::vector<double>(ctx->slots(), 1.0));
  for (int i = 0; i < 10; ++i) {
    ct = eval.Mult(ct, eval.DropToLevel(one, ct.level), driver.session().relin_key());
  }
  const Ciphertext fresh = driver.Refresh(ct);
  EXPECT_EQ(fresh.level, ctx->max_level());
  EXPECT_NEAR(fresh.scale / ctx->params().scale, 1.0, 0x1p-10);
  EXPECT_LT(testutil::MaxAbsDiff(driver.Decrypt(fresh), expected, v.size()), 1e-4);
}

}  // namespace
}  // namespace pcol::threshold
