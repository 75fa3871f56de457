#include <cmath>
#include <filesystem>
#include <numbers>

#include <gtest/gtest.h>

#include "ckks_fixture.h"
#include "pcol/he_pipeline.h"

namespace pcol::he {
namespace {

using testutil::CkksSetup;
using testutil::Rng;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

EncounterGeometry Geometry(double r, double sx, double sz) {
  EncounterGeometry g;
  g.combined_radius = r;
  g.sigma_x = sx;
  g.sigma_z = sz;
  return g;
}

QuadratureSpec Spec(const char* rule, double h) { return {Rule::Parse(rule), h, h}; }

double RelErr(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::vector<long long> AllSumSteps(const ckks::ContextPtr& ctx) {
  std::vector<long long> steps;
  for (std::size_t s : ckks::SumSlotsSteps(ctx->slots())) steps.push_back(static_cast<long long>(s));
  return steps;
}

// Two-party threshold session on a small ring deep enough for one full
// cos stage (the toy preset has only six levels).
ckks::ContextPtr SmallDeep() {
  ckks::ParamsSpec spec;
  spec.ring_degree = 64;
  spec.max_level = 10;
  spec.label = "small-deep";
  static const ckks::ContextPtr ctx = ckks::Context::Create(ckks::GenParams(spec));
  return ctx;
}

struct ToySession {
  ToySession() : ctx(SmallDeep()), driver(ctx, 2, 21) {
    driver.GenerateKeys(AllSumSteps(ctx));
  }
  ckks::ContextPtr ctx;
  threshold::InProcessDriver driver;
};

// Shared desk session; key generation dominates the cost so it runs once.
struct DeskSession {
  DeskSession() : ctx(ckks::Context::Create(ckks::GenParams("desk"))), driver(ctx, 2, 7) {
    driver.GenerateKeys(AllSumSteps(ctx));
  }
  static DeskSession& Get() {
    static DeskSession s;
    return s;
  }
  ckks::ContextPtr ctx;
  threshold::InProcessDriver driver;
};

EncryptedGeometry SharedGeometry(Engine& engine, double sx, double sz, std::size_t parties,
                                 double radius, std::uint64_t seed = 5) {
  std::vector<GeometryShare> shares;
  for (const auto& row : SplitGeometry(sx, sz, parties, seed)) {
    shares.push_back(EncryptGeometryShare(engine, row));
  }
  return CombineEncryptedShares(engine, shares, parties, radius);
}

TEST(ApproxConfig, Validates) {
  ApproxConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.n1 = 0;
  EXPECT_PCOL_ERROR(c.Validate(), ErrorCode::kInvalidInput);
  c = {};
  c.refresh_reserve_levels = 0;
  EXPECT_PCOL_ERROR(c.Validate(), ErrorCode::kInvalidInput);
}

TEST(Geometry, SplitSumsToTotal) {
  for (std::size_t parties : {1u, 2u, 3u, 5u}) {
    const auto rows = SplitGeometry(50, 25, parties, 3 + parties);
    const auto total = GeometryValues(50, 25);
    for (int q = 0; q < 3; ++q) {
      double sum = 0.0;
      for (const auto& r : rows) sum += r[q];
      EXPECT_NEAR(sum, total[q], 1e-12 * total[q]);
    }
  }
  EXPECT_PCOL_ERROR(GeometryValues(0, 1), ErrorCode::kInvalidInput);
}

TEST(Geometry, CombineSharesDecryptsToTotal) {
  CkksSetup s("toy", 4);
  Engine engine(s.ctx, s.keys);
  const auto total = GeometryValues(50, 25);
  for (std::size_t parties : {2u, 3u}) {
    std::vector<GeometryShare> shares;
    for (const auto& row : SplitGeometry(50, 25, parties, 40 + parties)) {
      shares.push_back(EncryptGeometryShare(engine, row));
    }
    const EncryptedGeometry g = CombineEncryptedShares(engine, shares, parties, 5.0);
    const Ciphertext* cts[] = {&g.inv_sx2, &g.inv_sz2, &g.inv_sxsz};
    for (int q = 0; q < 3; ++q) {
      for (double v : engine.Decrypt(*cts[q])) EXPECT_LT(RelErr(v, total[q]), 1e-6);
    }
  }
}

TEST(Geometry, ZeroSecondShareIsIdentity) {
  CkksSetup s("toy", 4);
  Engine engine(s.ctx, s.keys);
  const auto total = GeometryValues(40, 30);
  const GeometryShare shares[] = {EncryptGeometryShare(engine, total),
                                  EncryptGeometryShare(engine, {0.0, 0.0, 0.0})};
  const EncryptedGeometry g = CombineEncryptedShares(engine, shares, 2, 5.0);
  EXPECT_LT(RelErr(engine.Decrypt(g.inv_sz2)[3], total[1]), 1e-6);
}

TEST(Geometry, CombineRejectsMissingOrMisleveledShares) {
  CkksSetup s("toy", 4);
  Engine engine(s.ctx, s.keys);
  std::vector<GeometryShare> shares;
  for (const auto& row : SplitGeometry(50, 25, 3, 1)) {
    shares.push_back(EncryptGeometryShare(engine, row));
  }
  EXPECT_PCOL_ERROR(CombineEncryptedShares(engine, std::span(shares).first(2), 3, 5.0),
                    ErrorCode::kMissingParty);
  shares[1].inv_sz2 = engine.DropTo(shares[1].inv_sz2, 2);
  EXPECT_PCOL_ERROR(CombineEncryptedShares(engine, shares, 3, 5.0), ErrorCode::kLevelMismatch);
}

TEST(Taylor, PlaintextSeriesValues) {
  EXPECT_NEAR(TaylorSeries(SeriesKind::kExp, -0.005, 5), std::exp(-0.005), 1e-16);
  EXPECT_NEAR(TaylorSeries(SeriesKind::kExp, 0.3, 20), std::exp(0.3), 1e-15);
  // Independent term-by-term sums at 2 pi.
  auto direct = [](int order) {
    long double sum = 0.0L, term = 1.0L;
    for (int k = 0; k <= order; ++k) {
      if (k > 0) term *= -(kTwoPi * kTwoPi) / ((2.0L * k - 1) * (2.0L * k));
      sum += term;
    }
    return static_cast<double>(sum);
  };
  const double cos10 = TaylorSeries(SeriesKind::kCos, kTwoPi, 10);
  EXPECT_NEAR(cos10, direct(10), 1e-13);
  EXPECT_GT(std::abs(cos10 - 1.0), 1e-4);
  EXPECT_LT(std::abs(cos10 - 1.0), 1e-3);
  const double cos5 = TaylorSeries(SeriesKind::kCos, kTwoPi, 5);
  EXPECT_NEAR(cos5, direct(5), 1e-12);
  EXPECT_GT(std::abs(cos5 - 1.0), 5.0);
  EXPECT_NEAR(TaylorSeries(SeriesKind::kCos, 0.7, 12), std::cos(0.7), 1e-15);
}

TEST(Taylor, LevelBudget) {
  EXPECT_EQ(TaylorLevels(SeriesKind::kExp, 5, EvalStrategy::kPowerBasis, 1.0), 4);
  EXPECT_EQ(TaylorLevels(SeriesKind::kExp, 10, EvalStrategy::kPowerBasis, 1.0), 5);
  EXPECT_EQ(TaylorLevels(SeriesKind::kExp, 10, EvalStrategy::kPowerBasis, 3.0), 6);
  EXPECT_EQ(TaylorLevels(SeriesKind::kExp, 5, EvalStrategy::kHorner, 1.0), 5);
  EXPECT_EQ(TaylorLevels(SeriesKind::kCos, 10, EvalStrategy::kPowerBasis, kTwoPi), 7);
  EXPECT_EQ(TaylorLevels(SeriesKind::kCos, 4, EvalStrategy::kHorner, 1.0), 5);
}

class TaylorEval : public ::testing::TestWithParam<EvalStrategy> {};

TEST_P(TaylorEval, ExpMatchesSeriesAndCounts) {
  CkksSetup s("toy", 6);
  Engine engine(s.ctx, s.keys);
  Rng rng(11);
  const auto x = testutil::RandomVector(rng, s.ctx->slots(), -1.0, 1.0);
  const Ciphertext ct = engine.Encrypt(x);
  engine.counter() = {};
  const Ciphertext out = TaylorSeriesEval(engine, SeriesKind::kExp, ct, 5, GetParam(), 1.0);
  const auto got = engine.Decrypt(out);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(got[i], TaylorSeries(SeriesKind::kExp, x[i], 5), 1e-5);
  }
  const bool power = GetParam() == EvalStrategy::kPowerBasis;
  EXPECT_EQ(engine.counter().multiplications, power ? 9 : 5);
  EXPECT_EQ(engine.counter().additions, 5);
  EXPECT_EQ(out.level, s.ctx->max_level() - TaylorLevels(SeriesKind::kExp, 5, GetParam(), 1.0));
}

TEST_P(TaylorEval, CosWithRangeNormalization) {
  CkksSetup s("toy", 6);
  Engine engine(s.ctx, s.keys);
  Rng rng(12);
  const auto x = testutil::RandomVector(rng, s.ctx->slots(), -2.0, 2.0);
  const Ciphertext out =
      TaylorSeriesEval(engine, SeriesKind::kCos, engine.Encrypt(x), 3, GetParam(), 2.0);
  const auto got = engine.Decrypt(out);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(got[i], TaylorSeries(SeriesKind::kCos, x[i], 3), 1e-5);
  }
}

INSTANTIATE_TEST_SUITE_P(Strategies, TaylorEval,
                         ::testing::Values(EvalStrategy::kPowerBasis, EvalStrategy::kHorner));

TEST(Taylor, SmallExpArgument) {
  CkksSetup s("toy", 6);
  Engine engine(s.ctx, s.keys);
  const std::vector<double> x(s.ctx->slots(), -0.005);
  const Ciphertext out = TaylorSeriesEval(engine, SeriesKind::kExp, engine.Encrypt(x), 5,
                                          EvalStrategy::kPowerBasis, 1.0);
  EXPECT_NEAR(engine.Decrypt(out)[0], 0.99501247919268, 1e-5);
}

TEST(Taylor, OutOfLevelsWithoutRefresh) {
  CkksSetup s("toy", 6);
  Engine engine(s.ctx, s.keys);
  const Ciphertext low = engine.DropTo(engine.Encrypt(std::vector<double>{0.1}), 2);
  EXPECT_PCOL_ERROR(
      TaylorSeriesEval(engine, SeriesKind::kExp, low, 5, EvalStrategy::kPowerBasis, 1.0),
      ErrorCode::kOutOfLevels);
  EXPECT_PCOL_ERROR(engine.Ensure(low, 4, 1), ErrorCode::kOutOfLevels);
}

TEST(Integrand, ExactCosPlaintextModeIsExpLimited) {
  ApproxConfig config;
  for (double phi : {0.0, 1.0, 2.5, kTwoPi}) {
    const double exact = IntegrandP(5.0, phi, 50, 25);
    EXPECT_LT(std::abs(IntegrandTaylor(5.0, phi, 50, 25, config, false) - exact), 1e-12);
  }
}

TEST(Integrand, SinglePartyRunsOutOfLevels) {
  CkksSetup s("toy", 6);
  Engine engine(s.ctx, s.keys);
  const EncryptedGeometry g = SharedGeometry(engine, 50, 25, 2, 5.0);
  const auto y = SlotInput::Encrypted(engine, {0.05});
  const auto phi = SlotInput::Encrypted(engine, {1.0});
  EXPECT_PCOL_ERROR(EvalIntegrandEncrypted(engine, g, y, phi, ApproxConfig{}),
                    ErrorCode::kOutOfLevels);
}

// Property: the encrypted integrand matches its plaintext truncated-series
// composition on random nodes, for every mix of public and encrypted inputs.
TEST(Integrand, MatchesTruncatedSeriesOracle) {
  ToySession toy;
  Engine engine(toy.driver, 3);
  const double sx = 50, sz = 25;
  const EncryptedGeometry g = SharedGeometry(engine, sx, sz, 2, 5.0);
  Rng rng(77);
  const std::size_t slots = toy.ctx->slots();
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<double> y(slots), yu(slots), phi(slots);
    for (std::size_t i = 0; i < slots; ++i) {
      y[i] = rng.Uniform(0.5, 5.0);
      yu[i] = y[i] / kLengthUnit;
      phi[i] = rng.Uniform(0.0, kTwoPi);
    }
    const bool enc_y = trial & 1, enc_phi = trial & 2;
    ApproxConfig config;
    config.n1 = 6;
    config.n2 = 9;
    const SlotInput yin = enc_y ? SlotInput::Encrypted(engine, yu) : SlotInput::Public(yu);
    const SlotInput pin = enc_phi ? SlotInput::Encrypted(engine, phi) : SlotInput::Public(phi);
    const OpCounter before = engine.counter();
    const auto got = engine.Decrypt(EvalIntegrandEncrypted(engine, g, yin, pin, config));
    EXPECT_GE(engine.counter().multiplications, before.multiplications);
    for (std::size_t i = 0; i < slots; ++i) {
      const double want = kLengthUnit * IntegrandTaylor(y[i], phi[i], sx, sz, config, enc_phi);
      EXPECT_LT(RelErr(got[i], want), 1e-4) << "trial " << trial << " slot " << i;
    }
  }
  EXPECT_GE(engine.counter().refreshes, 1);
  EXPECT_EQ(static_cast<std::size_t>(engine.counter().refreshes),
            toy.driver.session().refresh_count());
}

TEST(Online, PackedAndUnpackedAgree) {
  ToySession toy;
  Engine engine(toy.driver, 4);
  const EncryptedGeometry g = SharedGeometry(engine, 50, 25, 2, 5.0);
  const QuadratureSpec spec = Spec("trapezoid", 0.5);
  ApproxConfig config;
  config.n1 = 6;
  config.n2 = 10;
  const double packed = engine.Decrypt(PcolOnline(engine, g, spec, config))[0];
  OnlineOptions unpacked;
  unpacked.batch_slots = 1;
  const double single = engine.Decrypt(PcolOnline(engine, g, spec, config, unpacked))[0];
  const double oracle = PcolTaylor(Geometry(5, 50, 25), spec, config);
  EXPECT_LT(RelErr(packed, single), 1e-4);
  EXPECT_LT(RelErr(packed, oracle), 1e-4);
}

TEST(Tables, SelectExactNearestAndEmpty) {
  TableStore store;
  EXPECT_PCOL_ERROR(store.Select(50, 25), ErrorCode::kEmptyStore);
  LookupTable a, b;
  a.sigma_x = 50;
  a.sigma_z = 25;
  b.sigma_x = 60;
  b.sigma_z = 30;
  store.Add(a);
  store.Add(b);
  const TableSelection exact = store.Select(60, 30);
  EXPECT_TRUE(exact.exact);
  EXPECT_EQ(exact.table->sigma_x, 60);
  EXPECT_TRUE(exact.warning.empty());
  const TableSelection near = store.Select(50.1, 25);
  EXPECT_FALSE(near.exact);
  EXPECT_EQ(near.table->sigma_x, 50);
  EXPECT_NE(near.warning.find("nearest"), std::string::npos);
}

TEST(Tables, StoreRoundTripAndParamsCheck) {
  CkksSetup s("toy", 8);
  Engine engine(s.ctx, s.keys);
  TableStore store;
  store.Add(BuildLookupTable(engine, 50, 25, Spec("trapezoid", 0.5), 5.0));
  store.Add(BuildLookupTable(engine, 60, 30, Spec("gauss2", 0.5), 5.0));
  const auto dir = std::filesystem::temp_directory_path() / "pcol_table_store_test";
  std::filesystem::remove_all(dir);
  store.Save(dir.string(), s.ctx->params());
  const TableStore back = TableStore::Load(dir.string(), *s.ctx);
  ASSERT_EQ(back.tables().size(), 2u);
  const LookupTable& t = back.tables()[1];
  EXPECT_EQ(t.sigma_x, 60);
  EXPECT_EQ(t.eval_count, 480);
  EXPECT_TRUE(t.grid == store.tables()[1].grid);
  ASSERT_EQ(t.packed.size(), store.tables()[1].packed.size());
  const auto orig = engine.Decrypt(store.tables()[1].packed[3]);
  const auto loaded = engine.Decrypt(t.packed[3]);
  EXPECT_LT(testutil::MaxAbsDiff(orig, loaded, orig.size()), 1e-9);

  const auto other = ckks::Context::Create(ckks::GenParams("desk"));
  EXPECT_PCOL_ERROR(TableStore::Load(dir.string(), *other), ErrorCode::kInvalidParams);
  std::filesystem::remove_all(dir);
}

TEST(Tables, PackingAndDecryptedValues) {
  DeskSession& desk = DeskSession::Get();
  Engine engine(desk.driver, 9);
  const LookupTable g2 = BuildLookupTable(engine, 50, 25, Spec("gauss2", 0.5), 5.0);
  EXPECT_EQ(g2.eval_count, 480);
  EXPECT_EQ(g2.packed.size(), 1u);

  const QuadratureSpec trap = Spec("trapezoid", 0.05);
  const LookupTable t = BuildLookupTable(engine, 50, 25, trap, 5.0);
  EXPECT_EQ(t.eval_count, 12726);
  EXPECT_EQ(t.packed.size(), 4u);
  const NodeSet nodes = BuildNodes(trap, 5.0);
  const std::size_t per = t.slots_per_ciphertext;
  double peak = 0.0;
  for (const Node& n : nodes.nodes) peak = std::max(peak, IntegrandP(n.y, n.phi, 50, 25));
  EXPECT_GE(t.value_scale * peak, 0.5);
  EXPECT_LT(t.value_scale * peak, 1.0);
  for (std::size_t c = 0; c < t.packed.size(); ++c) {
    const auto got = engine.Decrypt(t.packed[c]);
    for (std::size_t i = 0; i < per; ++i) {
      const std::size_t k = c * per + i;
      const double want =
          k < nodes.nodes.size() ? IntegrandP(nodes.nodes[k].y, nodes.nodes[k].phi, 50, 25) : 0.0;
      // Relative to the table's peak: entries near y = 0 and the zero padding
      // sit far below the encryption noise floor in relative terms.
      ASSERT_NEAR(got[i] / t.value_scale, want, 1e-6 * peak) << "ct " << c << " slot " << i;
    }
  }
}

TEST(Tables, PcolFromTableMatchesPlaintext) {
  DeskSession& desk = DeskSession::Get();
  Engine engine(desk.driver, 10);
  for (double h : {0.5, 0.1}) {
    const QuadratureSpec spec = Spec("gauss2", h);
    const LookupTable table = BuildLookupTable(engine, 50, 25, spec, 5.0);
    engine.counter() = {};
    const double got = engine.Decrypt(PcolFromTable(engine, table, spec))[0];
    EXPECT_LT(RelErr(got, IntegratePcol(Geometry(5, 50, 25), spec).p_col), 1e-5) << h;
    EXPECT_EQ(engine.counter().additions, CountOps(spec, 5.0).additions);
    EXPECT_EQ(engine.counter().refreshes, 0);
    if (h == 0.5) {
      EXPECT_EQ(engine.counter().additions, 480);
      EXPECT_PCOL_ERROR(PcolFromTable(engine, table, Spec("gauss2", 0.1)),
                        ErrorCode::kGridMismatch);
      EXPECT_PCOL_ERROR(PcolFromTable(engine, table, Spec("gauss3", 0.5)),
                        ErrorCode::kGridMismatch);
      LookupTable zero = table;
      zero.packed = {engine.Encrypt(std::vector<double>(desk.ctx->slots(), 0.0))};
      EXPECT_NEAR(engine.Decrypt(PcolFromTable(engine, zero, spec))[0], 0.0, 1e-9);
    }
  }
}

TEST(Online, PointEvaluationTable4Rows) {
  DeskSession& desk = DeskSession::Get();
  Engine engine(desk.driver, 11);
  const EncryptedGeometry g = SharedGeometry(engine, 50, 25, 2, 5.0);
  const double truth = IntegrandP(5.0, kTwoPi, 50, 25);
  auto point = [&](int n1, int n2) {
    ApproxConfig config;
    config.n1 = n1;
    config.n2 = n2;
    engine.counter() = {};
    const auto y = SlotInput::Encrypted(engine, {5.0 / kLengthUnit});
    const auto phi = SlotInput::Encrypted(engine, {kTwoPi});
    const double v = engine.Decrypt(EvalIntegrandEncrypted(engine, g, y, phi, config))[0];
    EXPECT_LT(RelErr(v, kLengthUnit * IntegrandTaylor(5.0, kTwoPi, 50, 25, config, true)), 1e-4);
    EXPECT_GE(engine.counter().refreshes, 1);
    return v / kLengthUnit;
  };
  EXPECT_GT(RelErr(point(5, 5), truth), 0.10);
  EXPECT_LT(std::abs(point(5, 10) - truth), 4.8e-8);
}

TEST(Online, GaussTwoMatchesOracleAndTable) {
  DeskSession& desk = DeskSession::Get();
  Engine engine(desk.driver, 12);
  const QuadratureSpec spec = Spec("gauss2", 0.5);
  const EncryptedGeometry g = SharedGeometry(engine, 50, 25, 2, 5.0);
  const ApproxConfig config;
  const double online = engine.Decrypt(PcolOnline(engine, g, spec, config))[0];
  EXPECT_LT(RelErr(online, PcolTaylor(Geometry(5, 50, 25), spec, config)), 1e-4);
  EXPECT_GE(engine.counter().refreshes, 1);
  const LookupTable table = BuildLookupTable(engine, 50, 25, spec, 5.0);
  EXPECT_LT(RelErr(online, engine.Decrypt(PcolFromTable(engine, table, spec))[0]), 1e-4);
}

}  // namespace
}  // namespace pcol::he
