#include "pcol/he_pipeline.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "pcol/ckks/serialize.h"
#include "pcol/errors.h"

namespace pcol::he {
namespace {

using json = nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Output scale of the weighting product is 2^kWeightGainBits times the
// canonical scale, which keeps rescale rounding small next to P_col.
constexpr int kWeightGainBits = 12;

std::vector<double> Coefficients(SeriesKind kind, int order, double range) {
  std::vector<double> c(order + 1);
  long double term = 1.0L;  // range^j / j!
  int j = 0;
  for (int k = 0; k <= order; ++k) {
    const int power = kind == SeriesKind::kExp ? k : 2 * k;
    while (j < power) {
      ++j;
      term *= static_cast<long double>(range) / j;
    }
    const long double sign = (kind == SeriesKind::kCos && k % 2 == 1) ? -1.0L : 1.0L;
    c[k] = static_cast<double>(sign * term);
  }
  return c;
}

int CeilLog2(int x) { return x <= 1 ? 0 : static_cast<int>(std::bit_width(static_cast<unsigned>(x - 1))); }

double MaxAbs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<Node> Batch(const std::vector<Node>& nodes, std::size_t first, std::size_t size) {
  const std::size_t last = std::min(nodes.size(), first + size);
  return {nodes.begin() + first, nodes.begin() + last};
}

}  // namespace

OpCounter& OpCounter::operator+=(const OpCounter& o) {
  additions += o.additions;
  multiplications += o.multiplications;
  refreshes += o.refreshes;
  rotations += o.rotations;
  return *this;
}

void ApproxConfig::Validate() const {
  if (n1 < 1 || n2 < 1) throw Error(ErrorCode::kInvalidInput, "Taylor orders must be >= 1");
  if (refresh_reserve_levels < 1) {
    throw Error(ErrorCode::kInvalidInput, "refresh_reserve_levels must be >= 1");
  }
  if (!(exp_range > 0.0)) throw Error(ErrorCode::kInvalidInput, "exp_range must be positive");
}

// ------------------------------------------------------------------ Engine

Engine::Engine(threshold::InProcessDriver& driver, std::uint64_t seed)
    : ctx_(driver.context()),
      eval_(ctx_),
      driver_(&driver),
      prng_(ckks::Prng::FromU64(seed, "pcol/engine")) {}

Engine::Engine(ckks::ContextPtr ctx, const ckks::KeyMaterial& keys, std::uint64_t seed)
    : ctx_(std::move(ctx)),
      eval_(ctx_),
      keys_(&keys),
      prng_(ckks::Prng::FromU64(seed, "pcol/engine")) {}

const ckks::PublicKey& Engine::public_key() const {
  return driver_ ? driver_->session().public_key() : keys_->public_key;
}

Ciphertext Engine::Encrypt(std::span<const double> values) {
  return eval_.EncryptValues(values, public_key(), prng_);
}

std::vector<double> Engine::Decrypt(const Ciphertext& ct) {
  return driver_ ? driver_->Decrypt(ct) : eval_.DecryptValues(ct, keys_->secret_key);
}

Ciphertext Engine::DropTo(const Ciphertext& a, int level) const {
  return a.level == level ? a : eval_.DropToLevel(a, level);
}

Ciphertext Engine::Add(const Ciphertext& a, const Ciphertext& b) {
  const int level = std::min(a.level, b.level);
  ++counter_.additions;
  return eval_.Add(DropTo(a, level), DropTo(b, level));
}

Ciphertext Engine::Sub(const Ciphertext& a, const Ciphertext& b) {
  const int level = std::min(a.level, b.level);
  ++counter_.additions;
  return eval_.Sub(DropTo(a, level), DropTo(b, level));
}

Ciphertext Engine::AddConst(const Ciphertext& a, double c) {
  ++counter_.additions;
  return eval_.AddConst(a, c);
}

Ciphertext Engine::Mult(const Ciphertext& a, const Ciphertext& b) {
  const int level = std::min(a.level, b.level);
  const auto& relin = driver_ ? driver_->session().relin_key() : keys_->relin_key;
  ++counter_.multiplications;
  return eval_.Mult(DropTo(a, level), DropTo(b, level), relin);
}

Ciphertext Engine::Square(const Ciphertext& a) {
  const auto& relin = driver_ ? driver_->session().relin_key() : keys_->relin_key;
  ++counter_.multiplications;
  return eval_.Square(a, relin);
}

Ciphertext Engine::MultConst(const Ciphertext& a, double c) {
  ++counter_.multiplications;
  return eval_.MultConst(a, c);
}

Ciphertext Engine::MultPlain(const Ciphertext& a, std::span<const double> values,
                             double out_scale) {
  ++counter_.multiplications;
  return eval_.MultPlain(a, eval_.EncodeForMult(values, a, out_scale));
}

Ciphertext Engine::SumSlots(const Ciphertext& a, std::size_t active_slots) {
  const auto& keys = driver_ ? driver_->session().rotation_keys() : keys_->rotation_keys;
  const auto steps = static_cast<std::int64_t>(ckks::SumSlotsSteps(active_slots).size());
  counter_.rotations += steps;
  counter_.additions += steps;
  return eval_.SumSlots(a, active_slots, keys);
}

Ciphertext Engine::Ensure(const Ciphertext& a, int levels, int reserve) {
  if (a.level >= levels + reserve) return a;
  if (levels + reserve > ctx_->max_level()) {
    throw Error(ErrorCode::kOutOfLevels,
                "stage needs " + std::to_string(levels) + " levels plus a reserve of " +
                    std::to_string(reserve) + ", parameters provide " +
                    std::to_string(ctx_->max_level()));
  }
  if (!driver_) {
    throw Error(ErrorCode::kOutOfLevels, "refresh is unavailable in single-party mode");
  }
  if (a.level < 1) throw Error(ErrorCode::kOutOfLevels, "cannot refresh a level-0 ciphertext");
  ++counter_.refreshes;
  return driver_->Refresh(a);
}

// ---------------------------------------------------------------- geometry

std::array<double, 3> GeometryValues(double sigma_x, double sigma_z) {
  if (!(sigma_x > 0.0) || !(sigma_z > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "sigmas must be positive");
  }
  const double u2 = kLengthUnit * kLengthUnit;
  return {u2 / (sigma_x * sigma_x), u2 / (sigma_z * sigma_z), u2 / (sigma_x * sigma_z)};
}

std::vector<std::array<double, 3>> SplitGeometry(double sigma_x, double sigma_z,
                                                 std::size_t parties, std::uint64_t seed) {
  if (parties < 1) throw Error(ErrorCode::kInvalidInput, "need at least one party");
  const auto total = GeometryValues(sigma_x, sigma_z);
  std::mt19937_64 rng(seed);
  std::vector<std::array<double, 3>> rows(parties, std::array<double, 3>{});
  for (int q = 0; q < 3; ++q) {
    std::uniform_real_distribution<double> dist(-total[q], total[q]);
    double rest = total[q];
    for (std::size_t p = 0; p + 1 < parties; ++p) {
      rows[p][q] = dist(rng);
      rest -= rows[p][q];
    }
    rows[parties - 1][q] = rest;
  }
  return rows;
}

GeometryShare EncryptGeometryShare(Engine& engine, const std::array<double, 3>& share) {
  const std::size_t slots = engine.context()->slots();
  auto fill = [&](double v) { return engine.Encrypt(std::vector<double>(slots, v)); };
  return {fill(share[0]), fill(share[1]), fill(share[2])};
}

EncryptedGeometry CombineEncryptedShares(Engine& engine, std::span<const GeometryShare> shares,
                                         std::size_t parties, double combined_radius) {
  if (shares.size() != parties || parties == 0) {
    throw Error(ErrorCode::kMissingParty, "expected one geometry share per party, got " +
                                              std::to_string(shares.size()) + " of " +
                                              std::to_string(parties));
  }
  for (const auto& s : shares) {
    for (const Ciphertext* c : {&s.inv_sx2, &s.inv_sz2, &s.inv_sxsz}) {
      if (c->level != shares[0].inv_sx2.level) {
        throw Error(ErrorCode::kLevelMismatch, "geometry shares at different levels");
      }
    }
  }
  EncryptedGeometry g{shares[0].inv_sx2, shares[0].inv_sz2, shares[0].inv_sxsz, combined_radius};
  for (std::size_t i = 1; i < shares.size(); ++i) {
    g.inv_sx2 = engine.Add(g.inv_sx2, shares[i].inv_sx2);
    g.inv_sz2 = engine.Add(g.inv_sz2, shares[i].inv_sz2);
    g.inv_sxsz = engine.Add(g.inv_sxsz, shares[i].inv_sxsz);
  }
  return g;
}

// ------------------------------------------------------------ lookup tables

LookupTable BuildLookupTable(Engine& engine, double sigma_x, double sigma_z,
                             const QuadratureSpec& spec, double radius) {
  const NodeSet nodes = BuildNodes(spec, radius);
  LookupTable t;
  t.sigma_x = sigma_x;
  t.sigma_z = sigma_z;
  t.radius = radius;
  t.spec = spec;
  t.grid = nodes.grid;
  t.eval_count = nodes.eval_count;
  t.slots_per_ciphertext = engine.context()->slots();
  std::vector<double> p;
  p.reserve(nodes.nodes.size());
  for (const Node& n : nodes.nodes) p.push_back(IntegrandP(n.y, n.phi, sigma_x, sigma_z));
  const double peak = MaxAbs(p);
  t.value_scale = peak > 0.0 ? std::exp2(-std::ceil(std::log2(peak))) : 1.0;
  for (std::size_t first = 0; first < p.size(); first += t.slots_per_ciphertext) {
    const std::size_t last = std::min(p.size(), first + t.slots_per_ciphertext);
    std::vector<double> values(p.begin() + first, p.begin() + last);
    for (double& v : values) v *= t.value_scale;
    t.packed.push_back(engine.Encrypt(values));
  }
  return t;
}

TableSelection TableStore::Select(double sigma_x, double sigma_z) const {
  if (tables_.empty()) throw Error(ErrorCode::kEmptyStore, "no lookup tables available");
  TableSelection best;
  double best_d = INFINITY;
  for (const LookupTable& t : tables_) {
    const double d = std::hypot(t.sigma_x - sigma_x, t.sigma_z - sigma_z);
    if (d < best_d) {
      best_d = d;
      best.table = &t;
    }
  }
  best.exact = best_d == 0.0;
  if (!best.exact) {
    best.warning = "no table for sigma = (" + std::to_string(sigma_x) + ", " +
                   std::to_string(sigma_z) + "); using nearest (" +
                   std::to_string(best.table->sigma_x) + ", " +
                   std::to_string(best.table->sigma_z) +
                   "), which can introduce considerable error when the values do not align";
  }
  return best;
}

void TableStore::Save(const std::string& dir, const ckks::Params& params) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  json manifest;
  manifest["format"] = "pcol-table-store";
  manifest["version"] = 1;
  manifest["params_hash"] = ckks::ParamsHash(params);
  manifest["node_order"] = kNodeOrder;
  manifest["tables"] = json::array();
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    const LookupTable& t = tables_[i];
    json files = json::array();
    for (std::size_t j = 0; j < t.packed.size(); ++j) {
      const std::string name = "table" + std::to_string(i) + "_ct" + std::to_string(j) + ".bin";
      ckks::WriteFile((fs::path(dir) / name).string(), ckks::Serialize(t.packed[j]));
      files.push_back(name);
    }
    manifest["tables"].push_back({
        {"sigma_key", {t.sigma_x, t.sigma_z}},
        {"radius", t.radius},
        {"rule", t.spec.rule.Name()},
        {"h_r", t.spec.h_r},
        {"h_phi", t.spec.h_phi},
        {"grid",
         {{"radial_intervals", t.grid.radial_intervals},
          {"angular_intervals", t.grid.angular_intervals},
          {"radial_step", t.grid.radial_step},
          {"angular_step", t.grid.angular_step}}},
        {"eval_count", t.eval_count},
        {"slots_per_ciphertext", t.slots_per_ciphertext},
        {"value_scale", t.value_scale},
        {"ciphertexts", files},
    });
  }
  std::ofstream out(fs::path(dir) / "manifest.json");
  out << manifest.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kSerialization, "cannot write " + dir + "/manifest.json");
}

TableStore TableStore::Load(const std::string& dir, const ckks::Context& ctx) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) throw Error(ErrorCode::kSerialization, "cannot read " + dir + "/manifest.json");
  TableStore store;
  try {
    const json manifest = json::parse(in);
    if (manifest.at("params_hash").get<std::string>() != ckks::ParamsHash(ctx.params())) {
      throw Error(ErrorCode::kInvalidParams, "table store was built for different parameters");
    }
    for (const json& j : manifest.at("tables")) {
      LookupTable t;
      t.sigma_x = j.at("sigma_key").at(0).get<double>();
      t.sigma_z = j.at("sigma_key").at(1).get<double>();
      t.radius = j.at("radius").get<double>();
      t.spec.rule = Rule::Parse(j.at("rule").get<std::string>());
      t.spec.h_r = j.at("h_r").get<double>();
      t.spec.h_phi = j.at("h_phi").get<double>();
      const json& g = j.at("grid");
      t.grid.radial_intervals = g.at("radial_intervals").get<std::int64_t>();
      t.grid.angular_intervals = g.at("angular_intervals").get<std::int64_t>();
      t.grid.radial_step = g.at("radial_step").get<double>();
      t.grid.angular_step = g.at("angular_step").get<double>();
      t.eval_count = j.at("eval_count").get<std::int64_t>();
      t.slots_per_ciphertext = j.at("slots_per_ciphertext").get<std::size_t>();
      t.value_scale = j.at("value_scale").get<double>();
      for (const json& f : j.at("ciphertexts")) {
        const auto bytes = ckks::ReadFile((fs::path(dir) / f.get<std::string>()).string());
        t.packed.push_back(ckks::DeserializeCiphertext(ctx, bytes));
      }
      store.Add(std::move(t));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSerialization, std::string("malformed table manifest: ") + e.what());
  }
  return store;
}

Ciphertext PcolFromTable(Engine& engine, const LookupTable& table, const QuadratureSpec& spec) {
  if (!(spec.rule == table.spec.rule) || !(MakeGrid(spec, table.radius) == table.grid)) {
    throw Error(ErrorCode::kGridMismatch, "quadrature spec does not match the table grid");
  }
  const NodeSet nodes = BuildNodes(spec, table.radius);
  const std::size_t per = table.slots_per_ciphertext;
  const OpCounter before = engine.counter();
  std::optional<Ciphertext> acc;
  for (std::size_t k = 0; k < table.packed.size(); ++k) {
    const auto batch = Batch(nodes.nodes, k * per, per);
    std::vector<double> weights;
    for (const Node& n : batch) weights.push_back(n.weight / table.value_scale);
    const Ciphertext& ct = table.packed[k];
    const double out_scale =
        std::ldexp(engine.context()->level_scale(ct.level - 1), kWeightGainBits);
    Ciphertext partial = engine.SumSlots(engine.MultPlain(ct, weights, out_scale), batch.size());
    acc = acc ? engine.Add(*acc, partial) : partial;
  }
  engine.counter().additions = before.additions + CountOps(spec, table.radius).additions;
  return *acc;
}

// ------------------------------------------------------------ online Taylor

double TaylorSeries(SeriesKind kind, double x, int order) {
  const auto c = Coefficients(kind, order, 1.0);
  const long double v = kind == SeriesKind::kExp ? x : static_cast<long double>(x) * x;
  long double acc = 0.0L;
  for (int k = order; k >= 0; --k) acc = acc * v + c[k];
  return static_cast<double>(acc);
}

int TaylorLevels(SeriesKind kind, int order, EvalStrategy strategy, double range) {
  int levels = range == 1.0 ? 0 : 1;
  if (kind == SeriesKind::kCos) ++levels;  // w = x^2
  levels += strategy == EvalStrategy::kPowerBasis ? CeilLog2(order) + 1 : order;
  return levels;
}

Ciphertext TaylorSeriesEval(Engine& engine, SeriesKind kind, const Ciphertext& x, int order,
                            EvalStrategy strategy, double range) {
  if (order < 1) throw Error(ErrorCode::kInvalidInput, "Taylor order must be >= 1");
  if (!(range > 0.0)) throw Error(ErrorCode::kInvalidInput, "series range must be positive");
  const int need = TaylorLevels(kind, order, strategy, range);
  if (x.level < need) {
    throw Error(ErrorCode::kOutOfLevels, "series needs " + std::to_string(need) +
                                             " levels, input has " + std::to_string(x.level));
  }
  // Series variable v in [-1, 1]: x / range for exp, (x / range)^2 for cos.
  Ciphertext v = range == 1.0 ? x : engine.MultConst(x, 1.0 / range);
  v.value_bound = std::min(v.value_bound, 1.0);
  if (kind == SeriesKind::kCos) {
    v = engine.Square(v);
    v.value_bound = std::min(v.value_bound, 1.0);
  }
  const std::vector<double> c = Coefficients(kind, order, range);

  Ciphertext out;
  if (strategy == EvalStrategy::kHorner) {
    out = engine.AddConst(engine.MultConst(v, c[order]), c[order - 1]);
    for (int k = order - 2; k >= 0; --k) out = engine.AddConst(engine.Mult(out, v), c[k]);
  } else {
    std::vector<Ciphertext> power(order + 1);
    power[1] = v;
    for (int k = 2; k <= order; ++k) {
      const int high = 1 << (CeilLog2(k) - 1);
      power[k] = high == k - high ? engine.Square(power[high])
                                  : engine.Mult(power[high], power[k - high]);
      power[k].value_bound = std::min(power[k].value_bound, 1.0);
    }
    std::optional<Ciphertext> sum;
    for (int k = 1; k <= order; ++k) {
      const Ciphertext term = engine.MultConst(power[k], c[k]);
      sum = sum ? engine.Add(*sum, term) : term;
    }
    out = engine.AddConst(*sum, c[0]);
  }
  double bound = 0.0;
  for (double ck : c) bound += std::abs(ck);
  out.value_bound = bound;
  return out;
}

SlotInput SlotInput::Public(std::vector<double> values) {
  SlotInput in;
  in.bound = MaxAbs(values);
  in.values = std::move(values);
  return in;
}

SlotInput SlotInput::Encrypted(Engine& engine, std::vector<double> values) {
  SlotInput in = Public(std::move(values));
  in.ct = engine.Encrypt(in.values);
  return in;
}

Ciphertext EvalIntegrandEncrypted(Engine& engine, const EncryptedGeometry& geom,
                                  const SlotInput& y, const SlotInput& phi,
                                  const ApproxConfig& config) {
  config.Validate();
  const int reserve = config.refresh_reserve_levels;
  const EvalStrategy strategy = config.strategy;

  // s = cos^2(phi) a + sin^2(phi) b = b + cos^2(phi) (a - b)
  Ciphertext s;
  const Ciphertext diff = engine.Sub(geom.inv_sx2, geom.inv_sz2);
  if (phi.ct) {
    const double range = std::max(1.0, phi.bound);
    const Ciphertext x =
        engine.Ensure(*phi.ct, TaylorLevels(SeriesKind::kCos, config.n2, strategy, range) + 1,
                      reserve);
    const Ciphertext cos = TaylorSeriesEval(engine, SeriesKind::kCos, x, config.n2, strategy, range);
    const Ciphertext cos2 = engine.Ensure(engine.Square(cos), 1, reserve);
    s = engine.Mult(cos2, engine.Ensure(diff, 1, reserve));
  } else {
    std::vector<double> cos2(phi.values.size());
    for (std::size_t i = 0; i < cos2.size(); ++i) {
      const double c = std::cos(phi.values[i]);
      cos2[i] = c * c;
    }
    s = engine.MultPlain(engine.Ensure(diff, 1, reserve), cos2);
  }
  s = engine.Ensure(engine.Add(s, geom.inv_sz2), 1, reserve);

  // t = -y^2 / 2 * s
  Ciphertext t;
  if (y.ct) {
    const Ciphertext yy = engine.Ensure(*y.ct, 2, reserve);
    const Ciphertext q = engine.Ensure(engine.MultConst(engine.Square(yy), -0.5), 1, reserve);
    t = engine.Mult(s, q);
  } else {
    std::vector<double> q(y.values.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = -0.5 * y.values[i] * y.values[i];
    t = engine.MultPlain(s, q);
  }

  const double range = config.exp_range;
  t = engine.Ensure(t, TaylorLevels(SeriesKind::kExp, config.n1, strategy, range), reserve);
  Ciphertext e = TaylorSeriesEval(engine, SeriesKind::kExp, t, config.n1, strategy, range);

  // y / (2 pi) * u^2 / (sx sz)
  Ciphertext prefactor;
  if (y.ct) {
    const Ciphertext yy = engine.Ensure(*y.ct, 2, reserve);
    prefactor = engine.Mult(engine.MultConst(yy, 1.0 / kTwoPi), geom.inv_sxsz);
  } else {
    std::vector<double> w(y.values.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = y.values[i] / kTwoPi;
    prefactor = engine.MultPlain(engine.Ensure(geom.inv_sxsz, 1, reserve), w);
  }
  e = engine.Ensure(e, 1, reserve);
  prefactor = engine.Ensure(prefactor, 1, reserve);
  return engine.Mult(e, prefactor);
}

double SeriesAngle(double phi, const ApproxConfig& config) {
  return config.range_reduce ? phi - kTwoPi * std::round(phi / kTwoPi) : phi;
}

double IntegrandTaylor(double y, double phi, double sigma_x, double sigma_z,
                       const ApproxConfig& config, bool encrypted_phi) {
  const double c = encrypted_phi
                       ? TaylorSeries(SeriesKind::kCos, SeriesAngle(phi, config), config.n2)
                       : std::cos(phi);
  const double a = 1.0 / (sigma_x * sigma_x);
  const double b = 1.0 / (sigma_z * sigma_z);
  const double t = -0.5 * y * y * (b + c * c * (a - b));
  return y / (kTwoPi * sigma_x * sigma_z) * TaylorSeries(SeriesKind::kExp, t, config.n1);
}

double PcolTaylor(const EncounterGeometry& geometry, const QuadratureSpec& spec,
                  const ApproxConfig& config) {
  const NodeSet nodes = BuildNodes(spec, geometry.combined_radius);
  CompensatedSum sum;
  for (const Node& n : nodes.nodes) {
    sum.Add(n.weight *
            IntegrandTaylor(n.y, n.phi, geometry.sigma_x, geometry.sigma_z, config, true));
  }
  return sum.Value();
}

Ciphertext PcolOnline(Engine& engine, const EncryptedGeometry& geom, const QuadratureSpec& spec,
                      const ApproxConfig& config, const OnlineOptions& options) {
  config.Validate();
  const NodeSet nodes = BuildNodes(spec, geom.combined_radius);
  const std::size_t slots = engine.context()->slots();
  const std::size_t per = options.batch_slots == 0 ? slots : std::min(options.batch_slots, slots);
  std::optional<Ciphertext> acc;
  for (std::size_t first = 0; first < nodes.nodes.size(); first += per) {
    const auto batch = Batch(nodes.nodes, first, per);
    std::vector<double> y, phi, weights;
    for (const Node& n : batch) {
      y.push_back(n.y / kLengthUnit);
      phi.push_back(SeriesAngle(n.phi, config));
      weights.push_back(n.weight / kLengthUnit);
    }
    const SlotInput y_in = SlotInput::Encrypted(engine, std::move(y));
    SlotInput phi_in = SlotInput::Encrypted(engine, std::move(phi));
    // Same series range for every batch so all partials end on one level.
    phi_in.bound = config.range_reduce ? std::numbers::pi : kTwoPi;
    Ciphertext p = EvalIntegrandEncrypted(engine, geom, y_in, phi_in, config);
    p = engine.Ensure(p, 1, config.refresh_reserve_levels);
    const double out_scale =
        std::ldexp(engine.context()->level_scale(p.level - 1), kWeightGainBits);
    Ciphertext partial = engine.SumSlots(engine.MultPlain(p, weights, out_scale), batch.size());
    acc = acc ? engine.Add(*acc, partial) : partial;
  }
  return *acc;
}

}  // namespace pcol::he
