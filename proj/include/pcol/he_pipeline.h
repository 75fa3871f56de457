#ifndef PCOL_HE_PIPELINE_H_
#define PCOL_HE_PIPELINE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcol/ckks/evaluator.h"
#include "pcol/ckks/keys.h"
#include "pcol/quadrature.h"
#include "pcol/threshold.h"

namespace pcol::he {

using ckks::Ciphertext;

// Encrypted quantities are expressed in units of kLengthUnit metres so that
// they stay near 1: slots hold u^2/sx^2, u^2/sz^2, u^2/(sx sz), and the
// online pipeline produces u * p(y, phi). Quadrature weights are divided by u.
inline constexpr double kLengthUnit = 100.0;

// Homomorphic operation tally. `additions` and `multiplications` count
// ciphertext-level operations (a plaintext-ciphertext product counts as a
// multiplication), except in table mode where `additions` follows the
// non-parallel convention of one addition per weighted node; the actual
// rotate-and-add work is in `rotations`.
struct OpCounter {
  std::int64_t additions = 0;
  std::int64_t multiplications = 0;
  std::int64_t refreshes = 0;
  std::int64_t rotations = 0;

  OpCounter& operator+=(const OpCounter& o);
};

enum class EvalStrategy { kPowerBasis, kHorner };

struct ApproxConfig {
  int n1 = 10;  // exp Taylor order
  int n2 = 10;  // cos Taylor order
  EvalStrategy strategy = EvalStrategy::kPowerBasis;
  int refresh_reserve_levels = 1;
  // Reduce public angles into [-pi, pi] before encryption. Off by default:
  // the series is then evaluated on [0, 2 pi] as is.
  bool range_reduce = false;
  // Promised bound on |t| for the exp series; larger values are normalized.
  double exp_range = 1.0;

  void Validate() const;
};

// Wraps an evaluator and keys, counts every operation and refreshes through
// the threshold session when a stage would otherwise run out of levels.
class Engine {
 public:
  explicit Engine(threshold::InProcessDriver& driver, std::uint64_t seed = 1);
  // Single-party mode for tests and tooling: no refresh is available.
  Engine(ckks::ContextPtr ctx, const ckks::KeyMaterial& keys, std::uint64_t seed = 1);

  const ckks::ContextPtr& context() const { return ctx_; }
  const ckks::Evaluator& eval() const { return eval_; }
  const ckks::PublicKey& public_key() const;
  OpCounter& counter() { return counter_; }
  bool can_refresh() const { return driver_ != nullptr; }

  Ciphertext Encrypt(std::span<const double> values);
  std::vector<double> Decrypt(const Ciphertext& ct);

  Ciphertext Add(const Ciphertext& a, const Ciphertext& b);
  Ciphertext Sub(const Ciphertext& a, const Ciphertext& b);
  Ciphertext AddConst(const Ciphertext& a, double c);
  Ciphertext Mult(const Ciphertext& a, const Ciphertext& b);
  Ciphertext Square(const Ciphertext& a);
  Ciphertext MultConst(const Ciphertext& a, double c);
  // Slotwise product with public values; out_scale as in EncodeForMult.
  Ciphertext MultPlain(const Ciphertext& a, std::span<const double> values,
                       double out_scale = 0.0);
  Ciphertext SumSlots(const Ciphertext& a, std::size_t active_slots);

  // Lowers the higher-level operand so both sit at the same level.
  Ciphertext DropTo(const Ciphertext& a, int level) const;
  // Guarantees `levels` + reserve remaining levels, refreshing if needed.
  // Throws OutOfLevels when that is impossible.
  Ciphertext Ensure(const Ciphertext& a, int levels, int reserve);

 private:
  ckks::ContextPtr ctx_;
  ckks::Evaluator eval_;
  threshold::InProcessDriver* driver_ = nullptr;
  const ckks::KeyMaterial* keys_ = nullptr;
  ckks::Prng prng_;
  OpCounter counter_;
};

// ---------------------------------------------------------------- geometry

struct EncryptedGeometry {
  Ciphertext inv_sx2;   // u^2 / sx^2 in every slot
  Ciphertext inv_sz2;   // u^2 / sz^2
  Ciphertext inv_sxsz;  // u^2 / (sx sz)
  double combined_radius = 0.0;  // m, public
};

// Additive shares of the three geometry quantities, one row per party.
struct GeometryShare {
  Ciphertext inv_sx2;
  Ciphertext inv_sz2;
  Ciphertext inv_sxsz;
};

// Plaintext values (u^2/sx^2, u^2/sz^2, u^2/(sx sz)).
std::array<double, 3> GeometryValues(double sigma_x, double sigma_z);
// Random additive split of GeometryValues into `parties` rows.
std::vector<std::array<double, 3>> SplitGeometry(double sigma_x, double sigma_z,
                                                 std::size_t parties, std::uint64_t seed);
GeometryShare EncryptGeometryShare(Engine& engine, const std::array<double, 3>& share);

// Sums one share per party. Throws MissingParty unless exactly `parties`
// shares are given and LevelMismatch if they disagree in level.
EncryptedGeometry CombineEncryptedShares(Engine& engine, std::span<const GeometryShare> shares,
                                         std::size_t parties, double combined_radius);

// ------------------------------------------------------------ lookup tables

inline constexpr const char* kNodeOrder = "radial-major";

struct LookupTable {
  double sigma_x = 0.0;
  double sigma_z = 0.0;
  double radius = 0.0;
  QuadratureSpec spec;
  Grid grid;
  std::int64_t eval_count = 0;
  std::size_t slots_per_ciphertext = 0;
  // Power of two normalizing the largest entry into [0.5, 1).
  double value_scale = 1.0;
  std::vector<Ciphertext> packed;  // value_scale * p per node, node_order, zero padded
};

LookupTable BuildLookupTable(Engine& engine, double sigma_x, double sigma_z,
                             const QuadratureSpec& spec, double radius);

struct TableSelection {
  const LookupTable* table = nullptr;
  bool exact = false;
  std::string warning;  // set for nearest-neighbour matches
};

class TableStore {
 public:
  void Add(LookupTable table) { tables_.push_back(std::move(table)); }
  const std::vector<LookupTable>& tables() const { return tables_; }
  bool empty() const { return tables_.empty(); }

  // Exact match on (sigma_x, sigma_z), else the Euclidean nearest neighbour
  // with a warning. Throws EmptyStore.
  TableSelection Select(double sigma_x, double sigma_z) const;

  // Directory with manifest.json and one file per ciphertext. Load checks the
  // parameter hash and throws InvalidParams on mismatch.
  void Save(const std::string& dir, const ckks::Params& params) const;
  static TableStore Load(const std::string& dir, const ckks::Context& ctx);

 private:
  std::vector<LookupTable> tables_;
};

// Weighted sum of the table entries; slot 0 of the result decrypts to P_col.
// Throws GridMismatch when spec does not reproduce the table's grid.
Ciphertext PcolFromTable(Engine& engine, const LookupTable& table, const QuadratureSpec& spec);

// ------------------------------------------------------------ online Taylor

enum class SeriesKind { kExp, kCos };

// sum_{k<=order} x^k / k!  or  sum_{k<=order} (-1)^k x^(2k) / (2k)!.
double TaylorSeries(SeriesKind kind, double x, int order);

// Levels consumed by TaylorSeriesEval.
int TaylorLevels(SeriesKind kind, int order, EvalStrategy strategy, double range);

// Evaluates the truncated series on a ciphertext whose slots lie in
// [-range, range]; range != 1 costs one extra level for normalization.
// Throws OutOfLevels if the input has too few levels.
Ciphertext TaylorSeriesEval(Engine& engine, SeriesKind kind, const Ciphertext& x, int order,
                            EvalStrategy strategy, double range);

// Per-slot integrand inputs: either public values or a ciphertext. An
// encrypted angle goes through the cos series, a public one uses exact cos.
struct SlotInput {
  std::vector<double> values;
  std::optional<Ciphertext> ct;
  double bound = 0.0;  // max |value|

  static SlotInput Public(std::vector<double> values);
  static SlotInput Encrypted(Engine& engine, std::vector<double> values);
};

// u * p(y, phi) per slot. Refreshes automatically through the engine.
Ciphertext EvalIntegrandEncrypted(Engine& engine, const EncryptedGeometry& geom,
                                  const SlotInput& y, const SlotInput& phi,
                                  const ApproxConfig& config);

// Angle as fed to the series: reduced into [-pi, pi] when configured.
double SeriesAngle(double phi, const ApproxConfig& config);

// Plaintext composition of the same truncated series (the oracle for the
// encrypted pipeline); encrypted_phi selects the cos series over exact cos.
double IntegrandTaylor(double y, double phi, double sigma_x, double sigma_z,
                       const ApproxConfig& config, bool encrypted_phi);
double PcolTaylor(const EncounterGeometry& geometry, const QuadratureSpec& spec,
                  const ApproxConfig& config);

struct OnlineOptions {
  std::size_t batch_slots = 0;  // nodes per ciphertext; 0 = all slots
};

// Integrand at every node (angles and radii encrypted), weighted and summed.
Ciphertext PcolOnline(Engine& engine, const EncryptedGeometry& geom, const QuadratureSpec& spec,
                      const ApproxConfig& config, const OnlineOptions& options = {});

}  // namespace pcol::he

#endif  // PCOL_HE_PIPELINE_H_
