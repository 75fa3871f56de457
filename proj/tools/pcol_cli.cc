#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "input.h"
#include "pcol/ckks/keys.h"
#include "pcol/errors.h"
#include "pcol/geometry.h"
#include "pcol/he_pipeline.h"
#include "pcol/oracle.h"
#include "pcol/quadrature.h"
#include "pcol/threshold.h"
#include "report.h"

namespace pcol::cli {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;
constexpr int kExitProtocol = 4;

class Stopwatch {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::uint64_t DefaultSeed() {
  const char* env = std::getenv("PCOL_SEED");
  if (env == nullptr || *env == '\0') return 1;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidInput, std::string("PCOL_SEED is not an integer: ") + env);
  }
}

Json Vec2Json(const Vec2& v) { return Json::array({v.x(), v.y()}); }

double RelError(double got, double want) {
  return want == 0.0 ? std::abs(got) : std::abs(got - want) / std::abs(want);
}

// Geometry from a conjunction file or from explicit flags.
struct GeometryArgs {
  std::string input;
  double r = 5.0;
  double sigma_x = 50.0;
  double sigma_z = 25.0;

  void Register(CLI::App* cmd, bool with_input) {
    CLI::Option* file = nullptr;
    if (with_input) file = cmd->add_option("input", input, "conjunction JSON (pcol_input_v1)");
    auto* r_opt = cmd->add_option("--r", r, "combined hard-body radius [m]");
    auto* sx = cmd->add_option("--sigma-x", sigma_x, "principal sigma x' [m]");
    auto* sz = cmd->add_option("--sigma-z", sigma_z, "principal sigma z' [m]");
    if (file) {
      file->excludes(r_opt);
      file->excludes(sx);
      file->excludes(sz);
    }
  }

  EncounterGeometry Resolve() const {
    if (!input.empty()) {
      const ConjunctionInput in = ReadConjunctionInput(input);
      return ReduceConjunction(in.objects[0], in.objects[1]);
    }
    if (!(r > 0.0) || !(sigma_x > 0.0) || !(sigma_z > 0.0)) {
      throw Error(ErrorCode::kInvalidInput, "--r, --sigma-x and --sigma-z must be positive");
    }
    EncounterGeometry g;
    g.combined_radius = r;
    g.sigma_x = sigma_x;
    g.sigma_z = sigma_z;
    return g;
  }
};

// ------------------------------------------------------------------ reduce

int CmdReduce(const std::string& path) {
  const ConjunctionInput in = ReadConjunctionInput(path);
  const EncounterGeometry g = ReduceConjunction(in.objects[0], in.objects[1]);
  Json out;
  out["labels"] = in.labels;
  out["r"] = g.combined_radius;
  out["sigma_x"] = g.sigma_x;
  out["sigma_z"] = g.sigma_z;
  out["rotation_angle"] = g.rotation_angle;
  out["miss_vector"] = Vec2Json(g.miss_vector);
  out["relative_speed"] = g.relative_speed;
  out["warnings"] = g.warnings;
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

// -------------------------------------------------------------------- pcol

const std::vector<std::string> kQuadColumns = {
    "rule",     "h_r",        "h_phi",      "p_col",          "reference",
    "abs_error", "rel_error_percent", "eval_count", "addition_count", "mc_estimate",
    "mc_stderr", "wall_time_s"};

Json QuadratureRow(const EncounterGeometry& g, const QuadratureSpec& spec,
                   std::optional<double> reference) {
  const Stopwatch watch;
  const PcolResult res = IntegratePcol(g, spec);
  const double elapsed = watch.Seconds();
  Json row;
  row["rule"] = spec.rule.Name();
  row["h_r"] = spec.h_r;
  row["h_phi"] = spec.h_phi;
  row["p_col"] = res.p_col;
  if (reference) {
    row["reference"] = *reference;
    row["abs_error"] = std::abs(res.p_col - *reference);
    row["rel_error_percent"] = 100.0 * RelError(res.p_col, *reference);
  }
  row["eval_count"] = res.counts.evals;
  row["addition_count"] = res.counts.additions;
  row["wall_time_s"] = elapsed;
  return row;
}

struct PcolArgs {
  GeometryArgs geometry;
  std::string rule = "gauss2";
  double h = 0.0;
  double h_r = 0.5;
  double h_phi = 0.5;
  std::int64_t mc_samples = 0;
  bool reference = false;
  std::optional<std::uint64_t> seed;
  std::string format = "md";
};

int CmdPcol(const PcolArgs& a) {
  const EncounterGeometry g = a.geometry.Resolve();
  QuadratureSpec spec{Rule::Parse(a.rule), a.h_r, a.h_phi};
  if (a.h > 0.0) spec.h_r = spec.h_phi = a.h;
  const Format format = ParseFormat(a.format);
  std::optional<double> ref;
  if (a.reference) ref = ReferencePcol(g);
  Json row = QuadratureRow(g, spec, ref);
  if (a.mc_samples > 0) {
    McConfig mc;
    mc.samples = a.mc_samples;
    mc.rng_seed = a.seed.value_or(DefaultSeed());
    const McEstimate est = McPcol2d(g, mc);
    row["mc_estimate"] = est.estimate;
    row["mc_stderr"] = est.std_error;
  }
  for (const auto& w : g.warnings) std::cerr << "warning: " << w << "\n";
  Report report(kQuadColumns);
  report.AddRow(row);
  std::cout << report.Render(format);
  return kExitOk;
}

// --------------------------------------------------------- bench-quadrature

int CmdBench(const GeometryArgs& geometry_args, const std::string& format_name) {
  const EncounterGeometry g = geometry_args.Resolve();
  const Format format = ParseFormat(format_name);
  const double ref = ReferencePcol(g);
  Report report(kQuadColumns);
  for (const char* rule : {"trapezoid", "simpson", "gauss2", "gauss3", "gauss4"}) {
    for (double h : {0.5, 0.1, 0.05}) {
      report.AddRow(QuadratureRow(g, {Rule::Parse(rule), h, h}, ref));
    }
  }
  std::cout << report.Render(format);
  return kExitOk;
}

// ----------------------------------------------------------------- he-demo

struct DemoArgs {
  GeometryArgs geometry;
  int parties = 2;
  std::string mode = "table";
  std::string rule = "gauss2";
  double h = 0.5;
  std::string point;
  int n1 = 10;
  int n2 = 10;
  std::string strategy = "power";
  int reserve = 1;
  bool range_reduce = false;
  std::string preset = "desk";
  std::optional<std::uint64_t> seed;
  std::string table_sigma;
  std::vector<int> offline;
  std::string format = "md";
};

std::pair<double, double> ParsePair(const std::string& text, const char* flag) {
  std::istringstream in(text);
  double a = 0.0, b = 0.0;
  char comma = 0;
  if (!(in >> a >> comma >> b) || comma != ',' || !(in >> std::ws).eof()) {
    throw Error(ErrorCode::kInvalidInput, std::string(flag) + " expects two numbers 'a,b'");
  }
  return {a, b};
}

const std::vector<std::string> kDemoColumns = {
    "mode",       "parties",   "preset",        "rule",           "h",
    "n1",         "n2",        "y",             "phi",            "value",
    "oracle",     "truncated_oracle", "abs_error", "rel_error_percent", "deviation",
    "additions",  "multiplications", "refreshes", "rotations",      "keygen_time_s",
    "wall_time_s"};

int CmdHeDemo(const DemoArgs& a) {
  if (a.parties < 2) {
    throw Error(ErrorCode::kInvalidInput, "full-threshold decryption needs --parties >= 2");
  }
  if (a.mode != "table" && a.mode != "online") {
    throw Error(ErrorCode::kInvalidInput, "--mode must be table or online");
  }
  if (!a.point.empty() && a.mode != "online") {
    throw Error(ErrorCode::kInvalidInput, "--point requires --mode online");
  }
  const Format format = ParseFormat(a.format);
  const EncounterGeometry g = a.geometry.Resolve();
  const QuadratureSpec spec{Rule::Parse(a.rule), a.h, a.h};
  he::ApproxConfig config;
  config.n1 = a.n1;
  config.n2 = a.n2;
  config.refresh_reserve_levels = a.reserve;
  config.range_reduce = a.range_reduce;
  if (a.strategy == "horner") {
    config.strategy = he::EvalStrategy::kHorner;
  } else if (a.strategy != "power") {
    throw Error(ErrorCode::kInvalidInput, "--strategy must be power or horner");
  }
  config.Validate();
  const std::uint64_t seed = a.seed.value_or(DefaultSeed());

  const Stopwatch total;
  const auto ctx = ckks::Context::Create(ckks::GenParams(a.preset));
  threshold::InProcessDriver driver(ctx, static_cast<std::size_t>(a.parties), seed);
  for (int id : a.offline) driver.faults().offline.insert(static_cast<threshold::PartyId>(id));

  Json row;
  try {
    std::vector<long long> steps;
    for (std::size_t s : ckks::SumSlotsSteps(ctx->slots())) steps.push_back(static_cast<long long>(s));
    driver.GenerateKeys(steps);
    row["keygen_time_s"] = total.Seconds();

    he::Engine engine(driver, seed + 1);
    std::vector<he::GeometryShare> shares;
    for (const auto& s : he::SplitGeometry(g.sigma_x, g.sigma_z, a.parties, seed + 2)) {
      shares.push_back(he::EncryptGeometryShare(engine, s));
    }
    const he::EncryptedGeometry geom =
        he::CombineEncryptedShares(engine, shares, a.parties, g.combined_radius);
    engine.counter() = {};

    row["mode"] = a.mode;
    row["parties"] = a.parties;
    row["preset"] = a.preset;
    row["n1"] = a.n1;
    row["n2"] = a.n2;
    if (!a.point.empty()) {
      const auto [y, phi] = ParsePair(a.point, "--point");
      const auto yin = he::SlotInput::Encrypted(engine, {y / he::kLengthUnit});
      const auto pin = he::SlotInput::Encrypted(engine, {he::SeriesAngle(phi, config)});
      const he::Ciphertext ct = he::EvalIntegrandEncrypted(engine, geom, yin, pin, config);
      const double value = driver.Decrypt(ct)[0] / he::kLengthUnit;
      const double exact = IntegrandP(y, phi, g.sigma_x, g.sigma_z);
      const double truncated = he::IntegrandTaylor(y, phi, g.sigma_x, g.sigma_z, config, true);
      row["y"] = y;
      row["phi"] = phi;
      row["value"] = value;
      row["oracle"] = exact;
      row["truncated_oracle"] = truncated;
      row["abs_error"] = std::abs(value - exact);
      row["rel_error_percent"] = 100.0 * RelError(value, exact);
      row["deviation"] = RelError(value, truncated);
    } else {
      row["rule"] = spec.rule.Name();
      row["h"] = a.h;
      const double exact = IntegratePcol(g, spec).p_col;
      double value = 0.0;
      if (a.mode == "table") {
        double tx = g.sigma_x, tz = g.sigma_z;
        if (!a.table_sigma.empty()) std::tie(tx, tz) = ParsePair(a.table_sigma, "--table-sigma");
        he::TableStore store;
        store.Add(he::BuildLookupTable(engine, tx, tz, spec, g.combined_radius));
        engine.counter() = {};
        const he::TableSelection sel = store.Select(g.sigma_x, g.sigma_z);
        if (!sel.exact) std::cerr << "warning: " << sel.warning << "\n";
        value = driver.Decrypt(he::PcolFromTable(engine, *sel.table, spec))[0];
        row["deviation"] = RelError(value, exact);
      } else {
        const double truncated = he::PcolTaylor(g, spec, config);
        value = driver.Decrypt(he::PcolOnline(engine, geom, spec, config))[0];
        row["truncated_oracle"] = truncated;
        row["deviation"] = RelError(value, truncated);
      }
      row["value"] = value;
      row["oracle"] = exact;
      row["abs_error"] = std::abs(value - exact);
      row["rel_error_percent"] = 100.0 * RelError(value, exact);
    }
    const he::OpCounter& c = engine.counter();
    row["additions"] = c.additions;
    row["multiplications"] = c.multiplications;
    row["refreshes"] = c.refreshes;
    row["rotations"] = c.rotations;
  } catch (const Error& e) {
    if (CategoryOf(e.code()) != ErrorCategory::kProtocol) throw;
    const threshold::Session& s = driver.session();
    std::cerr << "protocol failure: " << e.what() << "\n"
              << "  session state: " << threshold::SessionStateName(s.state()) << "\n"
              << "  awaiting round: "
              << (s.expected() ? threshold::RoundTagName(*s.expected()) : "none") << "\n"
              << "  messages accepted: " << s.transcript().size() << "\n";
    return kExitProtocol;
  }
  row["wall_time_s"] = total.Seconds();
  Report report(kDemoColumns);
  report.AddRow(row);
  std::cout << report.Render(format);
  return kExitOk;
}

int ExitCodeFor(const Error& e) {
  if (e.code() == ErrorCode::kOutOfLevels) return kExitUsage;  // preset too shallow
  switch (CategoryOf(e.code())) {
    case ErrorCategory::kUsage:
      return kExitUsage;
    case ErrorCategory::kDomain:
      return kExitDomain;
    case ErrorCategory::kProtocol:
      return kExitProtocol;
    case ErrorCategory::kInternal:
      break;
  }
  return kExitInternal;
}

int Run(int argc, char** argv) {
  CLI::App app{"Satellite collision probability: quadrature, oracles and threshold CKKS demos"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", "pcol 0.1.0");

  std::string reduce_path;
  auto* reduce = app.add_subcommand("reduce", "reduce a conjunction to encounter-plane geometry");
  reduce->add_option("input", reduce_path, "conjunction JSON (pcol_input_v1)")->required();

  PcolArgs pcol_args;
  auto* pcol = app.add_subcommand("pcol", "collision probability by fixed-step quadrature");
  pcol_args.geometry.Register(pcol, true);
  pcol->add_option("--rule", pcol_args.rule, "trapezoid, simpson, gauss2..gauss8");
  pcol->add_option("--h", pcol_args.h, "set both step sizes");
  pcol->add_option("--h-r", pcol_args.h_r, "radial step [m]");
  pcol->add_option("--h-phi", pcol_args.h_phi, "angular step [rad]");
  pcol->add_option("--mc", pcol_args.mc_samples, "also run a 2-D Monte Carlo with this many samples");
  pcol->add_flag("--reference", pcol_args.reference, "compare against the converged reference");
  pcol->add_option("--seed", pcol_args.seed, "RNG seed (default: PCOL_SEED or 1)");
  pcol->add_option("--format", pcol_args.format, "csv, json or md");

  GeometryArgs bench_geometry;
  std::string bench_format = "md";
  auto* bench = app.add_subcommand("bench-quadrature", "all rule/step combinations vs the reference");
  bench_geometry.Register(bench, false);
  bench->add_option("--format", bench_format, "csv, json or md");

  DemoArgs demo;
  auto* he_demo = app.add_subcommand("he-demo", "end-to-end threshold CKKS session");
  demo.geometry.Register(he_demo, true);
  he_demo->add_option("--parties", demo.parties, "number of operators (>= 2)");
  he_demo->add_option("--mode", demo.mode, "table or online");
  he_demo->add_option("--rule", demo.rule, "quadrature rule");
  he_demo->add_option("--h", demo.h, "step size for both axes");
  he_demo->add_option("--point", demo.point, "single point evaluation 'y,phi' (online mode)");
  he_demo->add_option("--n1", demo.n1, "exp Taylor order");
  he_demo->add_option("--n2", demo.n2, "cos Taylor order");
  he_demo->add_option("--strategy", demo.strategy, "power or horner");
  he_demo->add_option("--reserve", demo.reserve, "refresh reserve levels");
  he_demo->add_flag("--range-reduce", demo.range_reduce, "reduce angles into [-pi, pi]");
  he_demo->add_option("--preset", demo.preset, "toy, desk or std-like");
  he_demo->add_option("--seed", demo.seed, "session seed (default: PCOL_SEED or 1)");
  he_demo->add_option("--table-sigma", demo.table_sigma, "build the table for 'sx,sz' instead");
  he_demo->add_option("--offline", demo.offline, "party ids that never respond (fault injection)");
  he_demo->add_option("--format", demo.format, "csv, json or md");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*reduce) return CmdReduce(reduce_path);
    if (*pcol) return CmdPcol(pcol_args);
    if (*bench) return CmdBench(bench_geometry, bench_format);
    if (*he_demo) return CmdHeDemo(demo);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace pcol::cli

int main(int argc, char** argv) { return pcol::cli::Run(argc, argv); }
