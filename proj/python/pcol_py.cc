#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "pcol/ckks/keys.h"
#include "pcol/errors.h"
#include "pcol/geometry.h"
#include "pcol/he_pipeline.h"
#include "pcol/oracle.h"
#include "pcol/quadrature.h"
#include "pcol/threshold.h"

namespace py = pybind11;

namespace pcol {
namespace {

EncounterGeometry MakeGeometry(double r, double sigma_x, double sigma_z) {
  EncounterGeometry g;
  g.combined_radius = r;
  g.sigma_x = sigma_x;
  g.sigma_z = sigma_z;
  return g;
}

QuadratureSpec MakeSpec(const std::string& rule, double h_r, double h_phi) {
  return {Rule::Parse(rule), h_r, h_phi};
}

he::SeriesKind ParseKind(const std::string& kind) {
  if (kind == "exp") return he::SeriesKind::kExp;
  if (kind == "cos") return he::SeriesKind::kCos;
  throw Error(ErrorCode::kInvalidInput, "series kind must be 'exp' or 'cos'");
}

he::ApproxConfig MakeConfig(int n1, int n2, const std::string& strategy) {
  he::ApproxConfig c;
  c.n1 = n1;
  c.n2 = n2;
  if (strategy == "horner") {
    c.strategy = he::EvalStrategy::kHorner;
  } else if (strategy != "power") {
    throw Error(ErrorCode::kInvalidInput, "strategy must be 'power' or 'horner'");
  }
  c.Validate();
  return c;
}

py::dict CounterDict(const he::OpCounter& c) {
  py::dict d;
  d["additions"] = c.additions;
  d["multiplications"] = c.multiplications;
  d["refreshes"] = c.refreshes;
  d["rotations"] = c.rotations;
  return d;
}

// A full-threshold session with collective keys, driven in process.
class ThresholdSession {
 public:
  ThresholdSession(const std::string& preset, std::size_t parties, std::uint64_t seed)
      : ctx_(ckks::Context::Create(ckks::GenParams(preset))),
        driver_(std::make_unique<threshold::InProcessDriver>(ctx_, parties, seed)),
        parties_(parties),
        seed_(seed) {
    std::vector<long long> steps;
    for (std::size_t s : ckks::SumSlotsSteps(ctx_->slots())) steps.push_back(static_cast<long long>(s));
    driver_->GenerateKeys(steps);
    engine_ = std::make_unique<he::Engine>(*driver_, seed + 1);
  }

  std::size_t slots() const { return ctx_->slots(); }
  int max_level() const { return ctx_->max_level(); }
  std::size_t refresh_count() const { return driver_->session().refresh_count(); }

  std::vector<double> RoundTrip(const std::vector<double>& values) {
    return driver_->Decrypt(driver_->Encrypt(values));
  }

  py::dict TablePcol(double r, double sx, double sz, const std::string& rule, double h) {
    const QuadratureSpec spec = MakeSpec(rule, h, h);
    const he::LookupTable table = he::BuildLookupTable(*engine_, sx, sz, spec, r);
    engine_->counter() = {};
    const double value = driver_->Decrypt(he::PcolFromTable(*engine_, table, spec))[0];
    py::dict d;
    d["p_col"] = value;
    d["counter"] = CounterDict(engine_->counter());
    return d;
  }

  py::dict OnlinePcol(double r, double sx, double sz, const std::string& rule, double h, int n1,
                      int n2, const std::string& strategy) {
    const he::ApproxConfig config = MakeConfig(n1, n2, strategy);
    const he::EncryptedGeometry geom = Geometry(r, sx, sz);
    engine_->counter() = {};
    const auto ct = he::PcolOnline(*engine_, geom, MakeSpec(rule, h, h), config);
    py::dict d;
    d["p_col"] = driver_->Decrypt(ct)[0];
    d["counter"] = CounterDict(engine_->counter());
    return d;
  }

  py::dict Point(double y, double phi, double sx, double sz, int n1, int n2,
                 const std::string& strategy) {
    const he::ApproxConfig config = MakeConfig(n1, n2, strategy);
    const he::EncryptedGeometry geom = Geometry(1.0, sx, sz);
    engine_->counter() = {};
    const auto yin = he::SlotInput::Encrypted(*engine_, {y / he::kLengthUnit});
    const auto pin = he::SlotInput::Encrypted(*engine_, {phi});
    const auto ct = he::EvalIntegrandEncrypted(*engine_, geom, yin, pin, config);
    py::dict d;
    d["value"] = driver_->Decrypt(ct)[0] / he::kLengthUnit;
    d["counter"] = CounterDict(engine_->counter());
    return d;
  }

 private:
  he::EncryptedGeometry Geometry(double r, double sx, double sz) {
    std::vector<he::GeometryShare> shares;
    for (const auto& s : he::SplitGeometry(sx, sz, parties_, seed_ + 2)) {
      shares.push_back(he::EncryptGeometryShare(*engine_, s));
    }
    return he::CombineEncryptedShares(*engine_, shares, parties_, r);
  }

  ckks::ContextPtr ctx_;
  std::unique_ptr<threshold::InProcessDriver> driver_;
  std::unique_ptr<he::Engine> engine_;
  std::size_t parties_;
  std::uint64_t seed_;
};

}  // namespace
}  // namespace pcol

PYBIND11_MODULE(_pcol, m) {
  using namespace pcol;
  m.doc() = "Collision probability quadrature and threshold CKKS pipelines";

  static py::exception<Error> error(m, "PcolError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(py::str(e.what()));
      exc.attr("code") = ErrorCodeName(e.code());
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<ObjectState>(m, "ObjectState")
      .def(py::init<>())
      .def(py::init([](const Vec3& p, const Vec3& v, const Mat3& c, double r) {
             return ObjectState{p, v, c, r};
           }),
           py::arg("position"), py::arg("velocity"), py::arg("covariance"), py::arg("radius"))
      .def_readwrite("position", &ObjectState::position)
      .def_readwrite("velocity", &ObjectState::velocity)
      .def_readwrite("covariance", &ObjectState::covariance)
      .def_readwrite("radius", &ObjectState::radius);

  py::class_<EncounterGeometry>(m, "EncounterGeometry")
      .def_readonly("combined_radius", &EncounterGeometry::combined_radius)
      .def_readonly("sigma_x", &EncounterGeometry::sigma_x)
      .def_readonly("sigma_z", &EncounterGeometry::sigma_z)
      .def_readonly("rotation_angle", &EncounterGeometry::rotation_angle)
      .def_readonly("miss_vector", &EncounterGeometry::miss_vector)
      .def_readonly("relative_speed", &EncounterGeometry::relative_speed)
      .def_readonly("warnings", &EncounterGeometry::warnings);

  m.def("reduce_conjunction", &ReduceConjunction, py::arg("s1"), py::arg("s2"));

  m.def("integrand_p", &IntegrandP, py::arg("y"), py::arg("phi"), py::arg("sigma_x"),
        py::arg("sigma_z"));

  m.def(
      "integrate_pcol",
      [](double r, double sx, double sz, const std::string& rule, double h_r, double h_phi) {
        const PcolResult res = IntegratePcol(MakeGeometry(r, sx, sz), MakeSpec(rule, h_r, h_phi));
        py::dict d;
        d["p_col"] = res.p_col;
        d["eval_count"] = res.counts.evals;
        d["addition_count"] = res.counts.additions;
        return d;
      },
      py::arg("r"), py::arg("sigma_x"), py::arg("sigma_z"), py::arg("rule") = "gauss2",
      py::arg("h_r") = 0.5, py::arg("h_phi") = 0.5);

  m.def(
      "reference_pcol",
      [](double r, double sx, double sz) { return ReferencePcol(MakeGeometry(r, sx, sz)); },
      py::arg("r"), py::arg("sigma_x"), py::arg("sigma_z"));

  m.def(
      "mc_pcol_2d",
      [](double r, double sx, double sz, std::int64_t samples, std::uint64_t seed) {
        McConfig cfg;
        cfg.samples = samples;
        cfg.rng_seed = seed;
        const McEstimate est = McPcol2d(MakeGeometry(r, sx, sz), cfg);
        return py::make_tuple(est.estimate, est.std_error);
      },
      py::arg("r"), py::arg("sigma_x"), py::arg("sigma_z"), py::arg("samples") = 1'000'000,
      py::arg("seed") = 1);

  m.def(
      "taylor_series",
      [](const std::string& kind, double x, int order) {
        return he::TaylorSeries(ParseKind(kind), x, order);
      },
      py::arg("kind"), py::arg("x"), py::arg("order"));

  m.def(
      "integrand_taylor",
      [](double y, double phi, double sx, double sz, int n1, int n2) {
        return he::IntegrandTaylor(y, phi, sx, sz, MakeConfig(n1, n2, "power"), true);
      },
      py::arg("y"), py::arg("phi"), py::arg("sigma_x"), py::arg("sigma_z"), py::arg("n1"),
      py::arg("n2"));

  py::class_<ThresholdSession>(m, "ThresholdSession")
      .def(py::init<const std::string&, std::size_t, std::uint64_t>(), py::arg("preset") = "desk",
           py::arg("parties") = 2, py::arg("seed") = 1)
      .def_property_readonly("slots", &ThresholdSession::slots)
      .def_property_readonly("max_level", &ThresholdSession::max_level)
      .def_property_readonly("refresh_count", &ThresholdSession::refresh_count)
      .def("round_trip", &ThresholdSession::RoundTrip, py::arg("values"))
      .def("table_pcol", &ThresholdSession::TablePcol, py::arg("r"), py::arg("sigma_x"),
           py::arg("sigma_z"), py::arg("rule") = "gauss2", py::arg("h") = 0.5)
      .def("online_pcol", &ThresholdSession::OnlinePcol, py::arg("r"), py::arg("sigma_x"),
           py::arg("sigma_z"), py::arg("rule") = "gauss2", py::arg("h") = 0.5,
           py::arg("n1") = 10, py::arg("n2") = 10, py::arg("strategy") = "power")
      .def("point", &ThresholdSession::Point, py::arg("y"), py::arg("phi"), py::arg("sigma_x"),
           py::arg("sigma_z"), py::arg("n1") = 10, py::arg("n2") = 10,
           py::arg("strategy") = "power");
}
