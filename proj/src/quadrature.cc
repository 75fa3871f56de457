#include "pcol/quadrature.h"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pcol/errors.h"

namespace pcol {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Gauss-Legendre abscissae and weights on [-1, 1], 25 significant digits.
constexpr std::array<double, 2> kGl2Nodes = {-5.773502691896257645091488e-1,
                                             5.773502691896257645091488e-1};
constexpr std::array<double, 2> kGl2Weights = {1.0, 1.0};

constexpr std::array<double, 3> kGl3Nodes = {-7.745966692414833770358531e-1, 0.0,
                                             7.745966692414833770358531e-1};
constexpr std::array<double, 3> kGl3Weights = {5.555555555555555555555556e-1,
                                               8.888888888888888888888889e-1,
                                               5.555555555555555555555556e-1};

constexpr std::array<double, 4> kGl4Nodes = {
    -8.611363115940525752239465e-1, -3.399810435848562648026658e-1,
    3.399810435848562648026658e-1, 8.611363115940525752239465e-1};
constexpr std::array<double, 4> kGl4Weights = {
    3.478548451374538573730639e-1, 6.521451548625461426269361e-1,
    6.521451548625461426269361e-1, 3.478548451374538573730639e-1};

constexpr std::array<double, 5> kGl5Nodes = {
    -9.061798459386639927976269e-1, -5.384693101056830910363144e-1, 0.0,
    5.384693101056830910363144e-1, 9.061798459386639927976269e-1};
constexpr std::array<double, 5> kGl5Weights = {
    2.369268850561890875142640e-1, 4.786286704993664680412915e-1,
    5.688888888888888888888889e-1, 4.786286704993664680412915e-1,
    2.369268850561890875142640e-1};

constexpr std::array<double, 6> kGl6Nodes = {
    -9.324695142031520278123016e-1, -6.612093864662645136613996e-1,
    -2.386191860831969086305017e-1, 2.386191860831969086305017e-1,
    6.612093864662645136613996e-1,  9.324695142031520278123016e-1};
constexpr std::array<double, 6> kGl6Weights = {
    1.713244923791703450402961e-1, 3.607615730481386075698335e-1,
    4.679139345726910473898703e-1, 4.679139345726910473898703e-1,
    3.607615730481386075698335e-1, 1.713244923791703450402961e-1};

constexpr std::array<double, 7> kGl7Nodes = {
    -9.491079123427585245261897e-1, -7.415311855993944398638648e-1,
    -4.058451513773971669066064e-1, 0.0,
    4.058451513773971669066064e-1,  7.415311855993944398638648e-1,
    9.491079123427585245261897e-1};
constexpr std::array<double, 7> kGl7Weights = {
    1.294849661688696932706114e-1, 2.797053914892766679014678e-1,
    3.818300505051189449503698e-1, 4.179591836734693877551020e-1,
    3.818300505051189449503698e-1, 2.797053914892766679014678e-1,
    1.294849661688696932706114e-1};

constexpr std::array<double, 8> kGl8Nodes = {
    -9.602898564975362316835609e-1, -7.966664774136267395915539e-1,
    -5.255324099163289858177390e-1, -1.834346424956498049394761e-1,
    1.834346424956498049394761e-1,  5.255324099163289858177390e-1,
    7.966664774136267395915539e-1,  9.602898564975362316835609e-1};
constexpr std::array<double, 8> kGl8Weights = {
    1.012285362903762591525314e-1, 2.223810344533744705443560e-1,
    3.137066458778872873379622e-1, 3.626837833783619829651504e-1,
    3.626837833783619829651504e-1, 3.137066458778872873379622e-1,
    2.223810344533744705443560e-1, 1.012285362903762591525314e-1};

std::int64_t FloorRatio(double range, double step) {
  // Absorb representation error so that e.g. 5 / 0.1 counts 50 intervals.
  return static_cast<std::int64_t>(std::floor(range / step * (1.0 + 1e-12)));
}

// Composite 1-D rule over `intervals` cells of width `step` starting at 0.
AxisNodes CompositeAxis(const Rule& rule, std::int64_t intervals, double step,
                        bool simpson) {
  AxisNodes axis;
  if (rule.kind == RuleKind::kGaussLegendre) {
    const GaussLegendreRule gl = GaussLegendreTable(rule.order);
    axis.points.reserve(static_cast<std::size_t>(intervals) * gl.nodes.size());
    for (std::int64_t i = 0; i < intervals; ++i) {
      const double lo = static_cast<double>(i) * step;
      for (std::size_t a = 0; a < gl.nodes.size(); ++a) {
        axis.points.push_back(lo + 0.5 * step * (gl.nodes[a] + 1.0));
        axis.weights.push_back(0.5 * step * gl.weights[a]);
      }
    }
    return axis;
  }
  if (simpson) {
    const std::int64_t count = 2 * intervals + 1;
    for (std::int64_t j = 0; j < count; ++j) {
      axis.points.push_back(0.5 * step * static_cast<double>(j));
      double w = (j % 2 == 1) ? 4.0 : 2.0;
      if (j == 0 || j == count - 1) w = 1.0;
      axis.weights.push_back(w * step / 6.0);
    }
    return axis;
  }
  for (std::int64_t j = 0; j <= intervals; ++j) {
    axis.points.push_back(step * static_cast<double>(j));
    axis.weights.push_back((j == 0 || j == intervals) ? 0.5 * step : step);
  }
  return axis;
}

std::int64_t PointsPerCell(const Rule& rule) {
  switch (rule.kind) {
    case RuleKind::kTrapezoid: return 4;
    case RuleKind::kTrapezoidSimpson: return 6;
    case RuleKind::kGaussLegendre: return rule.order * rule.order;
  }
  return 0;
}

}  // namespace

Rule Rule::GaussLegendre(int order) {
  if (order < 2 || order > 8) {
    throw Error(ErrorCode::kInvalidInput,
                "Gauss-Legendre order must lie in [2, 8]");
  }
  return {RuleKind::kGaussLegendre, order};
}

Rule Rule::Parse(std::string_view name) {
  if (name == "trapezoid") return Trapezoid();
  if (name == "simpson" || name == "trapezoid-simpson") return TrapezoidSimpson();
  if (name.size() == 6 && name.substr(0, 5) == "gauss") {
    const int order = name[5] - '0';
    if (order >= 2 && order <= 8) return GaussLegendre(order);
  }
  throw Error(ErrorCode::kInvalidInput,
              "unknown rule '" + std::string(name) +
                  "' (expected trapezoid, simpson, gauss2..gauss8)");
}

std::string Rule::Name() const {
  switch (kind) {
    case RuleKind::kTrapezoid: return "trapezoid";
    case RuleKind::kTrapezoidSimpson: return "simpson";
    case RuleKind::kGaussLegendre: return "gauss" + std::to_string(order);
  }
  return "?";
}

GaussLegendreRule GaussLegendreTable(int order) {
  switch (order) {
    case 2: return {kGl2Nodes, kGl2Weights};
    case 3: return {kGl3Nodes, kGl3Weights};
    case 4: return {kGl4Nodes, kGl4Weights};
    case 5: return {kGl5Nodes, kGl5Weights};
    case 6: return {kGl6Nodes, kGl6Weights};
    case 7: return {kGl7Nodes, kGl7Weights};
    case 8: return {kGl8Nodes, kGl8Weights};
    default:
      throw Error(ErrorCode::kInvalidInput,
                  "Gauss-Legendre order must lie in [2, 8]");
  }
}

void CompensatedSum::Add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double IntegrandP(double y, double phi, double sigma_x, double sigma_z) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double q = c * c / (sigma_x * sigma_x) + s * s / (sigma_z * sigma_z);
  return y / (kTwoPi * sigma_x * sigma_z) * std::exp(-0.5 * y * y * q);
}

Grid MakeGrid(const QuadratureSpec& spec, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::kInvalidStep, "radius must be positive");
  }
  if (!(spec.h_r > 0.0) || !(spec.h_phi > 0.0) || !std::isfinite(spec.h_r) ||
      !std::isfinite(spec.h_phi)) {
    throw Error(ErrorCode::kInvalidStep, "step sizes must be positive");
  }
  Grid g;
  g.radial_intervals = FloorRatio(radius, spec.h_r);
  g.angular_intervals = FloorRatio(kTwoPi, spec.h_phi);
  if (g.radial_intervals < 1 || g.angular_intervals < 2) {
    std::ostringstream msg;
    msg << "grid too coarse: N=" << g.radial_intervals
        << " (need >= 1), M=" << g.angular_intervals << " (need >= 2)";
    throw Error(ErrorCode::kInvalidStep, msg.str());
  }
  g.radial_step = radius / static_cast<double>(g.radial_intervals);
  g.angular_step = kTwoPi / static_cast<double>(g.angular_intervals);
  return g;
}

AxisNodes RadialAxis(const QuadratureSpec& spec, const Grid& grid) {
  return CompositeAxis(spec.rule, grid.radial_intervals, grid.radial_step,
                       /*simpson=*/false);
}

AxisNodes AngularAxis(const QuadratureSpec& spec, const Grid& grid) {
  return CompositeAxis(spec.rule, grid.angular_intervals, grid.angular_step,
                       spec.rule.kind == RuleKind::kTrapezoidSimpson);
}

OpCounts CountOps(const QuadratureSpec& spec, double radius) {
  const Grid g = MakeGrid(spec, radius);
  const std::int64_t n = g.radial_intervals;
  const std::int64_t m = g.angular_intervals;
  OpCounts counts;
  switch (spec.rule.kind) {
    case RuleKind::kTrapezoid:
      counts.evals = (n + 1) * (m + 1);
      break;
    case RuleKind::kTrapezoidSimpson:
      counts.evals = (n + 1) * (2 * m + 1);
      break;
    case RuleKind::kGaussLegendre:
      counts.evals = static_cast<std::int64_t>(spec.rule.order) *
                     spec.rule.order * n * m;
      break;
  }
  counts.additions = PointsPerCell(spec.rule) * n * m;
  return counts;
}

NodeSet BuildNodes(const QuadratureSpec& spec, double radius) {
  NodeSet set;
  set.grid = MakeGrid(spec, radius);
  const AxisNodes radial = RadialAxis(spec, set.grid);
  const AxisNodes angular = AngularAxis(spec, set.grid);
  set.nodes.reserve(radial.points.size() * angular.points.size());
  for (std::size_t i = 0; i < radial.points.size(); ++i) {
    for (std::size_t j = 0; j < angular.points.size(); ++j) {
      set.nodes.push_back({radial.points[i], angular.points[j],
                           radial.weights[i] * angular.weights[j]});
    }
  }
  const OpCounts counts = CountOps(spec, radius);
  set.cell_count = set.grid.radial_intervals * set.grid.angular_intervals;
  set.eval_count = counts.evals;
  set.addition_count = counts.additions;
  return set;
}

PcolResult IntegratePcol(const EncounterGeometry& geometry,
                         const QuadratureSpec& spec) {
  if (!(geometry.sigma_x > 0.0) || !(geometry.sigma_z > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "sigmas must be positive");
  }
  const Grid grid = MakeGrid(spec, geometry.combined_radius);
  const AxisNodes radial = RadialAxis(spec, grid);
  const AxisNodes angular = AngularAxis(spec, grid);

  CompensatedSum total;
  for (std::size_t i = 0; i < radial.points.size(); ++i) {
    const double y = radial.points[i];
    for (std::size_t j = 0; j < angular.points.size(); ++j) {
      total.Add(radial.weights[i] * angular.weights[j] *
                IntegrandP(y, angular.points[j], geometry.sigma_x,
                           geometry.sigma_z));
    }
  }
  PcolResult result;
  result.p_col = total.Value();
  result.counts = CountOps(spec, geometry.combined_radius);
  return result;
}

double IsotropicClosedForm(double radius, double sigma) {
  return -std::expm1(-radius * radius / (2.0 * sigma * sigma));
}

}  // namespace pcol
