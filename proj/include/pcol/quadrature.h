#ifndef PCOL_QUADRATURE_H_
#define PCOL_QUADRATURE_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcol/geometry.h"

namespace pcol {

enum class RuleKind { kTrapezoid, kTrapezoidSimpson, kGaussLegendre };

struct Rule {
  RuleKind kind = RuleKind::kTrapezoid;
  int order = 0;  // Gauss-Legendre points per dimension and cell, 2..8

  static Rule Trapezoid() { return {RuleKind::kTrapezoid, 0}; }
  static Rule TrapezoidSimpson() { return {RuleKind::kTrapezoidSimpson, 0}; }
  static Rule GaussLegendre(int order);

  // "trapezoid", "simpson", "gauss2" .. "gauss8". Throws kInvalidInput.
  static Rule Parse(std::string_view name);
  std::string Name() const;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct QuadratureSpec {
  Rule rule;
  double h_r = 0.0;    // m
  double h_phi = 0.0;  // rad
};

// N = floor(r / h_r) radial and M = floor(2 pi / h_phi) angular intervals.
// The realized steps are stretched to r / N and 2 pi / M so that the grid
// covers [0, r] x [0, 2 pi] exactly.
struct Grid {
  std::int64_t radial_intervals = 0;
  std::int64_t angular_intervals = 0;
  double radial_step = 0.0;
  double angular_step = 0.0;

  friend bool operator==(const Grid&, const Grid&) = default;
};

struct Node {
  double y = 0.0;
  double phi = 0.0;
  double weight = 0.0;
};

// Nodes are enumerated radial-major: all angular nodes of the first radial
// node, then the second, and so on.
struct NodeSet {
  Grid grid;
  std::vector<Node> nodes;
  std::int64_t cell_count = 0;
  std::int64_t eval_count = 0;
  std::int64_t addition_count = 0;
};

struct OpCounts {
  std::int64_t evals = 0;
  std::int64_t additions = 0;
};

struct PcolResult {
  double p_col = 0.0;
  OpCounts counts;
};

// Polar integrand y / (2 pi sx sz) exp(-y^2/2 (cos^2/sx^2 + sin^2/sz^2)).
double IntegrandP(double y, double phi, double sigma_x, double sigma_z);

Grid MakeGrid(const QuadratureSpec& spec, double radius);

// One-dimensional composite node lists (positions and weights) for the
// radial and angular axes; the 2-D node set is their tensor product.
struct AxisNodes {
  std::vector<double> points;
  std::vector<double> weights;
};
AxisNodes RadialAxis(const QuadratureSpec& spec, const Grid& grid);
AxisNodes AngularAxis(const QuadratureSpec& spec, const Grid& grid);

NodeSet BuildNodes(const QuadratureSpec& spec, double radius);

// Counts without materializing nodes. Additions follow per-cell
// accumulation: each cell contributes (points per cell - 1) internal
// additions plus one accumulator addition.
OpCounts CountOps(const QuadratureSpec& spec, double radius);

PcolResult IntegratePcol(const EncounterGeometry& geometry,
                         const QuadratureSpec& spec);

// 1 - exp(-r^2 / (2 sigma^2)); exact for sigma_x == sigma_z == sigma.
double IsotropicClosedForm(double radius, double sigma);

// Gauss-Legendre nodes and weights on [-1, 1], ascending.
struct GaussLegendreRule {
  std::span<const double> nodes;
  std::span<const double> weights;
};
GaussLegendreRule GaussLegendreTable(int order);

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void Add(double x);
  double Value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace pcol

#endif  // PCOL_QUADRATURE_H_
