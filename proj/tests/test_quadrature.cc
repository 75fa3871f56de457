#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "pcol/errors.h"
#include "pcol/oracle.h"
#include "pcol/quadrature.h"
#include "test_util.h"

namespace pcol {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

EncounterGeometry PaperGeometry() {
  EncounterGeometry g;
  g.combined_radius = 5.0;
  g.sigma_x = 50.0;
  g.sigma_z = 25.0;
  return g;
}

QuadratureSpec Spec(Rule rule, double h) { return {rule, h, h}; }

TEST(IntegrandP, ZeroAtOriginAndPeriodic) {
  for (double phi : {0.0, 0.3, 2.0, 5.9}) {
    EXPECT_EQ(IntegrandP(0.0, phi, 50, 25), 0.0);
  }
  for (double y : {0.1, 1.0, 4.9}) {
    const double p0 = IntegrandP(y, 0.0, 50, 25);
    EXPECT_NEAR(IntegrandP(y, std::numbers::pi, 50, 25), p0, 1e-15 * p0);
    EXPECT_NEAR(IntegrandP(y, kTwoPi, 50, 25), p0, 1e-15 * p0);
  }
}

TEST(IntegrandP, KnownValue) {
  // y / (2 pi 50 25) * exp(-25 / 5000), evaluated independently.
  const double expected = 5.0 / (kTwoPi * 1250.0) * std::exp(-0.005);
  EXPECT_NEAR(IntegrandP(5.0, kTwoPi, 50, 25), expected, 1e-18);
  EXPECT_NEAR(IntegrandP(5.0, kTwoPi, 50, 25), 6.334e-4, 5e-8);
}

TEST(Rule, ParseAndName) {
  EXPECT_EQ(Rule::Parse("trapezoid"), Rule::Trapezoid());
  EXPECT_EQ(Rule::Parse("simpson"), Rule::TrapezoidSimpson());
  EXPECT_EQ(Rule::Parse("gauss3"), Rule::GaussLegendre(3));
  EXPECT_EQ(Rule::GaussLegendre(8).Name(), "gauss8");
  EXPECT_PCOL_ERROR(Rule::Parse("gauss9"), ErrorCode::kInvalidInput);
  EXPECT_PCOL_ERROR(Rule::Parse("midpoint"), ErrorCode::kInvalidInput);
  EXPECT_PCOL_ERROR(Rule::GaussLegendre(1), ErrorCode::kInvalidInput);
}

TEST(MakeGrid, FloorCountsAndStretchedSteps) {
  const Grid g = MakeGrid(Spec(Rule::Trapezoid(), 0.5), 5.0);
  EXPECT_EQ(g.radial_intervals, 10);
  EXPECT_EQ(g.angular_intervals, 12);
  EXPECT_DOUBLE_EQ(g.radial_step, 0.5);
  EXPECT_DOUBLE_EQ(g.angular_step, kTwoPi / 12);
  const Grid fine = MakeGrid(Spec(Rule::Trapezoid(), 0.1), 5.0);
  EXPECT_EQ(fine.radial_intervals, 50);
  EXPECT_EQ(fine.angular_intervals, 62);
}

TEST(MakeGrid, InvalidSteps) {
  EXPECT_PCOL_ERROR(MakeGrid(Spec(Rule::Trapezoid(), 6.0), 5.0),
                    ErrorCode::kInvalidStep);
  EXPECT_PCOL_ERROR(MakeGrid({Rule::Trapezoid(), 0.5, 4.0}, 5.0),
                    ErrorCode::kInvalidStep);
  EXPECT_PCOL_ERROR(MakeGrid({Rule::Trapezoid(), -1.0, 0.5}, 5.0),
                    ErrorCode::kInvalidStep);
}

struct CountRow {
  Rule rule;
  double h;
  std::int64_t evals;
  std::int64_t additions;
};

TEST(CountOps, PublishedCounts) {
  const std::vector<CountRow> rows = {
      {Rule::Trapezoid(), 0.5, 143, 480},
      {Rule::Trapezoid(), 0.1, 3213, 12400},
      {Rule::Trapezoid(), 0.05, 12726, 50000},
      {Rule::GaussLegendre(2), 0.5, 480, 480},
      {Rule::GaussLegendre(2), 0.1, 12400, 12400},
      {Rule::GaussLegendre(2), 0.05, 50000, 50000},
      {Rule::GaussLegendre(3), 0.5, 1080, 1080},
      {Rule::GaussLegendre(3), 0.1, 27900, 27900},
      {Rule::GaussLegendre(3), 0.05, 112500, 112500},
      {Rule::GaussLegendre(4), 0.5, 1920, 1920},
      {Rule::GaussLegendre(4), 0.1, 49600, 49600},
      {Rule::GaussLegendre(4), 0.05, 200000, 200000},
  };
  for (const CountRow& row : rows) {
    const OpCounts c = CountOps(Spec(row.rule, row.h), 5.0);
    EXPECT_EQ(c.evals, row.evals) << row.rule.Name() << " h=" << row.h;
    EXPECT_EQ(c.additions, row.additions) << row.rule.Name() << " h=" << row.h;
  }
}

TEST(CountOps, HybridUsesMinimalSimpsonNodes) {
  const OpCounts c = CountOps(Spec(Rule::TrapezoidSimpson(), 0.5), 5.0);
  EXPECT_EQ(c.evals, 11 * 25);
  EXPECT_EQ(c.additions, 6 * 10 * 12);
}

TEST(BuildNodes, CountsMatchCountOps) {
  for (Rule rule : {Rule::Trapezoid(), Rule::TrapezoidSimpson(),
                    Rule::GaussLegendre(2), Rule::GaussLegendre(5)}) {
    for (double h : {0.5, 0.1}) {
      const NodeSet set = BuildNodes(Spec(rule, h), 5.0);
      const OpCounts c = CountOps(Spec(rule, h), 5.0);
      EXPECT_EQ(set.eval_count, c.evals);
      EXPECT_EQ(set.addition_count, c.additions);
      EXPECT_EQ(static_cast<std::int64_t>(set.nodes.size()), c.evals);
    }
  }
}

TEST(BuildNodes, RadialMajorOrder) {
  const NodeSet set = BuildNodes(Spec(Rule::GaussLegendre(2), 0.5), 5.0);
  const std::int64_t per_radial = 2 * set.grid.angular_intervals;
  for (std::int64_t k = 1; k < per_radial; ++k) {
    EXPECT_EQ(set.nodes[k].y, set.nodes[0].y);
  }
  EXPECT_GT(set.nodes[per_radial].y, set.nodes[0].y);
}

TEST(GaussLegendreTable, IndependentMomentCheck) {
  for (int k = 2; k <= 8; ++k) {
    const GaussLegendreRule rule = GaussLegendreTable(k);
    ASSERT_EQ(rule.nodes.size(), static_cast<std::size_t>(k));
    for (int deg = 0; deg <= 2 * k - 1; ++deg) {
      double sum = 0.0;
      for (int i = 0; i < k; ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], deg);
      const double exact = deg % 2 == 1 ? 0.0 : 2.0 / (deg + 1);
      EXPECT_NEAR(sum, exact, 1e-15) << "k=" << k << " deg=" << deg;
    }
    // Degree 2k is not integrated exactly.
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], 2 * k);
    EXPECT_GT(std::abs(sum - 2.0 / (2 * k + 1)), 1e-6);
  }
}

// Property: every node set integrates f = 1 to the domain area.
TEST(BuildNodesProperty, WeightSumIsArea) {
  testutil::Rng rng(21);
  const std::vector<Rule> rules = {Rule::Trapezoid(), Rule::TrapezoidSimpson(),
                                   Rule::GaussLegendre(2), Rule::GaussLegendre(3),
                                   Rule::GaussLegendre(4), Rule::GaussLegendre(8)};
  for (int trial = 0; trial < 30; ++trial) {
    const double r = rng.Uniform(0.5, 20.0);
    const QuadratureSpec spec{rules[trial % rules.size()],
                              rng.Uniform(0.05, 0.5) * r, rng.Uniform(0.05, 1.5)};
    const NodeSet set = BuildNodes(spec, r);
    CompensatedSum sum;
    for (const Node& n : set.nodes) sum.Add(n.weight);
    EXPECT_NEAR(sum.Value(), kTwoPi * r, 1e-12 * kTwoPi * r);
  }
}

// Property: Gauss(k) is exact for tensor polynomials of degree <= 2k-1 per
// variable. The exact integral is computed from monomial antiderivatives.
TEST(BuildNodesProperty, GaussPolynomialExactness) {
  testutil::Rng rng(22);
  for (int trial = 0; trial < 40; ++trial) {
    const int k = static_cast<int>(rng.Int(2, 8));
    const int deg = 2 * k - 1;
    const double r = rng.Uniform(0.5, 3.0);
    std::vector<double> a(deg + 1), b(deg + 1);
    for (double& v : a) v = rng.Uniform(-1, 1);
    for (double& v : b) v = rng.Uniform(-1, 1);
    auto poly = [](const std::vector<double>& c, double x) {
      double acc = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
      return acc;
    };
    auto exact = [](const std::vector<double>& c, double upper) {
      double acc = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) {
        acc += c[i] * std::pow(upper, static_cast<double>(i + 1)) / (i + 1);
      }
      return acc;
    };
    // Angular polynomial in phi / (2 pi) keeps the magnitude bounded.
    const NodeSet set =
        BuildNodes({Rule::GaussLegendre(k), r / rng.Int(1, 4), kTwoPi / rng.Int(2, 5)}, r);
    CompensatedSum sum;
    for (const Node& n : set.nodes) {
      sum.Add(n.weight * poly(a, n.y) * poly(b, n.phi / kTwoPi));
    }
    const double truth = exact(a, r) * exact(b, 1.0) * kTwoPi;
    EXPECT_NEAR(sum.Value(), truth, 1e-10 * std::max(1.0, std::abs(truth)))
        << "k=" << k;
  }
}

TEST(IntegratePcol, IsotropicClosedForm) {
  EncounterGeometry g;
  g.combined_radius = 5.0;
  g.sigma_x = g.sigma_z = 50.0;
  const PcolResult res = IntegratePcol(g, Spec(Rule::GaussLegendre(3), 0.05));
  EXPECT_NEAR(res.p_col, 4.987520807e-3, 1e-12);
  EXPECT_NEAR(res.p_col, IsotropicClosedForm(5.0, 50.0), 1e-12);
}

TEST(IntegratePcol, VanishingRadius) {
  EncounterGeometry g = PaperGeometry();
  g.combined_radius = 1e-6;
  const PcolResult res = IntegratePcol(g, {Rule::GaussLegendre(2), 1e-6, 0.5});
  EXPECT_GE(res.p_col, 0.0);
  EXPECT_LE(res.p_col, 1e-12);
}

TEST(IsotropicClosedForm, Limits) {
  EXPECT_NEAR(IsotropicClosedForm(5.0, 50.0), 4.987520807e-3, 1e-12);
  EXPECT_NEAR(IsotropicClosedForm(1e-12, 1.0), 0.0, 1e-20);
  EXPECT_NEAR(IsotropicClosedForm(5.0, 1e9), 0.0, 1e-12);
}

TEST(IntegratePcolProperty, MonotoneRefinement) {
  const EncounterGeometry g = PaperGeometry();
  const double reference = ReferencePcol(g);
  for (Rule rule : {Rule::Trapezoid(), Rule::TrapezoidSimpson(),
                    Rule::GaussLegendre(2)}) {
    double previous = 1.0;
    for (double h : {0.5, 0.1, 0.05}) {
      const double err = std::abs(IntegratePcol(g, Spec(rule, h)).p_col - reference);
      EXPECT_LE(err, previous) << rule.Name() << " h=" << h;
      previous = err;
    }
  }
}

TEST(IntegratePcolProperty, SigmaSwapSymmetry) {
  testutil::Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    EncounterGeometry g;
    g.combined_radius = rng.Uniform(1.0, 20.0);
    g.sigma_x = rng.Uniform(5.0, 100.0);
    g.sigma_z = rng.Uniform(5.0, 100.0);
    EncounterGeometry swapped = g;
    std::swap(swapped.sigma_x, swapped.sigma_z);
    for (Rule rule : {Rule::Trapezoid(), Rule::GaussLegendre(3)}) {
      // Angular steps dividing pi/2 keep the node set symmetric under the swap.
      const QuadratureSpec spec{rule, g.combined_radius / 10, kTwoPi / 16};
      const double a = IntegratePcol(g, spec).p_col;
      const double b = IntegratePcol(swapped, spec).p_col;
      EXPECT_NEAR(a, b, 1e-12 * a);
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
    }
  }
}

}  // namespace
}  // namespace pcol
