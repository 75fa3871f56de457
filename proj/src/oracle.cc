#include "pcol/oracle.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include "pcol/errors.h"
#include "pcol/philox.h"

namespace pcol {
namespace {

constexpr int kOrder = 8;
constexpr int kMaxRefinements = 20;
constexpr std::int64_t kBatch = 1 << 20;

struct LongRule {
  std::array<long double, kOrder> nodes;
  std::array<long double, kOrder> weights;
};

// Legendre roots by Newton iteration in extended precision.
LongRule ComputeRule() {
  LongRule rule{};
  const long double pi = std::numbers::pi_v<long double>;
  for (int i = 0; i < kOrder; ++i) {
    long double x = std::cos(pi * (i + 0.75L) / (kOrder + 0.5L));
    long double dp = 0.0L;
    for (int iter = 0; iter < 100; ++iter) {
      long double p0 = 1.0L, p1 = x;
      for (int n = 1; n < kOrder; ++n) {
        const long double p2 = ((2 * n + 1) * x * p1 - n * p0) / (n + 1);
        p0 = p1;
        p1 = p2;
      }
      dp = kOrder * (x * p1 - p0) / (x * x - 1.0L);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-19L) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0L / ((1.0L - x * x) * dp * dp);
  }
  return rule;
}

const LongRule& Rule8() {
  static const LongRule rule = ComputeRule();
  return rule;
}

long double Integrate(long double r, long double sx, long double sz,
                      std::int64_t radial, std::int64_t angular) {
  const LongRule& rule = Rule8();
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  const long double hr = r / radial;
  const long double hp = two_pi / angular;

  std::vector<long double> cos2, sin2, wphi;
  cos2.reserve(angular * kOrder);
  for (std::int64_t j = 0; j < angular; ++j) {
    for (int b = 0; b < kOrder; ++b) {
      const long double phi = (j + 0.5L * (rule.nodes[b] + 1.0L)) * hp;
      const long double c = std::cos(phi), s = std::sin(phi);
      cos2.push_back(c * c / (sx * sx));
      sin2.push_back(s * s / (sz * sz));
      wphi.push_back(0.5L * hp * rule.weights[b]);
    }
  }
  long double total = 0.0L;
  for (std::int64_t i = 0; i < radial; ++i) {
    for (int a = 0; a < kOrder; ++a) {
      const long double y = (i + 0.5L * (rule.nodes[a] + 1.0L)) * hr;
      const long double wy = 0.5L * hr * rule.weights[a];
      long double inner = 0.0L;
      for (std::size_t k = 0; k < cos2.size(); ++k) {
        inner += wphi[k] * std::exp(-0.5L * y * y * (cos2[k] + sin2[k]));
      }
      total += wy * y * inner;
    }
  }
  return total / (two_pi * sx * sz);
}

template <typename SampleBatch>
McEstimate RunBatches(const McConfig& config, SampleBatch&& batch_fn) {
  if (config.samples < 10'000) {
    throw Error(ErrorCode::kInvalidInput, "Monte-Carlo needs >= 1e4 samples");
  }
  const std::int64_t batches = (config.samples + kBatch - 1) / kBatch;
  std::vector<std::int64_t> hits(static_cast<std::size_t>(batches), 0);
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());

  auto run = [&](unsigned worker) {
    for (std::int64_t b = worker; b < batches; b += workers) {
      const std::int64_t count =
          std::min(kBatch, config.samples - b * kBatch);
      Philox4x32 rng(config.rng_seed, static_cast<std::uint64_t>(b));
      hits[static_cast<std::size_t>(b)] = batch_fn(rng, count);
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }

  McEstimate est;
  est.samples = config.samples;
  for (std::int64_t h : hits) est.hits += h;
  const double n = static_cast<double>(config.samples);
  est.estimate = static_cast<double>(est.hits) / n;
  est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / n);
  return est;
}

}  // namespace

ReferenceResult ReferencePcolDetailed(const EncounterGeometry& geometry) {
  if (!(geometry.combined_radius > 0.0) || !(geometry.sigma_x > 0.0) ||
      !(geometry.sigma_z > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "geometry must have positive r and sigmas");
  }
  const long double r = geometry.combined_radius;
  const long double sx = geometry.sigma_x;
  const long double sz = geometry.sigma_z;
  std::int64_t radial = 1, angular = 4;
  long double previous = Integrate(r, sx, sz, radial, angular);
  for (int k = 1; k <= kMaxRefinements; ++k) {
    radial *= 2;
    angular *= 2;
    const long double current = Integrate(r, sx, sz, radial, angular);
    if (std::abs(current - previous) <= 1e-15L * std::abs(current)) {
      return {static_cast<double>(current), k};
    }
    previous = current;
  }
  throw Error(ErrorCode::kNonConvergence,
              "reference quadrature did not converge in 20 refinements");
}

double ReferencePcol(const EncounterGeometry& geometry) {
  return ReferencePcolDetailed(geometry).p_col;
}

McEstimate McPcol2d(const EncounterGeometry& geometry, const McConfig& config) {
  const double sx = geometry.sigma_x;
  const double sz = geometry.sigma_z;
  const double r2 = geometry.combined_radius * geometry.combined_radius;
  return RunBatches(config, [&](Philox4x32& rng, std::int64_t count) {
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < count; ++i) {
      const auto z = rng.NormalPair();
      const double x = sx * z[0];
      const double y = sz * z[1];
      if (x * x + y * y <= r2) ++hits;
    }
    return hits;
  });
}

McEstimate McPcol3dLinear(const ObjectState& s1, const ObjectState& s2,
                          const McConfig& config) {
  ValidateObjectState(s1);
  ValidateObjectState(s2);
  if (!(config.window_halfwidth > 0.0) || !(config.time_step > 0.0) ||
      !(config.time_step < config.window_halfwidth)) {
    throw Error(ErrorCode::kInvalidInput,
                "need 0 < time_step < window_halfwidth");
  }
  const Vec3 v = s1.velocity - s2.velocity;
  const double v2 = v.squaredNorm();
  if (std::sqrt(v2) < kMinRelativeSpeed) {
    throw Error(ErrorCode::kZeroRelativeVelocity,
                "relative velocity below 1e-9 m/s");
  }
  const Vec3 mean = s1.position - s2.position;
  const Mat3 cov = s1.covariance + s2.covariance;
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Mat3 factor = eig.eigenvectors() *
                      eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const double r = s1.radius + s2.radius;
  const double r2 = r * r;
  const double window = config.window_halfwidth;

  return RunBatches(config, [&](Philox4x32& rng, std::int64_t count) {
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < count; ++i) {
      const auto a = rng.NormalPair();
      const auto b = rng.NormalPair();
      const Vec3 x0 = mean + factor * Vec3(a[0], a[1], b[0]);
      // Closest approach of x0 + v t to the origin, restricted to the window.
      const double t = std::clamp(-x0.dot(v) / v2, -window, window);
      if ((x0 + t * v).squaredNorm() <= r2) ++hits;
    }
    return hits;
  });
}

}  // namespace pcol
