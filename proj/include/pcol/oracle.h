#ifndef PCOL_ORACLE_H_
#define PCOL_ORACLE_H_

#include <cstdint>

#include "pcol/geometry.h"

namespace pcol {

// Independent reference results. None of these share code paths with the
// fixed-step quadrature module.

struct McConfig {
  std::int64_t samples = 10'000'000;
  std::uint64_t rng_seed = 1;
  double window_halfwidth = 10.0;  // s, 3-D mode only
  double time_step = 1.0;          // s, 3-D mode only
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;  // binomial standard error
  std::int64_t hits = 0;
  std::int64_t samples = 0;
};

struct ReferenceResult {
  double p_col = 0.0;
  int refinements = 0;
};

// Composite order-8 Gauss-Legendre in extended precision with grid halving
// until successive results agree to 1e-15 relative. Throws NonConvergence
// after 20 refinements.
ReferenceResult ReferencePcolDetailed(const EncounterGeometry& geometry);
double ReferencePcol(const EncounterGeometry& geometry);

// Fraction of (x', z') ~ N(0, diag(sx^2, sz^2)) samples inside the disk.
McEstimate McPcol2d(const EncounterGeometry& geometry, const McConfig& config);

// Samples the relative position from N(mu1 - mu2, C1 + C2), moves it along the
// relative velocity over [-window, +window] and counts trajectories passing
// within r of the origin.
McEstimate McPcol3dLinear(const ObjectState& s1, const ObjectState& s2,
                          const McConfig& config);

}  // namespace pcol

#endif  // PCOL_ORACLE_H_
