"""Satellite collision probability: quadrature, reference oracles and
threshold CKKS pipelines (bindings to the C++ core)."""

from ._pcol import (
    EncounterGeometry,
    ObjectState,
    PcolError,
    ThresholdSession,
    integrand_p,
    integrand_taylor,
    integrate_pcol,
    mc_pcol_2d,
    reduce_conjunction,
    reference_pcol,
    taylor_series,
)

__all__ = [
    "EncounterGeometry",
    "ObjectState",
    "PcolError",
    "ThresholdSession",
    "integrand_p",
    "integrand_taylor",
    "integrate_pcol",
    "mc_pcol_2d",
    "reduce_conjunction",
    "reference_pcol",
    "taylor_series",
]
