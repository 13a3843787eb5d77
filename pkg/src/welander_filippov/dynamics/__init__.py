"""Planar affine and Filippov building blocks.

Inputs: Imported by the Welander, Poincare and simulation layers.
Outputs: Re-exported affine-system and switching-line APIs.
"""

from __future__ import annotations

from .affine2d import (
    AffineSystem2,
    InvariantLine,
    Spectrum,
    critical_time,
    crossing_time,
    equilibrium,
    flow,
    flow_samples,
    invariant_lines,
    psi,
    spectrum,
)
from .filippov import (
    CanonicalTransform,
    EquilibriumKind,
    EquilibriumStatus,
    FoldPoint,
    PiecewiseAffineSystem,
    PseudoEquilibrium,
    Side,
    SigmaClass,
    SigmaInterval,
    SigmaPartition,
    Visibility,
    classify_sigma_point,
    equilibrium_status,
    fold_points,
    lie_derivatives,
    partition_sigma,
    pseudo_equilibria,
    second_lie_derivatives,
    sliding_bounds,
    sliding_field,
    sliding_polynomials,
    to_lienard_canonical,
)

__all__ = [
    "AffineSystem2",
    "CanonicalTransform",
    "EquilibriumKind",
    "EquilibriumStatus",
    "FoldPoint",
    "InvariantLine",
    "PiecewiseAffineSystem",
    "PseudoEquilibrium",
    "Side",
    "SigmaClass",
    "SigmaInterval",
    "SigmaPartition",
    "Spectrum",
    "Visibility",
    "classify_sigma_point",
    "critical_time",
    "crossing_time",
    "equilibrium",
    "equilibrium_status",
    "flow",
    "flow_samples",
    "fold_points",
    "invariant_lines",
    "lie_derivatives",
    "partition_sigma",
    "psi",
    "pseudo_equilibria",
    "second_lie_derivatives",
    "sliding_bounds",
    "sliding_field",
    "sliding_polynomials",
    "spectrum",
    "to_lienard_canonical",
]
