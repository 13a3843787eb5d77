"""Welander Filippov analysis package.

Inputs: Dimensionless Welander parameters (alpha, beta, epsilon, k0, k1) or arbitrary planar
piecewise-affine systems with a vertical switching line.
Outputs: Regime classification, exact Poincare half maps, certified crossing limit cycles,
event-driven trajectories, and the CLI built on top of them.
"""

from __future__ import annotations

__all__ = ["__version__"]

__version__ = "0.1.0"
