"""Build the Welander convection model in its raw and canonical frames and classify its regimes.

Inputs: `WelanderParams` (alpha, beta, epsilon, k0, k1), already dimensionless.
Outputs: Raw and canonical piecewise-affine systems, the thresholds alpha^L, alpha^R and
epsilon*, the regime deciding whether a crossing limit cycle exists, the smooth and non-smooth
convection laws, and the historical parameter presets.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Any

import numpy as np

from . import config
from .dynamics.affine2d import AffineSystem2
from .dynamics.filippov import PiecewiseAffineSystem, Side
from .errors import DegenerateAlpha, InvalidParameters, NonpositiveSmoothing

logger = logging.getLogger(__name__)

PARAMETER_NAMES = ("alpha", "beta", "epsilon", "k0", "k1")


@dataclass(frozen=True, slots=True)
class WelanderParams:
    """Dimensionless Welander parameters.

    Inputs: alpha (density-temperature coupling), beta (k_S / k_T), epsilon (convection
    threshold density), k0 (weak convection rate), k1 (strong convection rate).
    Outputs: Validated immutable parameter set; `sigma_offset` is B = (k0 - k1) epsilon.
    Raises: InvalidParameters unless all values are finite, beta > 0 and k1 > k0 >= 0.
    """

    alpha: float
    beta: float
    epsilon: float
    k0: float
    k1: float

    def __post_init__(self) -> None:
        for name in PARAMETER_NAMES:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidParameters(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise InvalidParameters(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.beta <= 0.0:
            raise InvalidParameters(f"beta must be positive, got {self.beta}")
        if self.k0 < 0.0:
            raise InvalidParameters(f"k0 must be non-negative, got {self.k0}")
        if self.k1 <= self.k0:
            raise InvalidParameters(f"k1 must exceed k0, got k0={self.k0}, k1={self.k1}")

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> WelanderParams:
        """Build parameters from a mapping holding exactly the five parameter names."""

        missing = [name for name in PARAMETER_NAMES if name not in values]
        if missing:
            raise InvalidParameters(f"missing parameters: {', '.join(missing)}")
        unknown = sorted(set(values) - set(PARAMETER_NAMES))
        if unknown:
            raise InvalidParameters(f"unknown parameters: {', '.join(unknown)}")
        return cls(**{name: values[name] for name in PARAMETER_NAMES})

    @property
    def sigma_offset(self) -> float:
        return (self.k0 - self.k1) * self.epsilon

    def with_epsilon(self, epsilon: float) -> WelanderParams:
        return replace(self, epsilon=epsilon)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True, slots=True)
class Thresholds:
    alpha_L: float
    alpha_R: float
    eps_star: float


class Regime(str, Enum):
    DEGENERATE_NO_CYCLE = "degenerate_no_cycle"
    REAL_EQUILIBRIUM_NO_CYCLE = "real_equilibrium_no_cycle"
    VIRTUAL_NO_CYCLE = "virtual_no_cycle"
    UNIQUE_STABLE_CYCLE = "unique_stable_cycle"


NO_CYCLE_REASONS = {
    Regime.DEGENERATE_NO_CYCLE: "degenerate_coupling",
    Regime.REAL_EQUILIBRIUM_NO_CYCLE: "real_equilibrium",
    Regime.VIRTUAL_NO_CYCLE: "epsilon_nonnegative",
}


@dataclass(frozen=True, slots=True)
class SmoothLaw:
    """Arctan convection law of width `a`; `rescaled` maps its (0, 1) range onto (k0, k1)."""

    a: float
    rescaled: bool = True


@dataclass(frozen=True, slots=True)
class NonsmoothLaw:
    """Step convection law: k1 above the threshold density, k0 at or below it."""


ConvectionLaw = SmoothLaw | NonsmoothLaw

PRESETS: dict[str, Mapping[str, float]] = {
    "reference": config.REFERENCE_PARAMS,
    "welander_nonsmooth": config.WELANDER_NONSMOOTH_PARAMS,
    "welander_smooth": config.WELANDER_SMOOTH_PARAMS,
}


def preset(name: str) -> WelanderParams:
    """Return one of the bundled parameter sets (reference, welander_nonsmooth, welander_smooth)."""

    try:
        values = PRESETS[name]
    except KeyError as exc:
        raise InvalidParameters(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from exc
    return WelanderParams.from_mapping(values)


def coupling(params: WelanderParams) -> float:
    """Return alpha (1 - beta), the off-diagonal entry shared by both raw zones."""

    return params.alpha * (1.0 - params.beta)


def _zone_rate(params: WelanderParams, side: Side) -> float:
    return params.k0 if side is Side.LEFT else params.k1


def canonical_constant(params: WelanderParams, side: Side) -> float:
    """Return a^L (left) or a^R (right) = -alpha (k + beta) - (1 + k)(beta (epsilon - 1) + k epsilon)."""

    k = _zone_rate(params, side)
    return -params.alpha * (k + params.beta) - (1.0 + k) * (params.beta * (params.epsilon - 1.0) + k * params.epsilon)


def zone_eigenvalues(params: WelanderParams, side: Side) -> tuple[float, float]:
    """Return (lambda_i, lambda_j), the ordered pair of -k - beta and -k - 1."""

    k = _zone_rate(params, side)
    first, second = -k - params.beta, -k - 1.0
    return max(first, second), min(first, second)


def raw_system(params: WelanderParams) -> PiecewiseAffineSystem:
    """Return the model in the frame x = rho - epsilon, y = T.

    Inputs: params (WelanderParams).
    Outputs: PiecewiseAffineSystem with zones d/dt x = A x + p, where
    A = [[-k - beta, alpha (1 - beta)], [0, -1 - k]] and p = (-alpha + beta - (k + beta) epsilon, 1),
    using k0 on the left (rho <= epsilon) and k1 on the right.
    """

    def zone(k: float) -> AffineSystem2:
        matrix = np.array([[-k - params.beta, coupling(params)], [0.0, -1.0 - k]])
        forcing = np.array([-params.alpha + params.beta - (k + params.beta) * params.epsilon, 1.0])
        return AffineSystem2.from_forcing(matrix, forcing)

    return PiecewiseAffineSystem(zone(params.k0), zone(params.k1))


def canonical_system(params: WelanderParams) -> PiecewiseAffineSystem:
    """Return the Lienard canonical Welander system built from the closed-form coefficients.

    Inputs: params (WelanderParams) with alpha (1 - beta) != 0.
    Outputs: PiecewiseAffineSystem with companion zones [[-(1 + 2k + beta), -1], [(1 + k)(k + beta), 0]],
    left offset (0, a^L) and right offset (-(k0 - k1) epsilon, a^R), so that the right x-velocity on
    the switching line is -y + (k0 - k1) epsilon.
    Raises: DegenerateAlpha when alpha (1 - beta) = 0.
    """

    if coupling(params) == 0.0:
        raise DegenerateAlpha("alpha (1 - beta) = 0: the canonical reduction does not exist")

    def zone(side: Side, offset: float) -> AffineSystem2:
        k = _zone_rate(params, side)
        matrix = np.array([[-(1.0 + 2.0 * k + params.beta), -1.0], [(1.0 + k) * (k + params.beta), 0.0]])
        return AffineSystem2(matrix, np.array([offset, canonical_constant(params, side)]))

    return PiecewiseAffineSystem(zone(Side.LEFT, 0.0), zone(Side.RIGHT, -params.sigma_offset))


def thresholds(params: WelanderParams) -> Thresholds:
    """Return alpha^L, alpha^R and epsilon*.

    Inputs: params (WelanderParams).
    Outputs: Thresholds with alpha^{L,R} = -(1 + k)(beta (epsilon - 1) + k epsilon) / (k + beta) and
    epsilon* = beta (beta - 1) / ((k0 + beta)(beta + k1)).
    """

    def alpha_threshold(k: float) -> float:
        return -(1.0 + k) * (params.beta * (params.epsilon - 1.0) + k * params.epsilon) / (k + params.beta)

    eps_star = params.beta * (params.beta - 1.0) / ((params.k0 + params.beta) * (params.beta + params.k1))
    return Thresholds(alpha_threshold(params.k0), alpha_threshold(params.k1), eps_star)


def regime(params: WelanderParams) -> Regime:
    """Classify the parameter point.

    Inputs: params (WelanderParams).
    Outputs: DegenerateNoCycle when alpha (1 - beta) = 0; RealEquilibriumNoCycle when
    alpha >= alpha^L or alpha <= alpha^R; otherwise VirtualNoCycle for epsilon >= 0 and
    UniqueStableCycle for epsilon < 0.
    """

    if coupling(params) == 0.0:
        result = Regime.DEGENERATE_NO_CYCLE
    else:
        limits = thresholds(params)
        if params.alpha >= limits.alpha_L or params.alpha <= limits.alpha_R:
            result = Regime.REAL_EQUILIBRIUM_NO_CYCLE
        elif params.epsilon >= 0.0:
            result = Regime.VIRTUAL_NO_CYCLE
        else:
            result = Regime.UNIQUE_STABLE_CYCLE
    logger.info("regime for %s: %s", params.as_dict(), result.value)
    return result


def convection_rate(rho: float, law: ConvectionLaw, params: WelanderParams) -> float:
    """Return the convection coefficient k at density `rho`.

    Inputs: rho (float), law (SmoothLaw or NonsmoothLaw), params (WelanderParams).
    Outputs: float. Smooth: (1/pi) arctan((rho - epsilon)/a) + 1/2, mapped onto
    k0 + (k1 - k0) * (...) when `law.rescaled`. Nonsmooth: k1 if rho > epsilon else k0.
    Raises: NonpositiveSmoothing when a <= 0.
    """

    if isinstance(law, SmoothLaw):
        if not law.a > 0.0:
            raise NonpositiveSmoothing(f"smoothing width must be positive, got {law.a}")
        unit = math.atan((rho - params.epsilon) / law.a) / math.pi + 0.5
        if not law.rescaled:
            return unit
        return params.k0 + (params.k1 - params.k0) * unit
    return params.k1 if rho > params.epsilon else params.k0


def manifold_intercepts(params: WelanderParams) -> dict[str, dict[str, float]]:
    """Return where each zone's invariant lines meet the switching line, plus the half-map asymptotes.

    Inputs: params (WelanderParams) with alpha (1 - beta) != 0.
    Outputs: {"left": {...}, "right": {...}} with keys `y_m1` = -a/(k + 1), `y_m2` = -a/(k + beta)
    (shifted by B on the right) and `asymptote` = a / lambda_j (shifted likewise).
    """

    result = {}
    for side, shift in ((Side.LEFT, 0.0), (Side.RIGHT, params.sigma_offset)):
        k = _zone_rate(params, side)
        constant = canonical_constant(params, side)
        _, lambda_j = zone_eigenvalues(params, side)
        result[side.value] = {
            "y_m1": shift - constant / (k + 1.0),
            "y_m2": shift - constant / (k + params.beta),
            "asymptote": shift + constant / lambda_j,
        }
    return result
