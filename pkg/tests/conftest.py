"""Provide shared fixtures for the Welander test suite.

Inputs: pytest fixture machinery plus the bundled parameter presets.
Outputs: Parameter sets in the reference regimes, canonical systems, a factory for companion-form
piecewise systems and a seeded random generator.
"""

from __future__ import annotations

from collections.abc import Callable

import numpy as np
import pytest

from welander_filippov import config
from welander_filippov.dynamics import AffineSystem2, PiecewiseAffineSystem
from welander_filippov.welander import WelanderParams, canonical_system

CompanionFactory = Callable[..., PiecewiseAffineSystem]


@pytest.fixture(autouse=True)
def quiet_logging(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep the CLI log level deterministic regardless of the caller's environment."""

    monkeypatch.delenv(config.LOG_ENV_VAR, raising=False)


@pytest.fixture
def reference_params() -> WelanderParams:
    """Return the reference parameter set (alpha 0.8, beta 0.5, epsilon -0.01, k0 0, k1 1)."""

    return WelanderParams(**config.REFERENCE_PARAMS)


@pytest.fixture
def sliding_params(reference_params: WelanderParams) -> WelanderParams:
    """Same parameters with epsilon = +0.01: virtual equilibria and a sliding segment."""

    return reference_params.with_epsilon(0.01)


@pytest.fixture
def real_params(reference_params: WelanderParams) -> WelanderParams:
    """alpha = 1.2 lies above alpha^L, so the left equilibrium is real."""

    return WelanderParams(1.2, 0.5, -0.01, 0.0, 1.0)


@pytest.fixture
def reference_canonical(reference_params: WelanderParams) -> PiecewiseAffineSystem:
    return canonical_system(reference_params)


@pytest.fixture
def companion() -> CompanionFactory:
    """Build canonical systems from (trace, det, a) triples for each side.

    Inputs: left and right tuples (trace, det, a) plus the offset b of the right fold.
    Outputs: PiecewiseAffineSystem with zones d/dt x = [[tr, -1], [det, 0]] x - c, c_L = (0, a_L),
    c_R = (-b, a_R).
    """

    def build(left: tuple[float, float, float], right: tuple[float, float, float], b: float = 0.0) -> PiecewiseAffineSystem:
        def zone(trace: float, det: float, a: float, offset: float) -> AffineSystem2:
            return AffineSystem2(np.array([[trace, -1.0], [det, 0.0]]), np.array([offset, a]))

        return PiecewiseAffineSystem(zone(*left, 0.0), zone(*right, -b))

    return build


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240517)
