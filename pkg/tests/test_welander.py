"""Tests for the Welander model layer.

Inputs: The reference parameter set, its sliding and real-equilibrium variants, and invalid values.
Outputs: Assertions on validation, thresholds, regimes, canonical constants, convection laws and
invariant-manifold intercepts.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from welander_filippov.dynamics import Side, invariant_lines
from welander_filippov.errors import DegenerateAlpha, InvalidParameters, NonpositiveSmoothing
from welander_filippov.welander import (
    NO_CYCLE_REASONS,
    NonsmoothLaw,
    Regime,
    SmoothLaw,
    WelanderParams,
    canonical_constant,
    canonical_system,
    convection_rate,
    coupling,
    manifold_intercepts,
    preset,
    raw_system,
    regime,
    thresholds,
    zone_eigenvalues,
)


@pytest.mark.parametrize(
    "values",
    [
        {"alpha": 0.8, "beta": 0.0, "epsilon": 0.0, "k0": 0.0, "k1": 1.0},
        {"alpha": 0.8, "beta": 0.5, "epsilon": 0.0, "k0": 1.0, "k1": 1.0},
        {"alpha": 0.8, "beta": 0.5, "epsilon": 0.0, "k0": -0.1, "k1": 1.0},
        {"alpha": math.nan, "beta": 0.5, "epsilon": 0.0, "k0": 0.0, "k1": 1.0},
        {"alpha": True, "beta": 0.5, "epsilon": 0.0, "k0": 0.0, "k1": 1.0},
        {"alpha": "0.8", "beta": 0.5, "epsilon": 0.0, "k0": 0.0, "k1": 1.0},
    ],
)
def test_invalid_parameters_are_rejected(values: dict[str, object]) -> None:
    with pytest.raises(InvalidParameters):
        WelanderParams.from_mapping(values)


def test_from_mapping_reports_missing_and_unknown_names() -> None:
    with pytest.raises(InvalidParameters, match="missing parameters: k1"):
        WelanderParams.from_mapping({"alpha": 0.8, "beta": 0.5, "epsilon": 0.0, "k0": 0.0})
    with pytest.raises(InvalidParameters, match="unknown parameters: gamma"):
        WelanderParams.from_mapping({"alpha": 0.8, "beta": 0.5, "epsilon": 0.0, "k0": 0.0, "k1": 1.0, "gamma": 1})


def test_integers_are_stored_as_floats() -> None:
    params = WelanderParams(1, 0.5, 0, 0, 1)

    assert isinstance(params.alpha, float)
    assert params.as_dict() == {"alpha": 1.0, "beta": 0.5, "epsilon": 0.0, "k0": 0.0, "k1": 1.0}


def test_reference_thresholds(reference_params: WelanderParams) -> None:
    """alpha^L = 1 - epsilon, alpha^R = 2/3 - 2 epsilon and epsilon* = -1/3 for the reference set."""

    limits = thresholds(reference_params)

    assert limits.alpha_L == pytest.approx(1.01, rel=1e-14)
    assert limits.alpha_R == pytest.approx(2.0 / 3.0 + 0.02, rel=1e-14)
    assert limits.eps_star == pytest.approx(-1.0 / 3.0, rel=1e-14)
    assert reference_params.sigma_offset == pytest.approx(0.01)


def test_reference_canonical_constants_and_eigenvalues(reference_params: WelanderParams) -> None:
    assert canonical_constant(reference_params, Side.LEFT) == pytest.approx(0.105, rel=1e-14)
    assert canonical_constant(reference_params, Side.RIGHT) == pytest.approx(-0.17, rel=1e-14)
    assert zone_eigenvalues(reference_params, Side.LEFT) == (-0.5, -1.0)
    assert zone_eigenvalues(reference_params, Side.RIGHT) == (-1.5, -2.0)


def test_canonical_system_has_companion_zones(reference_params: WelanderParams) -> None:
    system = canonical_system(reference_params)

    assert system.left.A.tolist() == [[-1.5, -1.0], [0.5, 0.0]]
    assert system.right.A.tolist() == [[-3.5, -1.0], [3.0, 0.0]]
    assert system.right.b == pytest.approx([-0.01, -0.17])


def test_canonical_system_needs_coupling() -> None:
    params = WelanderParams(0.0, 0.5, -0.01, 0.0, 1.0)

    assert coupling(params) == 0.0
    with pytest.raises(DegenerateAlpha):
        canonical_system(params)


def test_raw_system_field_matches_the_model_equations(reference_params: WelanderParams) -> None:
    """d/dt x = -(k + beta) x + alpha (1 - beta) y - alpha + beta - (k + beta) epsilon, d/dt y = 1 - (1 + k) y."""

    system = raw_system(reference_params)
    x, y = -0.3, 0.7
    for side, k in ((Side.LEFT, 0.0), (Side.RIGHT, 1.0)):
        expected_x = -(k + 0.5) * x + 0.4 * y - 0.8 + 0.5 - (k + 0.5) * -0.01
        expected_y = 1.0 - (1.0 + k) * y
        assert system.zone(side).vector_field((x, y)) == pytest.approx([expected_x, expected_y])


@pytest.mark.parametrize(
    ("alpha", "beta", "epsilon", "expected"),
    [
        (0.8, 0.5, -0.01, Regime.UNIQUE_STABLE_CYCLE),
        (0.8, 0.5, 0.0, Regime.VIRTUAL_NO_CYCLE),
        (0.8, 0.5, 0.01, Regime.VIRTUAL_NO_CYCLE),
        (1.2, 0.5, -0.01, Regime.REAL_EQUILIBRIUM_NO_CYCLE),
        (0.5, 0.5, -0.01, Regime.REAL_EQUILIBRIUM_NO_CYCLE),
        (0.8, 1.0, -0.01, Regime.DEGENERATE_NO_CYCLE),
        (0.0, 0.5, -0.01, Regime.DEGENERATE_NO_CYCLE),
    ],
)
def test_regime_classification(alpha: float, beta: float, epsilon: float, expected: Regime) -> None:
    assert regime(WelanderParams(alpha, beta, epsilon, 0.0, 1.0)) is expected


def test_every_no_cycle_regime_has_a_reason() -> None:
    assert set(NO_CYCLE_REASONS) == set(Regime) - {Regime.UNIQUE_STABLE_CYCLE}


def test_regime_sign_of_epsilon_decides_between_virtual_regimes(rng: np.random.Generator) -> None:
    """Between the alpha thresholds only the sign of epsilon matters."""

    for _ in range(50):
        epsilon = rng.uniform(-0.05, 0.05)
        params = WelanderParams(0.8, 0.5, epsilon, 0.0, 1.0)
        expected = Regime.UNIQUE_STABLE_CYCLE if epsilon < 0.0 else Regime.VIRTUAL_NO_CYCLE
        assert regime(params) is expected


def test_nonsmooth_convection_law(reference_params: WelanderParams) -> None:
    law = NonsmoothLaw()

    assert convection_rate(reference_params.epsilon + 1e-9, law, reference_params) == 1.0
    assert convection_rate(reference_params.epsilon, law, reference_params) == 0.0


def test_smooth_convection_law_is_centred_on_the_threshold(reference_params: WelanderParams) -> None:
    k0, k1 = 0.0, 1.0
    params = WelanderParams(0.8, 0.5, -0.01, 0.25, 2.25)

    assert convection_rate(params.epsilon, SmoothLaw(1e-3), params) == pytest.approx(1.25)
    assert convection_rate(params.epsilon, SmoothLaw(1e-3, rescaled=False), params) == pytest.approx(0.5)
    assert convection_rate(reference_params.epsilon + 1.0, SmoothLaw(1e-3), reference_params) == pytest.approx(k1, abs=1e-3)
    assert convection_rate(reference_params.epsilon - 1.0, SmoothLaw(1e-3), reference_params) == pytest.approx(k0, abs=1e-3)


def test_smooth_convection_law_needs_positive_width(reference_params: WelanderParams) -> None:
    with pytest.raises(NonpositiveSmoothing):
        convection_rate(0.0, SmoothLaw(0.0), reference_params)


def test_manifold_intercepts_match_the_invariant_lines(reference_params: WelanderParams) -> None:
    """Intercepts with x = 0 coincide with the invariant lines of the canonical zones."""

    intercepts = manifold_intercepts(reference_params)
    system = canonical_system(reference_params)

    assert intercepts["left"]["asymptote"] == pytest.approx(-0.105)
    assert intercepts["right"]["asymptote"] == pytest.approx(0.095)
    for side in (Side.LEFT, Side.RIGHT):
        lines = invariant_lines(system.zone(side))
        expected = sorted(line.intercept for line in lines)
        found = sorted((intercepts[side.value]["y_m1"], intercepts[side.value]["y_m2"]))
        assert found == pytest.approx(expected, abs=1e-14)


def test_presets_build_valid_parameters() -> None:
    assert preset("reference") == WelanderParams(0.8, 0.5, -0.01, 0.0, 1.0)
    assert preset("welander_smooth").epsilon == pytest.approx(-1.0 / 30.0)
    assert preset("welander_nonsmooth").k1 == 5.0
    with pytest.raises(InvalidParameters, match="unknown preset"):
        preset("missing")
