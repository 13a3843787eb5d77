"""Tests for the switching-line layer: classification, sliding, folds and canonical reduction.

Inputs: Canonical and raw Welander systems on both sides of epsilon = 0, plus hand-built
companion systems.
Outputs: Assertions on Lie derivatives, partitions, the sliding field, pseudo-equilibria, fold
visibility, equilibrium status and the Lienard homeomorphism.
"""

from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np
import pytest

from welander_filippov.dynamics import (
    AffineSystem2,
    EquilibriumKind,
    PiecewiseAffineSystem,
    Side,
    SigmaClass,
    Visibility,
    classify_sigma_point,
    equilibrium_status,
    fold_points,
    lie_derivatives,
    partition_sigma,
    pseudo_equilibria,
    sliding_bounds,
    sliding_field,
    to_lienard_canonical,
)
from welander_filippov.errors import BoundaryEquilibriumCollision, NotSlidingPoint, TangencyDegenerate
from welander_filippov.welander import WelanderParams, canonical_system, raw_system, thresholds

CompanionFactory = Callable[..., PiecewiseAffineSystem]


def test_lie_derivatives_on_the_canonical_line(reference_canonical: PiecewiseAffineSystem) -> None:
    """Left x-velocity is -y and right x-velocity is -y + B with B = 0.01."""

    left, right = lie_derivatives(reference_canonical, 0.05)

    assert left == pytest.approx(-0.05)
    assert right == pytest.approx(-0.04)


@pytest.mark.parametrize(
    ("y", "expected"),
    [
        (-0.1, SigmaClass.POSITIVE_CROSSING),
        (0.0, SigmaClass.LEFT_TANGENCY),
        (0.005, SigmaClass.ESCAPING),
        (0.01, SigmaClass.RIGHT_TANGENCY),
        (0.02, SigmaClass.NEGATIVE_CROSSING),
    ],
)
def test_classify_sigma_point(reference_canonical: PiecewiseAffineSystem, y: float, expected: SigmaClass) -> None:
    assert classify_sigma_point(reference_canonical, y) is expected


def test_partition_for_negative_epsilon_has_an_escaping_segment(reference_canonical: PiecewiseAffineSystem) -> None:
    """epsilon < 0 splits the line into crossing, escaping (0, B) and crossing intervals."""

    partition = partition_sigma(reference_canonical)

    kinds = [interval.kind for interval in partition.intervals]
    assert kinds == [SigmaClass.POSITIVE_CROSSING, SigmaClass.ESCAPING, SigmaClass.NEGATIVE_CROSSING]
    escaping = partition.intervals[1]
    assert (escaping.lower, escaping.upper) == pytest.approx((0.0, 0.01))
    assert math.isinf(partition.intervals[0].lower)
    assert [kind for _, kind in partition.tangency_points] == [SigmaClass.LEFT_TANGENCY, SigmaClass.RIGHT_TANGENCY]
    assert not partition.degenerate_field
    assert partition.intervals_of(SigmaClass.SLIDING) == []


def test_partition_for_positive_epsilon_has_a_sliding_segment(sliding_params: WelanderParams) -> None:
    partition = partition_sigma(canonical_system(sliding_params))

    sliding = partition.intervals_of(SigmaClass.SLIDING)

    assert len(sliding) == 1
    assert (sliding[0].lower, sliding[0].upper) == pytest.approx((-0.01, 0.0))
    assert sliding[0].contains(-0.005)


def test_partition_flags_a_zone_without_fold(companion: CompanionFactory) -> None:
    """A zone whose x-velocity on the line does not depend on y has no fold."""

    pws = companion((-1.5, 0.5, 0.1), (-3.5, 3.0, -0.2))
    flat = PiecewiseAffineSystem(pws.left, AffineSystem2(np.array([[-1.0, 0.0], [0.0, -2.0]]), np.array([-1.0, 0.0])))

    partition = partition_sigma(flat)

    assert partition.degenerate_field
    assert len(partition.tangency_points) == 1


def test_partition_follows_the_sign_of_epsilon_over_random_draws(rng: np.random.Generator) -> None:
    """Five hundred draws: the partition pattern is fixed by the sign of epsilon alone.

    Inputs: alpha, beta in (0.1, 3), k0 in [0, 1), k1 - k0 in (0.1, 5); epsilon is zero for
    about a third of the draws and otherwise +-(1e-3, 0.1).
    Outputs: crossing / escaping (0, B) / crossing for epsilon < 0, crossing / sliding (B, 0) /
    crossing for epsilon > 0, and two crossing intervals around a double tangency at 0 for epsilon = 0.
    """

    for _ in range(500):
        k0 = rng.uniform(0.0, 1.0)
        choice = rng.integers(3)
        epsilon = 0.0 if choice == 0 else (-1.0 if choice == 1 else 1.0) * rng.uniform(1e-3, 0.1)
        params = WelanderParams(
            alpha=rng.uniform(0.1, 3.0),
            beta=rng.uniform(0.1, 3.0),
            epsilon=epsilon,
            k0=k0,
            k1=k0 + rng.uniform(0.1, 5.0),
        )

        partition = partition_sigma(canonical_system(params))

        kinds = [interval.kind for interval in partition.intervals]
        offset = params.sigma_offset
        if epsilon == 0.0:
            assert kinds == [SigmaClass.POSITIVE_CROSSING, SigmaClass.NEGATIVE_CROSSING]
            assert partition.tangency_points == ((0.0, SigmaClass.DOUBLE_TANGENCY),)
            continue
        middle = partition.intervals[1]
        if epsilon < 0.0:
            assert kinds == [SigmaClass.POSITIVE_CROSSING, SigmaClass.ESCAPING, SigmaClass.NEGATIVE_CROSSING]
            assert middle.lower == pytest.approx(0.0, abs=1e-14)
            assert middle.upper == pytest.approx(offset, abs=1e-14)
        else:
            assert kinds == [SigmaClass.POSITIVE_CROSSING, SigmaClass.SLIDING, SigmaClass.NEGATIVE_CROSSING]
            assert middle.lower == pytest.approx(offset, abs=1e-14)
            assert middle.upper == pytest.approx(0.0, abs=1e-14)
        assert not partition.degenerate_field


def test_sliding_bounds_follow_the_sign_of_epsilon(
    reference_canonical: PiecewiseAffineSystem, sliding_params: WelanderParams
) -> None:
    assert sliding_bounds(reference_canonical) is None
    assert sliding_bounds(reference_canonical, SigmaClass.ESCAPING) == pytest.approx((0.0, 0.01))
    assert sliding_bounds(canonical_system(sliding_params)) == pytest.approx((-0.01, 0.0))


def test_sliding_field_matches_the_filippov_combination(sliding_params: WelanderParams) -> None:
    """On (B, 0) with B = -0.01 the sliding velocity is (y (a_L - a_R) - a_L B) / B.

    Inputs: epsilon = 0.01, so a_L = 0.095 and a_R = -0.23.
    Outputs: convex weight 1/2 and velocity 0.0675 at y = -0.005.
    """

    pws = canonical_system(sliding_params)

    weight, velocity = sliding_field(pws, -0.005)

    assert weight == pytest.approx(0.5)
    a_left, a_right, offset = 0.095, -0.23, -0.01
    assert velocity == pytest.approx((-0.005 * (a_left - a_right) - a_left * offset) / offset)
    assert velocity == pytest.approx(0.0675)


def test_sliding_field_rejects_crossing_points(reference_canonical: PiecewiseAffineSystem) -> None:
    with pytest.raises(NotSlidingPoint):
        sliding_field(reference_canonical, 0.5)


def test_pseudo_equilibrium_is_stable_on_the_sliding_segment(sliding_params: WelanderParams) -> None:
    found = pseudo_equilibria(canonical_system(sliding_params))

    assert len(found) == 1
    assert found[0].y == pytest.approx(0.095 * -0.01 / (0.095 + 0.23), rel=1e-12)
    assert found[0].region is SigmaClass.SLIDING
    assert found[0].stable


def test_pseudo_equilibrium_on_escaping_segment_is_unstable(reference_canonical: PiecewiseAffineSystem) -> None:
    found = pseudo_equilibria(reference_canonical)

    assert [item.region for item in found] == [SigmaClass.ESCAPING]
    assert not found[0].stable


def test_fold_points_are_invisible_when_both_equilibria_are_virtual(reference_canonical: PiecewiseAffineSystem) -> None:
    """Second Lie derivatives at the folds equal a_L = 0.105 (left) and a_R = -0.17 (right)."""

    left, right = fold_points(reference_canonical)

    assert left.side is Side.LEFT and left.location == pytest.approx((0.0, 0.0))
    assert right.side is Side.RIGHT and right.location == pytest.approx((0.0, 0.01))
    assert (left.order, right.order) == (2, 2)
    assert left.second_lie_derivative == pytest.approx(0.105)
    assert right.second_lie_derivative == pytest.approx(-0.17)
    assert left.visibility is Visibility.INVISIBLE
    assert right.visibility is Visibility.INVISIBLE


def test_left_fold_is_visible_when_its_equilibrium_is_real(real_params: WelanderParams) -> None:
    left, _ = fold_points(canonical_system(real_params))

    assert left.visibility is Visibility.VISIBLE


def test_fold_on_a_boundary_equilibrium_raises(companion: CompanionFactory) -> None:
    pws = companion((-1.5, 0.5, 0.0), (-3.5, 3.0, -0.2))

    with pytest.raises(BoundaryEquilibriumCollision):
        fold_points(pws)


def test_equilibrium_status_virtual_and_real(
    reference_params: WelanderParams, real_params: WelanderParams, reference_canonical: PiecewiseAffineSystem
) -> None:
    limits = thresholds(reference_params)
    left = equilibrium_status(reference_canonical, Side.LEFT, reference_params.alpha, limits)
    right = equilibrium_status(reference_canonical, Side.RIGHT, reference_params.alpha, limits)

    assert left.kind is EquilibriumKind.VIRTUAL
    assert right.kind is EquilibriumKind.VIRTUAL
    assert left.point[0] == pytest.approx(0.21)
    assert left.node_type == "attractor_node"

    real = equilibrium_status(
        canonical_system(real_params), Side.LEFT, real_params.alpha, thresholds(real_params)
    )
    assert real.kind is EquilibriumKind.REAL
    assert real.point[0] < 0.0


def test_threshold_and_geometric_rules_agree_on_random_draws(rng: np.random.Generator) -> None:
    """The alpha-threshold rule and the sign of x_e give the same status in both frames.

    Inputs: 200 random parameter sets with beta in (0.1, 0.9) and k1 > k0 >= 0.
    Outputs: No StatusMismatch and equal kinds across the raw and canonical frames.
    """

    for _ in range(200):
        k0 = rng.uniform(0.0, 1.0)
        params = WelanderParams(
            alpha=rng.uniform(0.05, 2.0),
            beta=rng.uniform(0.1, 0.9),
            epsilon=rng.uniform(-0.2, 0.2),
            k0=k0,
            k1=k0 + rng.uniform(0.5, 5.0),
        )
        limits = thresholds(params)
        for side in (Side.LEFT, Side.RIGHT):
            raw = equilibrium_status(raw_system(params), side, params.alpha, limits)
            canonical = equilibrium_status(canonical_system(params), side, params.alpha, limits)
            assert raw.kind is canonical.kind


def test_lienard_reduction_matches_the_closed_form_system(reference_params: WelanderParams) -> None:
    transform = to_lienard_canonical(raw_system(reference_params))
    expected = canonical_system(reference_params)

    for side in (Side.LEFT, Side.RIGHT):
        assert transform.system.zone(side).A == pytest.approx(expected.zone(side).A, abs=1e-14)
        assert transform.system.zone(side).b == pytest.approx(expected.zone(side).b, abs=1e-14)
    assert transform.b == pytest.approx(reference_params.sigma_offset)
    assert (transform.a_left, transform.a_right) == pytest.approx((0.105, -0.17))


def test_lienard_transform_conjugates_the_vector_fields(reference_params: WelanderParams, rng: np.random.Generator) -> None:
    """h maps raw orbits onto canonical orbits: M f_raw(p) = f_canonical(h(p)), and h is invertible."""

    raw = raw_system(reference_params)
    transform = to_lienard_canonical(raw)
    for point in rng.uniform(-1.0, 1.0, size=(10, 2)):
        side = Side.LEFT if point[0] <= 0.0 else Side.RIGHT
        matrix, _ = transform.branch(side)
        image = transform.apply(point)
        assert transform.system.zone(side).vector_field(image) == pytest.approx(
            matrix @ raw.zone(side).vector_field(point), abs=1e-12
        )
        assert transform.invert(image) == pytest.approx(point, abs=1e-12)
        assert image[0] == pytest.approx(point[0])


def test_lienard_reduction_needs_a_shared_coupling_sign() -> None:
    with pytest.raises(TangencyDegenerate):
        to_lienard_canonical(raw_system(WelanderParams(0.8, 1.0, -0.01, 0.0, 1.0)))
