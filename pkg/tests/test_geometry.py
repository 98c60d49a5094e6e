import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from singular_monge_ampere.exceptions import DomainError
from singular_monge_ampere.geometry import (
    bounding_box, contains, contains_origin_interior, diameter,
    dist_to_boundary, sample_boundary, sample_interior, volume,
)
from singular_monge_ampere.models import Domain

SQUARE = Domain.halfspaces([(1, 0), (-1, 0), (0, 1), (0, -1)], [1, 1, 1, 1])

coordinate = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)


def test_parabola_cap_membership():
    cap = Domain.parabola_cap()
    assert contains(cap, [0.0, 0.5])
    assert not contains(cap, [0.0, 1.0])
    assert contains(cap, [0.9, 0.1])
    assert not contains(cap, [0.9, 0.2])
    assert not contains(cap, [0.0, 0.0])
    np.testing.assert_array_equal(contains(cap, [[0.0, 0.5], [0.0, -0.1]]), [True, False])


def test_shifted_parabola_cap_contains_origin():
    assert contains(Domain.parabola_cap(gamma=0.5), [0.0, 0.0])
    assert not contains(Domain.parabola_cap(gamma=0.0), [0.0, 0.0])


def test_distances_on_closed_forms():
    assert dist_to_boundary(Domain.parabola_cap(), [0.0, 0.1]) == pytest.approx(0.1)
    assert dist_to_boundary(Domain.ball(), [0.5, 0.0]) == pytest.approx(0.5)
    assert dist_to_boundary(Domain.sphere_cap(), [0.0, 0.5]) == pytest.approx(0.5)
    assert dist_to_boundary(SQUARE, [0.25, -0.5]) == pytest.approx(0.5)


def test_parabola_face_distance_matches_dense_curve():
    cap = Domain.parabola_cap(t=1.5)
    points = np.array([[0.0, 1.8], [0.7, 1.2], [-1.2, 0.5], [0.3, 0.05]])
    r = np.linspace(-1.5, 1.5, 300001)
    curve = np.column_stack([r, 2.25 - r ** 2])
    for point, dist in zip(points, dist_to_boundary(cap, points)):
        brute = min(np.min(np.linalg.norm(curve - point, axis=1)), point[1])
        assert dist == pytest.approx(brute, abs=1e-6)


def test_dist_to_boundary_rejects_outside_points():
    with pytest.raises(DomainError):
        dist_to_boundary(Domain.ball(), [2.0, 0.0])


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        contains(Domain.ball(n=3), [0.0, 0.0])


def test_invalid_domains():
    with pytest.raises(DomainError):
        Domain.parabola_cap(t=0.0)
    with pytest.raises(DomainError):
        Domain.ball(radius=-1.0)
    with pytest.raises(DomainError):
        Domain.halfspaces([(2, 0), (-1, 0), (0, 1)], [1, 1, 1])


def test_diameters():
    assert diameter(Domain.ball(radius=2.0)) == pytest.approx(4.0)
    assert diameter(Domain.sphere_cap()) == pytest.approx(2.0)
    assert diameter(Domain.parabola_cap()) == pytest.approx(2.0)
    assert diameter(SQUARE) == pytest.approx(2.0 * math.sqrt(2.0))


def test_wide_parabola_cap_diameter_exceeds_base(rng):
    cap = Domain.parabola_cap(t=2.0)
    diam = diameter(cap)
    assert diam > 4.0
    points = sample_boundary(cap, 1000, rng)
    gaps = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    assert np.max(gaps) <= diam + 1e-12


def test_unbounded_halfspaces():
    strip = Domain.halfspaces([(1, 0), (-1, 0), (0, 1)], [1, 1, 1])
    with pytest.raises(DomainError):
        diameter(strip)


def test_volumes():
    assert volume(Domain.parabola_cap()) == pytest.approx(4.0 / 3.0)
    assert volume(Domain.ball()) == pytest.approx(math.pi)
    assert volume(Domain.sphere_cap(n=3)) == pytest.approx(2.0 * math.pi / 3.0)
    assert volume(SQUARE) == pytest.approx(4.0)


def test_contains_origin_interior():
    assert contains_origin_interior(Domain.parabola_cap(gamma=0.5)) == (True, pytest.approx(0.5))
    assert contains_origin_interior(Domain.parabola_cap()) == (False, None)
    assert contains_origin_interior(SQUARE) == (True, pytest.approx(1.0))


def test_bounding_box_encloses_samples(rng):
    cap = Domain.parabola_cap(t=1.5, gamma=0.25, n=3)
    lower, upper = bounding_box(cap)
    points = sample_interior(cap, 500, rng)
    assert np.all(points >= lower) and np.all(points <= upper)


def test_sample_interior_respects_margin(rng):
    cap = Domain.parabola_cap()
    points = sample_interior(cap, 300, rng, margin=0.05)
    assert points.shape == (300, 2)
    assert np.all(contains(cap, points))
    assert np.all(dist_to_boundary(cap, points) >= 0.05)


def test_sampling_is_seeded():
    first = sample_interior(Domain.sphere_cap(), 50, np.random.default_rng(7))
    second = sample_interior(Domain.sphere_cap(), 50, np.random.default_rng(7))
    np.testing.assert_array_equal(first, second)


def test_boundary_samples_lie_on_the_boundary(rng):
    ball = Domain.ball(radius=1.5, n=3)
    np.testing.assert_allclose(np.linalg.norm(sample_boundary(ball, 100, rng), axis=1), 1.5)
    cap = Domain.parabola_cap(t=1.0, gamma=0.25)
    points = sample_boundary(cap, 100, rng)
    on_flat = np.isclose(points[:, 1], -0.25)
    on_arc = np.isclose(points[:, 1] + 0.25, 1.0 - points[:, 0] ** 2)
    assert np.all(on_flat | on_arc)
    square_points = sample_boundary(SQUARE, 100, rng)
    np.testing.assert_allclose(np.max(np.abs(square_points), axis=1), 1.0)


@given(coordinate, coordinate, coordinate, coordinate)
def test_distance_is_one_lipschitz(x1, x2, y1, y2):
    ball = Domain.ball()
    x, y = np.array([x1, x2]), np.array([y1, y2])
    assume(contains(ball, x) and contains(ball, y))
    assert abs(dist_to_boundary(ball, x) - dist_to_boundary(ball, y)) <= np.linalg.norm(x - y) + 1e-12


@given(coordinate, st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
def test_parabola_cap_is_convex_along_segments_to_apex(x1, x2):
    cap = Domain.parabola_cap()
    point = np.array([x1, x2])
    assume(contains(cap, point))
    apex = np.array([0.0, 0.5])
    for weight in np.linspace(0.0, 1.0, 11):
        assert contains(cap, weight * point + (1.0 - weight) * apex)
