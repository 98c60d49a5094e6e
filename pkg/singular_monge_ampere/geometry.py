"""
Geometric queries on the parametric convex domains: membership, distance
to the boundary, diameter, volume, and seeded sampling.

Every query accepts a single point of shape ``(n,)`` or a stack of points
of shape ``(m, n)`` and answers in kind.
"""
import logging
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection
from scipy.spatial.distance import pdist
from scipy.special import gamma as gamma_function

from .exceptions import DomainError
from .models import Domain

logger = logging.getLogger(__name__)


def _as_points(d, x):
    points = np.asarray(x, dtype=float)
    single = points.ndim == 1
    points = np.atleast_2d(points)
    if points.shape[-1] != d.n:
        raise DomainError('point dimension {} does not match domain dimension {}'.format(points.shape[-1], d.n))
    if not np.all(np.isfinite(points)):
        raise DomainError('points must be finite')
    return points, single


def _unwrap(values, single):
    if single:
        return values[0].item() if hasattr(values[0], 'item') else values[0]
    return values


def unit_ball_volume(n):
    return np.pi ** (n / 2.0) / gamma_function(n / 2.0 + 1.0)


def contains(d, x):
    points, single = _as_points(d, x)
    if d.kind == Domain.KIND_PARABOLA_CAP:
        rho = np.sum(points[:, :-1] ** 2, axis=1)
        s = points[:, -1] + d.gamma
        inside = (s > 0) & (s < d.t ** 2 - rho)
    elif d.kind == Domain.KIND_SPHERE_CAP:
        inside = (points[:, -1] > 0) & (np.sum(points ** 2, axis=1) < 1.0)
    elif d.kind == Domain.KIND_BALL:
        inside = np.sum(points ** 2, axis=1) < d.radius ** 2
    else:
        normals, offsets = _halfspace_arrays(d)
        inside = np.all(points @ normals.T < offsets, axis=1)
    return _unwrap(inside, single)


def _parabola_face_distance(r, s, t):
    """
    Distance from the points (r, s) of the half-plane profile to the curve
    s = t^2 - rho^2, 0 <= rho <= t. The closest point is an endpoint or a
    real root of the stationarity cubic 2 rho^3 + (1 - 2(t^2 - s)) rho - r = 0.
    """
    m = len(r)
    companion = np.zeros((m, 3, 3))
    companion[:, 0, 1] = -(1.0 - 2.0 * (t ** 2 - s)) / 2.0
    companion[:, 0, 2] = r / 2.0
    companion[:, 1, 0] = 1.0
    companion[:, 2, 1] = 1.0
    roots = np.clip(np.linalg.eigvals(companion).real, 0.0, t)
    candidates = np.concatenate([roots, np.zeros((m, 1)), np.full((m, 1), t)], axis=1)
    squared = (candidates - r[:, None]) ** 2 + (t ** 2 - candidates ** 2 - s[:, None]) ** 2
    return np.sqrt(np.min(squared, axis=1))


def dist_to_boundary(d, x):
    points, single = _as_points(d, x)
    inside = np.atleast_1d(contains(d, points))
    if not np.all(inside):
        raise DomainError('dist_to_boundary needs points inside the domain, got {}'.format(points[~inside][0]))
    if d.kind == Domain.KIND_PARABOLA_CAP:
        r = np.sqrt(np.sum(points[:, :-1] ** 2, axis=1))
        s = points[:, -1] + d.gamma
        dist = np.minimum(s, _parabola_face_distance(r, s, d.t))
    elif d.kind == Domain.KIND_SPHERE_CAP:
        dist = np.minimum(points[:, -1], 1.0 - np.sqrt(np.sum(points ** 2, axis=1)))
    elif d.kind == Domain.KIND_BALL:
        dist = d.radius - np.sqrt(np.sum(points ** 2, axis=1))
    else:
        normals, offsets = _halfspace_arrays(d)
        dist = np.min(offsets - points @ normals.T, axis=1)
    return _unwrap(dist, single)


def diameter(d):
    if d.kind == Domain.KIND_BALL:
        return 2.0 * d.radius
    if d.kind == Domain.KIND_SPHERE_CAP:
        return 2.0
    if d.kind == Domain.KIND_PARABOLA_CAP:
        # Farthest pairs lie on the arc of the axial profile; with u the
        # horizontal separation the squared distance is at most u^2 (1 + (2t - u)^2).
        t = d.t
        candidates = [2.0 * t]
        if t ** 2 >= 2.0:
            root = np.sqrt(t ** 2 - 2.0)
            candidates.extend(2.0 * t - (t + sign * root) / 2.0 for sign in (1.0, -1.0))
        return float(max(np.sqrt(u ** 2 * (1.0 + (2.0 * t - u) ** 2)) for u in candidates))
    return float(np.max(pdist(_polytope_vertices(d))))


def volume(d):
    if d.kind == Domain.KIND_BALL:
        return float(unit_ball_volume(d.n) * d.radius ** d.n)
    if d.kind == Domain.KIND_SPHERE_CAP:
        return float(unit_ball_volume(d.n) / 2.0)
    if d.kind == Domain.KIND_PARABOLA_CAP:
        return float(unit_ball_volume(d.n - 1) * d.t ** (d.n + 1) * 2.0 / (d.n + 1))
    return float(ConvexHull(_polytope_vertices(d)).volume)


def contains_origin_interior(d):
    origin = np.zeros(d.n)
    if not contains(d, origin):
        return False, None
    return True, float(dist_to_boundary(d, origin))


def bounding_box(d):
    if d.kind == Domain.KIND_PARABOLA_CAP:
        lower = np.append(np.full(d.n - 1, -d.t), -d.gamma)
        upper = np.append(np.full(d.n - 1, d.t), d.t ** 2 - d.gamma)
    elif d.kind == Domain.KIND_SPHERE_CAP:
        lower = np.append(np.full(d.n - 1, -1.0), 0.0)
        upper = np.ones(d.n)
    elif d.kind == Domain.KIND_BALL:
        lower, upper = np.full(d.n, -d.radius), np.full(d.n, d.radius)
    else:
        vertices = _polytope_vertices(d)
        lower, upper = vertices.min(axis=0), vertices.max(axis=0)
    return lower, upper


def affine_range(coefficients, d):
    """Bounds of c0 + c.x over the bounding box of ``d``, which contain its range on the closure."""
    c = np.asarray(coefficients[1:], dtype=float)
    if len(c) != d.n:
        raise DomainError('affine function of dimension {} on {}'.format(len(c), d.describe()))
    lower, upper = bounding_box(d)
    low = coefficients[0] + np.sum(np.minimum(c * lower, c * upper))
    high = coefficients[0] + np.sum(np.maximum(c * lower, c * upper))
    return float(low), float(high)


def _halfspace_arrays(d):
    return np.asarray(d.normals, dtype=float), np.asarray(d.offsets, dtype=float)


@lru_cache(maxsize=64)
def _polytope_vertices(d):
    normals, offsets = _halfspace_arrays(d)
    n = d.n
    for axis in range(n):
        for sign in (1.0, -1.0):
            objective = np.zeros(n)
            objective[axis] = -sign
            result = linprog(objective, A_ub=normals, b_ub=offsets, bounds=[(None, None)] * n)
            if result.status == 3:
                raise DomainError('half-space intersection is unbounded')
            if result.status != 0:
                raise DomainError('half-space intersection is empty')
    # Chebyshev centre: an interior point for the vertex enumeration.
    objective = np.zeros(n + 1)
    objective[-1] = -1.0
    a_ub = np.hstack([normals, np.ones((len(offsets), 1))])
    result = linprog(objective, A_ub=a_ub, b_ub=offsets, bounds=[(None, None)] * n + [(0, None)])
    if result.status != 0 or result.x[-1] <= 0:
        raise DomainError('half-space intersection has empty interior')
    hull = HalfspaceIntersection(np.hstack([normals, -offsets[:, None]]), result.x[:-1])
    return hull.intersections


def _uniform_in_ball(rng, count, dim, radius):
    directions = rng.standard_normal((count, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.random(count) ** (1.0 / dim)
    return directions * radii[:, None]


def sample_interior(d, count, rng, margin=0.0, max_rounds=1000):
    """Rejection samples from the bounding box, at least ``margin`` away from the boundary."""
    lower, upper = bounding_box(d)
    found = []
    total = 0
    for _ in range(max_rounds):
        batch = lower + (upper - lower) * rng.random((max(2 * count, 1000), d.n))
        batch = batch[np.atleast_1d(contains(d, batch))]
        if margin > 0 and len(batch):
            batch = batch[np.atleast_1d(dist_to_boundary(d, batch)) >= margin]
        found.append(batch)
        total += len(batch)
        if total >= count:
            return np.concatenate(found)[:count]
    raise DomainError('could not draw {} interior samples with margin {}'.format(count, margin))


def sample_boundary(d, count, rng):
    if d.kind == Domain.KIND_BALL:
        points = rng.standard_normal((count, d.n))
        return d.radius * points / np.linalg.norm(points, axis=1, keepdims=True)
    flat = count // 2
    curved = count - flat
    if d.kind == Domain.KIND_SPHERE_CAP:
        base = np.hstack([_uniform_in_ball(rng, flat, d.n - 1, 1.0), np.zeros((flat, 1))])
        arc = rng.standard_normal((curved, d.n))
        arc /= np.linalg.norm(arc, axis=1, keepdims=True)
        arc[:, -1] = np.abs(arc[:, -1])
        return np.vstack([base, arc])
    if d.kind == Domain.KIND_PARABOLA_CAP:
        base = np.hstack([_uniform_in_ball(rng, flat, d.n - 1, d.t), np.full((flat, 1), -d.gamma)])
        xp = _uniform_in_ball(rng, curved, d.n - 1, d.t)
        arc = np.hstack([xp, (d.t ** 2 - np.sum(xp ** 2, axis=1) - d.gamma)[:, None]])
        return np.vstack([base, arc])
    normals, offsets = _halfspace_arrays(d)
    centre = sample_interior(d, 1, rng)[0]
    directions = rng.standard_normal((count, d.n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    rates = directions @ normals.T
    slack = offsets - centre @ normals.T
    steps = np.where(rates > 0, slack / np.where(rates > 0, rates, 1.0), np.inf)
    return centre + directions * np.min(steps, axis=1)[:, None]
