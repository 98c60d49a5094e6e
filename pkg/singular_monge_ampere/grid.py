"""
Masked lattice grids and the monotone wide-stencil Monge-Ampere operator.

The discrete operator at a node is the minimum, over orthogonal direction
pairs (e, e'), of the product of the positive parts of the second
differences of u along e and e'. Arms cut by the boundary are shortened to
the boundary intersection, where u = 0, and the second difference uses
the unequal-arm formula

    D u = 2 / (L+ + L-) [(u+ - u0) / L+ + (u- - u0) / L-].
"""
import logging

import numpy as np

from .exceptions import DomainError, ParameterError
from .geometry import bounding_box, contains
from .models import GridSpec

logger = logging.getLogger(__name__)

STENCIL_PAIRS = {
    1: (((1, 0), (0, 1)), ((1, 1), (-1, 1))),
    2: (((1, 0), (0, 1)), ((1, 1), (-1, 1)), ((2, 1), (-1, 2)), ((1, 2), (-2, 1))),
    3: (((1, 0), (0, 1)), ((1, 1), (-1, 1)), ((2, 1), (-1, 2)), ((1, 2), (-2, 1)),
        ((3, 1), (-1, 3)), ((1, 3), (-3, 1)), ((3, 2), (-2, 3)), ((2, 3), (-3, 2))),
}

BISECTION_STEPS = 48


def stencil_directions(stencil_width):
    if stencil_width not in STENCIL_PAIRS:
        raise ParameterError('stencil width must be one of {}, got {}'.format(sorted(STENCIL_PAIRS), stencil_width))
    return np.array(STENCIL_PAIRS[stencil_width], dtype=int)


def _boundary_crossings(d, starts, steps):
    """Bisection for the last inside parameter along starts + tau * steps, tau in (0, 1]."""
    lo = np.zeros(len(starts))
    hi = np.ones(len(starts))
    for _ in range(BISECTION_STEPS):
        mid = (lo + hi) / 2.0
        inside = np.atleast_1d(contains(d, starts + mid[:, None] * steps))
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return hi


def build_grid(d, h, stencil_width=2):
    if d.n != 2:
        raise DomainError('the grid solver is two-dimensional, got n={}'.format(d.n))
    if not h > 0:
        raise ParameterError('grid spacing h must be positive')
    directions = stencil_directions(stencil_width)

    lower, upper = bounding_box(d)
    first = np.floor(lower / h).astype(int)
    last = np.ceil(upper / h).astype(int)
    shape = tuple(int(c) for c in last - first + 1)
    ii, jj = np.meshgrid(np.arange(shape[0]), np.arange(shape[1]), indexing='ij')
    box_lattice = np.stack([ii + first[0], jj + first[1]], axis=-1)
    box_points = h * box_lattice.reshape(-1, 2).astype(float)
    mask = np.atleast_1d(contains(d, box_points)).reshape(shape)
    if not mask.any():
        raise DomainError('no lattice node of spacing {} lies inside {}'.format(h, d.describe()))

    index = np.full(shape, -1, dtype=int)
    index[mask] = np.arange(int(mask.sum()))
    local = np.argwhere(mask)
    lattice = local + first
    nodes = h * lattice.astype(float)
    size = len(nodes)

    pairs = len(directions)
    neighbors = np.full((pairs, 2, 2, size), size, dtype=int)
    arms = np.zeros((pairs, 2, 2, size))
    boundary_points = np.full((pairs, 2, 2, size, 2), np.nan)
    for p in range(pairs):
        for m in range(2):
            for side, sign in enumerate((1, -1)):
                vector = sign * directions[p, m]
                target = local + vector
                in_box = np.all((target >= 0) & (target < np.array(shape)), axis=1)
                found = np.full(size, -1)
                found[in_box] = index[target[in_box, 0], target[in_box, 1]]
                interior = found >= 0
                neighbors[p, m, side, interior] = found[interior]
                arms[p, m, side] = h * np.linalg.norm(vector)
                cut = ~interior
                if cut.any():
                    steps = np.broadcast_to(h * vector.astype(float), (int(cut.sum()), 2))
                    tau = _boundary_crossings(d, nodes[cut], steps)
                    arms[p, m, side, cut] = tau * h * np.linalg.norm(vector)
                    boundary_points[p, m, side, cut] = nodes[cut] + tau[:, None] * steps

    parity = (lattice[:, 0] % 2) * 2 + lattice[:, 1] % 2
    colors = tuple(np.flatnonzero(parity == c) for c in range(4))
    grid = GridSpec(h=float(h), lower=h * first.astype(float), shape=shape, mask=mask, index=index, nodes=nodes,
                    lattice=lattice, directions=directions, neighbors=neighbors, arms=arms,
                    boundary_points=boundary_points, colors=colors)
    logger.debug('singular_ma.grid.built domain=%s h=%g nodes=%d pairs=%d', d.describe(), h, size, pairs)
    return grid


def _extended(g, values):
    values = np.asarray(values, dtype=float)
    if values.shape != (g.size,):
        raise ParameterError('expected {} nodal values, got shape {}'.format(g.size, values.shape))
    return np.append(values, 0.0)


def directional_second_differences(g, values, nodes=None):
    """Second differences along every stencil direction, shape (pairs, 2, len(nodes))."""
    extended = _extended(g, values)
    if nodes is None:
        nodes = np.arange(g.size)
    neighbors = g.neighbors[..., nodes]
    arms = g.arms[..., nodes]
    centre = extended[nodes]
    forward = (extended[neighbors[:, :, 0]] - centre) / arms[:, :, 0]
    backward = (extended[neighbors[:, :, 1]] - centre) / arms[:, :, 1]
    return 2.0 / (arms[:, :, 0] + arms[:, :, 1]) * (forward + backward)


def ma_operator(g, values, node=None):
    """
    Discrete Monge-Ampere value at ``node`` (an index or an index array), or
    at every node when ``node`` is None.
    """
    nodes = np.arange(g.size) if node is None else np.atleast_1d(node)
    second = np.maximum(directional_second_differences(g, values, nodes), 0.0)
    result = np.min(second[:, 0] * second[:, 1], axis=0)
    if node is not None and np.ndim(node) == 0:
        return float(result[0])
    return result


def active_pairs(g, values, nodes=None):
    """Index of the direction pair attaining the minimum; the first one on ties."""
    nodes = np.arange(g.size) if nodes is None else np.atleast_1d(nodes)
    second = np.maximum(directional_second_differences(g, values, nodes), 0.0)
    return np.argmin(second[:, 0] * second[:, 1], axis=0)


def discrete_gradient(g, values):
    """
    Gradient from the axis arms of the first direction pair: centred where
    both arms are full, the unequal-arm three-point formula at cut cells.
    """
    extended = _extended(g, values)
    centre = extended[:-1]
    gradient = np.zeros((g.size, 2))
    for axis in range(2):
        forward = extended[g.neighbors[0, axis, 0]] - centre
        backward = extended[g.neighbors[0, axis, 1]] - centre
        lp, lm = g.arms[0, axis, 0], g.arms[0, axis, 1]
        gradient[:, axis] = (lm ** 2 * forward - lp ** 2 * backward) / (lp * lm * (lp + lm))
    return gradient


def discrete_affine_gap(g, values):
    """x . Du - u at every node, with the gradient of ``discrete_gradient``."""
    return np.sum(g.nodes * discrete_gradient(g, values), axis=1) - np.asarray(values, dtype=float)
