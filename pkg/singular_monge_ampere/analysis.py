"""
Quantitative checks on barriers and discrete solutions: boundary exponent
fits, the bootstrap recurrence for the degenerate equation, comparison and
sandwich checks, sup-norm bounds and the degeneracy rate of the
affine-sphere right-hand side.
"""
import logging

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import linregress

from . import barriers
from .exceptions import EvaluationError, FitError, ParameterError, PositivityError, SingularSetError
from .geometry import affine_range, diameter, dist_to_boundary, sample_interior, volume
from .grid import discrete_affine_gap
from .models import Barrier, BootstrapTrace, DiscreteSolution, FitResult

logger = logging.getLogger(__name__)

DEFAULT_BARRIER_WINDOW = (1e-3, 5e-2)
LINEAR_FIT_BOUNDS = (1e-3, 1.0 - 1e-3)
MIXC_TOLERANCE = 0.15


def default_window(h):
    return (4.0 * h, 0.1)


def _window_samples(samples, window):
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 2:
        raise FitError('samples must be (dist, |u|) pairs')
    dist, magnitude = samples[:, 0], samples[:, 1]
    if window is not None:
        keep = (dist >= window[0]) & (dist <= window[1])
        dist, magnitude = dist[keep], magnitude[keep]
    if len(dist) < 5:
        raise FitError('a fit needs at least 5 samples in the window, got {}'.format(len(dist)))
    if np.any(dist <= 0) or np.any(magnitude <= 0):
        raise FitError('distances and values must be positive for a log-log fit')
    window = tuple(window) if window is not None else (float(dist.min()), float(dist.max()))
    return dist, magnitude, window


def _r_squared(observed, fitted):
    total = float(np.sum((observed - observed.mean()) ** 2))
    if total == 0:
        return 1.0
    return float(min(1.0, max(0.0, 1.0 - np.sum((observed - fitted) ** 2) / total)))


def fit_exponent(samples, window=None):
    """
    Least-squares line through (log dist, log |u|) for the samples whose
    distance lies in ``window``.
    """
    dist, magnitude, window = _window_samples(samples, window)
    result = linregress(np.log(dist), np.log(magnitude))
    return FitResult(slope=float(result.slope), intercept=float(result.intercept),
                     r_squared=float(min(1.0, result.rvalue ** 2)), window=window, n_points=len(dist))


def fit_exponent_linear(samples, window=None):
    """
    Fit of |u| = A dist^alpha + B dist with alpha in (0, 1): the leading
    power law together with the linear term that supersolutions and
    solutions carry next to it. ``slope`` is alpha, ``intercept`` is log A
    and ``linear`` is B. Raises FitError when A dist^alpha is less than
    half of |u| at the nearest sample.
    """
    dist, magnitude, window = _window_samples(samples, window)
    ones = np.ones(len(dist))

    def coefficients(alpha):
        design = np.column_stack([dist ** alpha, dist]) / magnitude[:, None]
        solution = np.linalg.lstsq(design, ones, rcond=None)[0]
        return solution, design

    def misfit(alpha):
        solution, design = coefficients(alpha)
        return float(np.sum((design @ solution - 1.0) ** 2))

    result = minimize_scalar(misfit, bounds=LINEAR_FIT_BOUNDS, method='bounded', options={'xatol': 1e-10})
    alpha = float(result.x)
    (A, B), _ = coefficients(alpha)
    fitted = A * dist ** alpha + B * dist
    nearest = int(np.argmin(dist))
    if not A > 0 or np.any(fitted <= 0) or A * dist[nearest] ** alpha < 0.5 * magnitude[nearest]:
        raise FitError('the profile has no leading power law in the window')
    return FitResult(slope=alpha, intercept=float(np.log(A)), r_squared=_r_squared(np.log(magnitude), np.log(fitted)),
                     window=window, n_points=len(dist), linear=float(B))


def fit_exponent_drift(samples, window=None):
    """
    Least squares of log |u| = slope log dist + intercept + c dist, for
    profiles whose power law is modulated by a factor smooth in dist.
    ``linear`` is c.
    """
    dist, magnitude, window = _window_samples(samples, window)
    design = np.column_stack([np.log(dist), np.ones(len(dist)), dist])
    observed = np.log(magnitude)
    slope, intercept, drift = np.linalg.lstsq(design, observed, rcond=None)[0]
    return FitResult(slope=float(slope), intercept=float(intercept),
                     r_squared=_r_squared(observed, design @ np.array([slope, intercept, drift])),
                     window=window, n_points=len(dist), linear=float(drift))


def _axis_points(d, distances):
    points = np.zeros((len(distances), d.n))
    points[:, -1] = distances - d.gamma
    return points


def axis_profile(solution, window, count=40):
    """(dist, |u|) along (0, x_n), dist = x_n + gamma, by bilinear interpolation."""
    distances = np.geomspace(window[0], window[1], count)
    values = solution.interpolate(_axis_points(solution.domain, distances))
    return np.column_stack([distances, np.abs(values)])


def barrier_axis_fit(b, window=DEFAULT_BARRIER_WINDOW, count=40):
    """Axis power law of the singular part of ``b`` against dist = x_n + gamma."""
    target = b.singular_part()
    distances = np.geomspace(window[0], window[1], count)
    points = np.zeros((count, b.n))
    points[:, -1] = distances - b.gamma
    return fit_exponent(np.column_stack([distances, np.abs(barriers.value(target, points))]), window)


def bootstrap(n, q, steps):
    """beta_(k+1) = (beta_k q + 2) / n from beta_0 = 2/n, with the closed-form errors."""
    if n < 3:
        raise ParameterError('the bootstrap needs n >= 3, got {}'.format(n))
    if not 0 < q < n - 2:
        raise ParameterError('the bootstrap needs 0 < q < n - 2, got q={} for n={}'.format(q, n))
    if steps < 0:
        raise ParameterError('steps must be nonnegative')
    betas = np.empty(steps + 1)
    betas[0] = 2.0 / n
    for k in range(steps):
        betas[k + 1] = (betas[k] * q + 2.0) / n
    errors = 2.0 * q / (n * (n - q)) * (q / float(n)) ** np.arange(steps + 1)
    return BootstrapTrace(n=n, q=q, betas=betas, errors=errors)


def minimal_bootstrap_steps(n, q, beta):
    """Smallest k with (2q / (n(n - q))) (q/n)^k < 2/(n - q) - beta."""
    limit = 2.0 / (n - q)
    if not beta < limit:
        raise ParameterError('target exponent {} is not below the limit {}'.format(beta, limit))
    bootstrap(n, q, 0)
    k = 0
    error = 2.0 * q / (n * (n - q))
    while not error < limit - beta:
        error *= q / float(n)
        k += 1
    return k


def _evaluate(target, points):
    if isinstance(target, Barrier):
        try:
            return np.asarray(barriers.value(target, points))
        except SingularSetError as e:
            raise EvaluationError(str(e), points[0])
    if isinstance(target, DiscreteSolution):
        return target.interpolate(points)
    values = np.asarray([target(point) for point in points], dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        raise EvaluationError('non-finite value', points[np.argmax(bad)])
    return values


def check_comparison(lower, upper, d, n_samples, rng=None, tolerance=1e-12):
    """Sampled check of upper >= lower; returns (pass, worst_gap, worst_point)."""
    rng = rng if rng is not None else np.random.default_rng(0)
    points = sample_interior(d, n_samples, rng)
    gaps = _evaluate(upper, points) - _evaluate(lower, points)
    worst = int(np.argmin(gaps))
    return bool(gaps[worst] >= -tolerance), float(gaps[worst]), points[worst]


def check_nodal_sandwich(solution, lower, upper, tolerance):
    """lower <= u_h <= upper at every node within ``tolerance``; returns (pass, worst_violation)."""
    nodes = solution.grid.nodes
    below = _evaluate(lower, nodes) - solution.values
    above = solution.values - _evaluate(upper, nodes)
    worst = float(max(np.max(below), np.max(above)))
    return worst <= tolerance, worst


def trace_inequality_check(A, B):
    """trace(AB) >= n (det A)^(1/n) (det B)^(1/n) for symmetric positive semidefinite A, B."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    for name, matrix in (('A', A), ('B', B)):
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ParameterError('{} must be a square matrix'.format(name))
        if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12 * max(1.0, np.max(np.abs(matrix)))):
            raise ParameterError('{} is not symmetric'.format(name))
        if np.min(np.linalg.eigvalsh(matrix)) < -1e-10:
            raise ParameterError('{} is not positive semidefinite'.format(name))
    n = A.shape[0]
    lhs = float(np.trace(A @ B))
    rhs = n * max(np.linalg.det(A), 0.0) ** (1.0 / n) * max(np.linalg.det(B), 0.0) ** (1.0 / n)
    return lhs >= rhs - 1e-12 * max(1.0, abs(lhs))


def mixc_exponent(n, k):
    return ((n - 4.0) * k - (2.0 * n + 4.0)) / (2.0 * n + 2.0 * k + 2.0)


def mixc_threshold(n):
    if n <= 4:
        raise ParameterError('the degeneracy threshold exists for n > 4 only')
    return (2.0 * n + 4.0) / (n - 4.0)


def mixc_exponent_identity(n, k):
    """Absolute difference between -a(n + 2 + k) - k(a - 1) and the degeneracy exponent."""
    a = barriers.affine_sphere_exponent(n, k)
    return abs(-a * (n + 2.0 + k) - k * (a - 1.0) - mixc_exponent(n, k))


def affine_gap_decay_exponent(n, k):
    """Rate e of (x.Du - u)^-k <= C dist^e, e = (1 - a) k = (2n + k) k / (2n + 2k + 2)."""
    return (2.0 * n + k) * k / (2.0 * n + 2.0 * k + 2.0)


def barrier_gap_decay_fit(b, window=DEFAULT_BARRIER_WINDOW, count=40):
    """
    Axis power law of affine_gap_lower_bound(b)^-k against dist = x_n + gamma
    for the affine-sphere subsolution.
    """
    distances = np.geomspace(window[0], window[1], count)
    points = np.zeros((count, b.n))
    points[:, -1] = distances - b.gamma
    bound = barriers.affine_gap_lower_bound(b, points)
    return fit_exponent(np.column_stack([distances, bound ** -b.k]), window)


def mixc_probe(solution, k, gamma, window=None, count=30):
    """
    Fits along the axis, against the distance to {x_n = -gamma}, of
    f = |u|^(-n-2-k) (x.Du - u)^(-k) and of the factor (x.Du - u)^(-k).
    The report holds the constant C of f <= C dist^e over the samples and
    whether both fitted rates are consistent with their bounds.
    """
    if solution.floor_bound:
        raise PositivityError('x.Du - u hit the positivity floor; the right-hand side is unreliable')
    grid = solution.grid
    n = solution.domain.n
    window = window or default_window(grid.h)
    gap = discrete_affine_gap(grid, solution.values)
    if np.any(gap <= 0):
        raise PositivityError('x.Du - u is not positive at every node')
    distances = np.geomspace(window[0], window[1], count)
    points = np.zeros((count, 2))
    points[:, 1] = distances - gamma
    factor = np.exp(-k * np.log(gap))
    f = grid.interpolate(np.exp(-(n + 2.0 + k) * np.log(np.abs(solution.values))) * factor, points)
    fit = fit_exponent(np.column_stack([distances, f]), window)
    gap_fit = fit_exponent_drift(np.column_stack([distances, grid.interpolate(factor, points)]), window)
    exponent = mixc_exponent(n, k)
    gap_exponent = affine_gap_decay_exponent(n, k)
    report = {
        'exponent': exponent,
        'constant': float(np.max(f / distances ** exponent)),
        'consistent': fit.slope >= exponent - MIXC_TOLERANCE,
        'gap_slope': gap_fit.slope,
        'gap_exponent': gap_exponent,
        'gap_consistent': gap_fit.slope >= gap_exponent - MIXC_TOLERANCE,
    }
    solution.log_action('singular_ma.analysis.mixc_probe', slope='{:.6g}'.format(fit.slope),
                        exponent='{:.6g}'.format(exponent), gap_slope='{:.6g}'.format(gap_fit.slope),
                        gap_exponent='{:.6g}'.format(gap_exponent))
    return fit, report


def origin_gap_check(solution, k, gamma):
    """
    Discrete x.Du - u at the origin against C gamma^a - C gamma, the value
    the affine-sphere supersolution takes there. Returns (pass, gap, bound).
    """
    b = barriers.super_wk(solution.domain.n, k, gamma)
    bound = b.C * (gamma ** b.a - gamma)
    origin = np.zeros((1, solution.domain.n))
    gap = float(solution.grid.interpolate(discrete_affine_gap(solution.grid, solution.values), origin)[0])
    solution.log_action('singular_ma.analysis.origin_gap', gap='{:.6g}'.format(gap), bound='{:.6g}'.format(bound))
    return gap >= bound, gap, float(bound)


def _alpha_constant(solution, p):
    alpha = barriers.holder_exponent(solution.domain.n, p)
    return alpha, barriers.c_alpha(solution.domain.n, diameter(solution.domain), alpha)


def weight_bounds(rhs, d):
    """Bounds (lambda, Lambda) of the weight on the closure of ``d``; (1, 1) without one."""
    if not rhs.weight:
        return 1.0, 1.0
    return affine_range(rhs.weight, d)


def upper_bound_ratio(solution, p):
    """
    max over nodes of |u| / (Lambda^(1/(n+p)) C_alpha dist^alpha), alpha = 2/(n + p),
    with Lambda the upper bound of the weight.
    """
    alpha, constant = _alpha_constant(solution, p)
    _, high = weight_bounds(solution.rhs, solution.domain)
    constant *= high ** (1.0 / (solution.domain.n + p))
    dist = np.asarray(dist_to_boundary(solution.domain, solution.grid.nodes))
    return float(np.max(np.abs(solution.values) / (constant * dist ** alpha)))


def sup_norm_bound_check(solution, n, p):
    """
    Lower bound ||u|| >= lambda^(1/(n+p)) c(n, p) |Omega|^(2/(n+p)) and the
    pointwise upper bound of ``upper_bound_ratio`` at every node. Returns
    (pass, ratio) with ratio the sup norm over the lower bound.
    """
    low, _ = weight_bounds(solution.rhs, solution.domain)
    lower = low ** (1.0 / (n + p)) * barriers.sup_norm_constant(n, p) * volume(solution.domain) ** (2.0 / (n + p))
    ratio = solution.sup_norm() / lower
    upper = upper_bound_ratio(solution, p)
    solution.log_action('singular_ma.analysis.sup_norm_bound', ratio='{:.6g}'.format(ratio),
                        upper_ratio='{:.6g}'.format(upper))
    return ratio >= 1.0 and upper <= 1.0, ratio


def bounds_compatible(n, p, d):
    alpha = barriers.holder_exponent(n, p)
    diam = diameter(d)
    lower = barriers.sup_norm_constant(n, p) * volume(d) ** alpha
    return lower <= barriers.c_alpha(n, diam, alpha) * (diam / 2.0) ** alpha
