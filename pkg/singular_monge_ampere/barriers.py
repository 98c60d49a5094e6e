"""
Closed-form sub- and supersolutions of the singular Monge-Ampere equations.

Every barrier is a function of rho = |x'|^2 and s = x_n + gamma only, so
value, gradient and Hessian are assembled from its rho/s derivatives:

    D_i u = 2 x_i u_rho,              D_n u = u_s,
    D_ij u = 2 delta_ij u_rho + 4 x_i x_j u_rhorho,
    D_in u = 2 x_i u_rhos,            D_nn u = u_ss.

Two families cover all kinds:

    subsolutions    v = s^a (rho - C)
    supersolutions  w = K [L s - s^a (T - rho)^b],  T = t^2, L in {0, 1}
"""
import logging
import math

import numpy as np
from scipy.optimize import brentq

from .exceptions import ParameterError, SingularSetError
from .geometry import contains_origin_interior, diameter, sample_interior, unit_ball_volume
from .models import Barrier, Domain, Jet2, RhsSpec

logger = logging.getLogger(__name__)

EXPLICIT_P1_CYLINDER = 'p1_cylinder'
EXPLICIT_UJL = 'ujl'
EXPLICIT_AFFINE_CYLINDER = 'affine_cylinder'


def holder_exponent(n, p):
    return 2.0 / (n + p)


def affine_sphere_exponent(n, k):
    return (2.0 + k) / (2.0 * n + 2.0 * k + 2.0)


def c_alpha(n, diam, alpha):
    if not 0 < alpha < 1:
        raise ParameterError('alpha must lie in the open interval (0, 1), got {}'.format(alpha))
    if not diam > 0:
        raise ParameterError('diameter must be positive')
    return (1.0 + 2.0 * diam ** 2) / (alpha * (1.0 - alpha))


def _sharp_constant(n, exponent_sum, a, b, factor=1.0):
    return (factor * (2.0 * b) ** (n - 1) * a * (1.0 - a)) ** (-1.0 / exponent_sum)


def sharp_constant_suplem(n, p):
    """Largest C with C^(n+p) (1-r^2)^(p-1) (2b)^(n-1) a(1-a) <= 1 for r < 1."""
    if p < 1:
        raise ParameterError('the parabola-cap supersolution needs p >= 1, got {}'.format(p))
    a = holder_exponent(n, p)
    return _sharp_constant(n, n + p, a, 1.0 - a)


def sharp_constant_suplem2(n, p):
    if p < n + 2:
        raise ParameterError('the sphere-cap supersolution needs p >= n + 2, got p={} for n={}'.format(p, n))
    a = holder_exponent(n, p)
    return _sharp_constant(n, n + p, a, (1.0 - a) / 2.0)


def sharp_constant_suplemk(n, k, gamma):
    if not 0 < gamma < 1:
        raise ParameterError('gamma must lie in (0, 1), got {}'.format(gamma))
    if k < 0:
        raise ParameterError('k must be nonnegative')
    a = affine_sphere_exponent(n, k)
    return _sharp_constant(n, 2.0 * n + 2.0 * k + 2.0, a, 1.0 - a, factor=3.0 ** k)


def sub_valpha(n, diam, p=None, alpha=None):
    if alpha is None:
        if p is None or not p > 0:
            raise ParameterError('sub_valpha needs p > 0 or an explicit alpha')
        alpha = holder_exponent(n, p)
    return Barrier(kind=Barrier.KIND_SUB_VALPHA, n=n, a=alpha, C=c_alpha(n, diam, alpha), p=p)


def super_w(n, p):
    a = holder_exponent(n, p)
    return Barrier(kind=Barrier.KIND_SUPER_W, n=n, a=a, b=1.0 - a, C=sharp_constant_suplem(n, p), p=p)


def super_w2(n, p):
    a = holder_exponent(n, p)
    return Barrier(kind=Barrier.KIND_SUPER_W2, n=n, a=a, b=(1.0 - a) / 2.0, C=sharp_constant_suplem2(n, p), p=p)


def super_wt(n, p, t):
    if not t > 0:
        raise ParameterError('scale t must be positive')
    a = holder_exponent(n, p)
    return Barrier(kind=Barrier.KIND_SUPER_WT, n=n, a=a, b=1.0 - a, C=sharp_constant_suplem(n, p), p=p, t=t)


def _sub_valpha_k_margin(n, k, a, gamma0, C, rho):
    bracket = (a - a * a) * C - a * (1.0 + a) * rho
    return ((n - 1) * math.log(2.0) + k * math.log(a * gamma0) + math.log(bracket)
            + (n + 2.0 * k + 2.0) * math.log(C - rho))


def sub_valpha_k(n, k, gamma, gamma0, diam):
    """
    Subsolution (x_n + gamma)^a (|x'|^2 - C) of the affine-sphere equation
    with the smallest C >= 1 + diam^2 for which
    2^(n-1) (a gamma0)^k [(a - a^2) C - a(1 + a) r^2] [C - r^2]^(n+2k+2) >= 1
    holds at the worst radius r = diam.
    """
    if gamma0 is None or not gamma0 > 0:
        raise ParameterError('gamma0 must be positive, got {}'.format(gamma0))
    if gamma < gamma0:
        raise ParameterError('gamma must be at least gamma0')
    if k < 0:
        raise ParameterError('k must be nonnegative')
    a = affine_sphere_exponent(n, k)
    rho = diam ** 2
    lower = max(1.0 + rho, (1.0 + a) * rho / (1.0 - a) * (1.0 + 1e-12) + 1e-12)

    def margin(C):
        return _sub_valpha_k_margin(n, k, a, gamma0, C, rho)

    C = lower
    if margin(lower) < 0:
        upper = 2.0 * lower
        while margin(upper) < 0:
            upper *= 2.0
        root = brentq(margin, lower, upper, xtol=1e-10)
        C = root + 2e-10 + 1e-14 * root
        while margin(C) < 0:
            C += 1e-10 * max(1.0, C)
    return Barrier(kind=Barrier.KIND_SUB_VALPHA_K, n=n, a=a, C=C, k=k, gamma=gamma, gamma0=gamma0)


def super_wk(n, k, gamma):
    a = affine_sphere_exponent(n, k)
    return Barrier(kind=Barrier.KIND_SUPER_WK, n=n, a=a, b=1.0 - a, C=sharp_constant_suplemk(n, k, gamma),
                   k=k, gamma=gamma)


def explicit_solution(kind, n):
    if kind in (EXPLICIT_P1_CYLINDER, Barrier.KIND_EXPLICIT_P1):
        a = holder_exponent(n, 1.0)
        return Barrier(kind=Barrier.KIND_EXPLICIT_P1, n=n, a=a, b=1.0 - a, C=sharp_constant_suplem(n, 1.0),
                       p=1.0, linear=False)
    if kind in (EXPLICIT_UJL, Barrier.KIND_EXPLICIT_UJL):
        if n != 2:
            raise ParameterError('the strip solution exists for n = 2 only, got n={}'.format(n))
        return Barrier(kind=Barrier.KIND_EXPLICIT_UJL, n=2, a=1.0 / 3.0, b=1.0 / 3.0,
                       C=sharp_constant_suplem2(2, 4.0), p=4.0, linear=False)
    if kind in (EXPLICIT_AFFINE_CYLINDER, Barrier.KIND_EXPLICIT_AFFINE_CYLINDER):
        p = n + 2.0
        a = holder_exponent(n, p)
        return Barrier(kind=Barrier.KIND_EXPLICIT_AFFINE_CYLINDER, n=n, a=a, b=(1.0 - a) / 2.0,
                       C=sharp_constant_suplem2(n, p), p=p, linear=False)
    raise ParameterError('unsupported explicit solution {!r} for n={}'.format(kind, n))


def validity_domain(b):
    """Domain on which a barrier is valid; None for the explicit cylinder solutions."""
    if b.kind in (Barrier.KIND_SUB_VALPHA, Barrier.KIND_SUPER_W):
        return Domain.parabola_cap(n=b.n)
    if b.kind == Barrier.KIND_SUPER_WT:
        return Domain.parabola_cap(t=b.t, n=b.n)
    if b.kind == Barrier.KIND_SUPER_W2:
        return Domain.sphere_cap(n=b.n)
    if b.kind in (Barrier.KIND_SUB_VALPHA_K, Barrier.KIND_SUPER_WK):
        return Domain.parabola_cap(gamma=b.gamma, n=b.n)
    return None


def sample_validity_points(b, count, rng, margin=1e-3):
    d = validity_domain(b)
    if d is not None:
        return sample_interior(d, count, rng, margin=margin)
    # Cylinder {|x'| < 1, x_n > 0}, truncated at height 1.
    directions = rng.standard_normal((count, b.n - 1))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = (1.0 - margin) * rng.random(count) ** (1.0 / (b.n - 1))
    heights = margin + (1.0 - margin) * rng.random(count)
    return np.hstack([directions * radii[:, None], heights[:, None]])


def _as_points(b, x):
    points = np.asarray(x, dtype=float)
    single = points.ndim == 1
    points = np.atleast_2d(points)
    if points.shape[-1] != b.n:
        raise ParameterError('point dimension {} does not match barrier dimension {}'.format(points.shape[-1], b.n))
    return points, single


def _derivatives(b, points):
    xp = points[:, :-1]
    rho = np.sum(xp ** 2, axis=1)
    s = points[:, -1] + b.gamma
    if np.any(s <= 0):
        raise SingularSetError('{} evaluated on x_n + gamma <= 0'.format(b.kind))
    a = b.a
    sa = np.exp(a * np.log(s))
    sa1 = sa / s
    sa2 = sa1 / s
    if b.is_subsolution_family:
        q = rho - b.C
        return dict(xp=xp, rho=rho, s=s, value=sa * q, d_rho=sa, d_rhorho=np.zeros_like(s),
                    d_rhos=a * sa1, d_s=a * sa1 * q, d_ss=a * (a - 1.0) * sa2 * q)
    gap = b.T - rho
    if np.any(gap <= 0):
        raise SingularSetError('{} evaluated on |x\'| >= t'.format(b.kind))
    K, L, e = b.scale, b.affine_coefficient, b.b
    gb = np.exp(e * np.log(gap))
    gb1 = gb / gap
    gb2 = gb1 / gap
    return dict(xp=xp, rho=rho, s=s, value=K * (L * s - sa * gb), d_rho=K * e * sa * gb1,
                d_rhorho=K * e * (1.0 - e) * sa * gb2, d_rhos=K * a * e * sa1 * gb1,
                d_s=K * (L - a * sa1 * gb), d_ss=K * a * (1.0 - a) * sa2 * gb)


def value(b, x):
    points, single = _as_points(b, x)
    result = _derivatives(b, points)['value']
    return float(result[0]) if single else result


def boundary_value(b, x):
    """
    ``value`` extended by continuity to x_n + gamma = 0 and |x'| = t, where
    the derivatives blow up. Raises SingularSetError beyond them.
    """
    points, single = _as_points(b, x)
    rho = np.sum(points[:, :-1] ** 2, axis=1)
    s = points[:, -1] + b.gamma
    if np.any(s < 0):
        raise SingularSetError('{} evaluated on x_n + gamma < 0'.format(b.kind))
    sa = np.power(s, b.a)
    if b.is_subsolution_family:
        result = sa * (rho - b.C)
    else:
        gap = b.T - rho
        if np.any(gap < 0):
            raise SingularSetError('{} evaluated on |x\'| > t'.format(b.kind))
        result = b.scale * (b.affine_coefficient * s - sa * np.power(gap, b.b))
    return float(result[0]) if single else result


def eval_jet(b, x):
    points, single = _as_points(b, x)
    parts = _derivatives(b, points)
    xp = parts['xp']
    m, n = points.shape
    gradient = np.hstack([2.0 * xp * parts['d_rho'][:, None], parts['d_s'][:, None]])
    hessian = np.zeros((m, n, n))
    hessian[:, :-1, :-1] = (2.0 * parts['d_rho'][:, None, None] * np.eye(n - 1)
                            + 4.0 * parts['d_rhorho'][:, None, None] * xp[:, :, None] * xp[:, None, :])
    hessian[:, :-1, -1] = 2.0 * xp * parts['d_rhos'][:, None]
    hessian[:, -1, :-1] = hessian[:, :-1, -1]
    hessian[:, -1, -1] = parts['d_ss']
    if single:
        return Jet2(value=float(parts['value'][0]), gradient=gradient[0], hessian=hessian[0])
    return Jet2(value=parts['value'], gradient=gradient, hessian=hessian)


def det_hessian(b, x):
    points, single = _as_points(b, x)
    parts = _derivatives(b, points)
    n, a, rho, s = b.n, b.a, parts['rho'], parts['s']
    if b.is_subsolution_family:
        det = 2.0 ** (n - 1) * np.exp((n * a - 2.0) * np.log(s)) * (a * (1.0 - a) * b.C - (a * a + a) * rho)
    else:
        e, T = b.b, b.T
        gap = T - rho
        det = (b.scale ** n * (2.0 * e) ** (n - 1) * a * np.exp((n * a - 2.0) * np.log(s) + n * (e - 1.0) * np.log(gap))
               * ((1.0 - a) * T + (1.0 - 2.0 * e - a) * rho))
    return float(det[0]) if single else det


def affine_gap(b, x):
    """x . Du - u."""
    jet = eval_jet(b, x)
    points = np.atleast_2d(np.asarray(x, dtype=float))
    gap = np.sum(points * np.atleast_2d(jet.gradient), axis=1) - np.atleast_1d(jet.value)
    return float(gap[0]) if np.ndim(x) == 1 else gap


def affine_gap_lower_bound(b, x):
    if b.kind != Barrier.KIND_SUB_VALPHA_K:
        raise ParameterError('the affine-gap lower bound belongs to the affine-sphere subsolution')
    points, single = _as_points(b, x)
    parts = _derivatives(b, points)
    bound = np.exp((b.a - 1.0) * np.log(parts['s'])) * b.a * b.gamma0 * (b.C - parts['rho'])
    return float(bound[0]) if single else bound


def _target_parts(target, rhs, x, eps):
    if isinstance(target, Barrier):
        jet = eval_jet(target, x)
        det = det_hessian(target, x)
    else:
        jet = target
        det = np.linalg.det(jet.hessian)
    f = rhs.evaluate(jet.value, jet.gradient, x, eps=eps)
    return det, f


def residual(target, rhs, x, eps=0.0):
    """
    det D^2u - f(u, Du, x) for a barrier or a Jet2: negative where the
    target is locally a supersolution, positive where it is a subsolution.
    """
    det, f = _target_parts(target, rhs, x, eps)
    return det - f


def normalized_residual(target, rhs, x, eps=0.0):
    det, f = _target_parts(target, rhs, x, eps)
    return det / f - 1.0


def fd_jet(b, x, step=1e-4):
    """
    Central-difference Jet2 of ``b`` at one point or a stack of points, with
    the Hessian change between ``step`` and ``step / 2`` relative to the
    Hessian size (per point for stacks).
    """
    points, single = _as_points(b, x)
    n = b.n

    def differences(h):
        eye = np.eye(n) * h
        f0 = value(b, points)
        gradient = np.zeros((len(points), n))
        hessian = np.zeros((len(points), n, n))
        for i in range(n):
            fp, fm = value(b, points + eye[i]), value(b, points - eye[i])
            gradient[:, i] = (fp - fm) / (2.0 * h)
            hessian[:, i, i] = (fp - 2.0 * f0 + fm) / h ** 2
            for j in range(i + 1, n):
                mixed = (value(b, points + eye[i] + eye[j]) - value(b, points + eye[i] - eye[j])
                         - value(b, points - eye[i] + eye[j]) + value(b, points - eye[i] - eye[j])) / (4.0 * h ** 2)
                hessian[:, i, j] = hessian[:, j, i] = mixed
        return f0, gradient, hessian

    f0, gradient, hessian = differences(step)
    _, _, refined = differences(step / 2.0)
    size = np.maximum(1.0, np.max(np.abs(hessian), axis=(1, 2)))
    gaps = np.max(np.abs(hessian - refined), axis=(1, 2)) / size
    if single:
        return Jet2(value=float(f0[0]), gradient=gradient[0], hessian=hessian[0]), float(gaps[0])
    return Jet2(value=f0, gradient=gradient, hessian=hessian), gaps


def super_wt_scaling_gaps(n, p, t, points):
    """
    Largest relative defects of w_t(x) = t^e w_1(x'/t, x_n/t^2) and
    det D^2 w_t(x) = t^(-p e) det D^2 w_1(x'/t, x_n/t^2), e = (2n+2)/(n+p).
    """
    scaled, unit = super_wt(n, p, t), super_wt(n, p, 1.0)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    pulled = points.copy()
    pulled[:, :-1] /= t
    pulled[:, -1] /= t ** 2
    e = (2.0 * n + 2.0) / (n + p)
    values = value(scaled, points)
    dets = det_hessian(scaled, points)
    value_gap = np.max(np.abs(values - t ** e * value(unit, pulled)) / np.abs(values))
    det_gap = np.max(np.abs(dets - t ** (-p * e) * det_hessian(unit, pulled)) / np.abs(dets))
    return float(value_gap), float(det_gap)


def matched_subsolution(d, rhs):
    """Subsolution barrier of the problem (d, rhs), or None."""
    if d.kind != Domain.KIND_PARABOLA_CAP or rhs.weight:
        return None
    if rhs.kind == RhsSpec.KIND_POWER_SINGULAR and d.gamma == 0:
        return sub_valpha(d.n, diameter(d), p=rhs.p)
    if rhs.kind == RhsSpec.KIND_AFFINE_SPHERE and d.gamma > 0:
        _, gamma0 = contains_origin_interior(d)
        return sub_valpha_k(d.n, rhs.k, d.gamma, gamma0, diameter(d))
    return None


def matched_supersolution(d, rhs):
    """Supersolution barrier of the problem (d, rhs), or None."""
    if rhs.weight:
        return None
    if d.kind == Domain.KIND_PARABOLA_CAP:
        if rhs.kind == RhsSpec.KIND_POWER_SINGULAR and d.gamma == 0 and rhs.p >= 1:
            return super_w(d.n, rhs.p) if d.t == 1 else super_wt(d.n, rhs.p, d.t)
        if rhs.kind == RhsSpec.KIND_AFFINE_SPHERE and d.t == 1 and 0 < d.gamma < 1:
            return super_wk(d.n, rhs.k, d.gamma)
    if d.kind == Domain.KIND_SPHERE_CAP and rhs.kind == RhsSpec.KIND_POWER_SINGULAR and rhs.p >= d.n + 2:
        return super_w2(d.n, rhs.p)
    return None


def volume_constant(n):
    """C(n) = 4^n n^(2n) |B_1|^2 of the sup-norm lower bound."""
    return 4.0 ** n * float(n) ** (2 * n) * unit_ball_volume(n) ** 2


def sup_norm_constant(n, p):
    return volume_constant(n) ** (-1.0 / (n + p))
