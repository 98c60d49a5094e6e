import math

import numpy as np
import pytest

from singular_monge_ampere import barriers
from singular_monge_ampere.exceptions import ParameterError, SingularSetError
from singular_monge_ampere.geometry import sample_boundary, sample_interior
from singular_monge_ampere.models import Barrier, Domain, RhsSpec


def test_c_alpha():
    assert barriers.c_alpha(2, 2.0, 2.0 / 3.0) == pytest.approx(40.5)
    with pytest.raises(ParameterError, match=r'\(0, 1\)'):
        barriers.c_alpha(2, 2.0, 1.0)
    with pytest.raises(ParameterError):
        barriers.c_alpha(2, 0.0, 0.5)


@pytest.mark.parametrize('n', [2, 3, 4, 5, 6])
@pytest.mark.parametrize('p', [1.0, 2.0, 5.0])
def test_sharp_constant_closed_form(n, p):
    a = 2.0 / (n + p)
    b = 1.0 - a
    expected = ((2.0 * b) ** (n - 1) * a * (1.0 - a)) ** (-1.0 / (n + p))
    assert barriers.sharp_constant_suplem(n, p) == pytest.approx(expected, rel=1e-14)


def test_strip_constant():
    assert barriers.sharp_constant_suplem2(2, 4.0) == pytest.approx(math.sqrt(3.0) * 2.0 ** (-1.0 / 3.0), rel=1e-14)


def test_sharp_constant_ranges():
    with pytest.raises(ParameterError):
        barriers.sharp_constant_suplem(2, 0.5)
    with pytest.raises(ParameterError):
        barriers.sharp_constant_suplem2(3, 4.0)
    with pytest.raises(ParameterError):
        barriers.sharp_constant_suplemk(2, 1.0, 1.0)


def test_affine_sphere_constant_has_power_of_three():
    a = barriers.affine_sphere_exponent(2, 2.0)
    assert a == pytest.approx(4.0 / 10.0)
    expected = (9.0 * (2.0 * (1.0 - a)) * a * (1.0 - a)) ** (-1.0 / 10.0)
    assert barriers.sharp_constant_suplemk(2, 2.0, 0.5) == pytest.approx(expected)


@pytest.mark.parametrize('n,p', [(2, 1.0), (3, 2.0), (2, 6.0)])
def test_sharp_constant_is_attained_on_the_axis(n, p):
    w = barriers.super_w(n, p).singular_part()
    points = np.array([[0.0] * (n - 1) + [height] for height in (0.05, 0.3, 0.9)])
    np.testing.assert_allclose(barriers.normalized_residual(w, RhsSpec.power_singular(p), points), 0.0, atol=1e-10)


def _family():
    cap = Domain.parabola_cap(gamma=0.5)
    return [
        barriers.sub_valpha(2, 2.0, p=1.0),
        barriers.sub_valpha(3, 2.0, p=3.0),
        barriers.super_w(2, 1.0),
        barriers.super_w(3, 4.0),
        barriers.super_w2(2, 5.0),
        barriers.super_wt(2, 2.0, 0.5),
        barriers.matched_subsolution(cap, RhsSpec.affine_sphere(1.0)),
        barriers.super_wk(2, 1.0, 0.5),
        barriers.explicit_solution(barriers.EXPLICIT_UJL, 2),
    ]


@pytest.mark.parametrize('b', _family(), ids=lambda b: b.kind)
def test_closed_form_jet_matches_finite_differences(b, rng):
    points = barriers.sample_validity_points(b, 50, rng, margin=0.05)
    jet = barriers.eval_jet(b, points)
    fd, gaps = barriers.fd_jet(b, points)
    scale = np.maximum(1.0, np.max(np.abs(jet.hessian), axis=(1, 2)))
    assert np.all(np.max(np.abs(fd.hessian - jet.hessian), axis=(1, 2)) / scale < 1e-4)
    np.testing.assert_allclose(fd.gradient, jet.gradient, rtol=1e-5, atol=1e-4)
    np.testing.assert_allclose(fd.value, jet.value)
    assert np.all(gaps < 1e-3)


@pytest.mark.parametrize('b', _family(), ids=lambda b: b.kind)
def test_closed_form_determinant(b, rng):
    points = barriers.sample_validity_points(b, 100, rng, margin=1e-2)
    det = barriers.det_hessian(b, points)
    np.testing.assert_allclose(det, np.linalg.det(barriers.eval_jet(b, points).hessian), rtol=1e-8)
    assert np.all(det > 0)


def test_singular_set_raises():
    w = barriers.super_w(2, 1.0)
    with pytest.raises(SingularSetError):
        barriers.value(w, [0.0, 0.0])
    with pytest.raises(SingularSetError):
        barriers.value(w, [1.0, 0.5])
    with pytest.raises(SingularSetError):
        barriers.eval_jet(barriers.sub_valpha(2, 2.0, p=1.0), [0.3, -0.1])


def test_gradient_is_radial_on_the_axis():
    for b in (barriers.sub_valpha(2, 2.0, p=2.0), barriers.super_w(2, 2.0)):
        assert barriers.eval_jet(b, [0.0, 0.4]).gradient[0] == 0.0


def test_dimension_mismatch():
    with pytest.raises(ParameterError):
        barriers.value(barriers.super_w(3, 1.0), [0.0, 0.5])


def test_subsolution_sign(rng):
    b = barriers.sub_valpha(2, 2.0, p=2.0)
    points = barriers.sample_validity_points(b, 2000, rng, margin=1e-6)
    assert np.all(barriers.residual(b, RhsSpec.power_singular(2.0), points) >= 0)
    assert np.all(barriers.value(b, points) < 0)


def test_supersolution_sign(rng):
    b = barriers.super_w(3, 2.0)
    points = barriers.sample_validity_points(b, 2000, rng, margin=1e-6)
    assert np.all(barriers.normalized_residual(b, RhsSpec.power_singular(2.0), points) <= 1e-12)


@pytest.mark.parametrize('kind,n', [
    (barriers.EXPLICIT_P1_CYLINDER, 2),
    (barriers.EXPLICIT_P1_CYLINDER, 4),
    (barriers.EXPLICIT_UJL, 2),
    (barriers.EXPLICIT_AFFINE_CYLINDER, 3),
])
def test_explicit_solutions_are_exact(kind, n, rng):
    b = barriers.explicit_solution(kind, n)
    assert barriers.validity_domain(b) is None
    points = barriers.sample_validity_points(b, 500, rng)
    np.testing.assert_allclose(barriers.normalized_residual(b, RhsSpec.power_singular(b.p), points), 0.0,
                               atol=1e-10)


def test_strip_solution_is_planar_only():
    with pytest.raises(ParameterError):
        barriers.explicit_solution(barriers.EXPLICIT_UJL, 3)
    with pytest.raises(ParameterError):
        barriers.explicit_solution('cone', 2)


def test_affine_sphere_subsolution(rng):
    cap = Domain.parabola_cap(gamma=0.5)
    b = barriers.matched_subsolution(cap, RhsSpec.affine_sphere(1.0))
    assert b.kind == Barrier.KIND_SUB_VALPHA_K
    assert b.gamma0 == pytest.approx(0.5)
    assert b.C >= 1.0 + 4.0
    assert barriers._sub_valpha_k_margin(2, 1.0, b.a, b.gamma0, b.C, 4.0) >= 0
    points = barriers.sample_validity_points(b, 1000, rng, margin=1e-6)
    assert np.all(barriers.affine_gap(b, points) >= barriers.affine_gap_lower_bound(b, points))
    assert np.all(barriers.residual(b, RhsSpec.affine_sphere(1.0), points) >= 0)


def test_affine_gap_lower_bound_belongs_to_one_kind():
    with pytest.raises(ParameterError):
        barriers.affine_gap_lower_bound(barriers.super_w(2, 1.0), [0.0, 0.5])


def test_singular_part_drops_the_linear_term():
    w = barriers.super_w(2, 1.0)
    part = w.singular_part()
    assert part.affine_coefficient == 0.0
    x = [0.2, 0.3]
    assert barriers.value(w, x) - barriers.value(part, x) == pytest.approx(w.C * 0.3)
    v = barriers.sub_valpha(2, 2.0, p=1.0)
    assert v.singular_part() is v


@pytest.mark.parametrize('t', [0.5, 2.0, 3.0])
@pytest.mark.parametrize('p', [1.0, 3.0])
def test_rescaled_supersolution_scaling(t, p, rng):
    d = Domain.parabola_cap(t=t)
    points = sample_interior(d, 200, rng, margin=1e-3)
    value_gap, det_gap = barriers.super_wt_scaling_gaps(2, p, t, points)
    assert value_gap < 1e-10
    assert det_gap < 1e-10


def test_volume_constant():
    assert barriers.volume_constant(2) == pytest.approx(256.0 * math.pi ** 2)
    assert barriers.sup_norm_constant(2, 2.0) == pytest.approx((256.0 * math.pi ** 2) ** -0.25)


def test_matched_barriers():
    rhs = RhsSpec.power_singular(2.0)
    assert barriers.matched_subsolution(Domain.parabola_cap(), rhs).kind == Barrier.KIND_SUB_VALPHA
    assert barriers.matched_supersolution(Domain.parabola_cap(), rhs).kind == Barrier.KIND_SUPER_W
    assert barriers.matched_supersolution(Domain.parabola_cap(t=2.0), rhs).kind == Barrier.KIND_SUPER_WT
    assert barriers.matched_supersolution(Domain.sphere_cap(), RhsSpec.power_singular(4.0)).kind == \
        Barrier.KIND_SUPER_W2
    assert barriers.matched_supersolution(Domain.sphere_cap(), rhs) is None
    assert barriers.matched_subsolution(Domain.ball(), rhs) is None
    assert barriers.matched_supersolution(Domain.parabola_cap(gamma=0.5), RhsSpec.affine_sphere(1.0)).kind == \
        Barrier.KIND_SUPER_WK
    assert barriers.matched_subsolution(Domain.parabola_cap(), RhsSpec.degenerate(1.0)) is None


def _convex_family(n):
    family = [
        barriers.sub_valpha(n, 2.0, p=1.0),
        barriers.super_w(n, 1.0),
        barriers.super_w(n, 4.0),
        barriers.super_wt(n, 2.0, 0.5),
        barriers.super_wt(n, 2.0, 2.0),
        barriers.super_w2(n, n + 2.0),
        barriers.super_wk(n, 1.0, 0.5),
        barriers.super_wk(n, 2.0, 0.25),
        barriers.explicit_solution(barriers.EXPLICIT_P1_CYLINDER, n),
    ]
    if n == 2:
        family.append(barriers.matched_subsolution(Domain.parabola_cap(gamma=0.5), RhsSpec.affine_sphere(1.0)))
    return family


@pytest.mark.parametrize('n', [2, 3])
def test_barriers_are_convex(n, rng):
    for b in _convex_family(n):
        points = barriers.sample_validity_points(b, 500, rng)
        hessian = barriers.eval_jet(b, points).hessian
        scale = np.maximum(1.0, np.max(np.abs(hessian), axis=(1, 2)))
        smallest = np.linalg.eigvalsh(hessian)[:, 0] / scale
        assert np.min(smallest) >= -1e-10, b.describe()


@pytest.mark.parametrize('b', [
    barriers.super_w(2, 1.0),
    barriers.super_w(3, 4.0),
    barriers.super_w2(2, 4.0),
    barriers.super_wt(2, 1.0, 0.5),
    barriers.super_wt(2, 3.0, 2.0),
    barriers.super_wk(2, 1.0, 0.5),
    barriers.super_wk(3, 2.0, 0.25),
], ids=lambda b: b.describe())
def test_supersolutions_vanish_on_the_boundary(b, rng):
    points = sample_boundary(barriers.validity_domain(b), 1000, rng)
    assert np.max(np.abs(barriers.boundary_value(b, points))) < 1e-12 * max(1.0, b.scale)


def test_subsolutions_are_nonpositive_on_the_boundary(rng):
    affine = barriers.matched_subsolution(Domain.parabola_cap(gamma=0.5), RhsSpec.affine_sphere(1.0))
    for b in (barriers.sub_valpha(2, 2.0, p=1.0), affine):
        points = sample_boundary(barriers.validity_domain(b), 1000, rng)
        assert np.all(barriers.boundary_value(b, points) <= 0)


def test_boundary_value_extends_value():
    w = barriers.super_w(2, 1.0)
    assert barriers.boundary_value(w, [0.0, 0.0]) == 0.0
    assert barriers.boundary_value(w, [0.2, 0.3]) == pytest.approx(barriers.value(w, [0.2, 0.3]), rel=1e-14)
    with pytest.raises(SingularSetError):
        barriers.boundary_value(w, [0.0, -0.1])
    with pytest.raises(SingularSetError):
        barriers.boundary_value(w, [1.5, 0.1])


def test_weighted_equations_have_no_matched_barriers():
    rhs = RhsSpec.power_singular(1.0, weight=(1.0, 0.2, 0.0))
    assert barriers.matched_subsolution(Domain.parabola_cap(), rhs) is None
    assert barriers.matched_supersolution(Domain.parabola_cap(), rhs) is None
