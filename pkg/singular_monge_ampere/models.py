import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .exceptions import DomainError, ParameterError, PositivityError

logger = logging.getLogger(__name__)


class LoggedMixin:
    """
    Records that take part in a computation report what happened to them
    through ``log_action``, one dotted action identifier per event.
    """

    def log_action(self, action, **data):
        logger.info('%s %s', action, ' '.join('{}={}'.format(k, v) for k, v in sorted(data.items())))

    def log_debug(self, action, **data):
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug('%s %s', action, ' '.join('{}={}'.format(k, v) for k, v in sorted(data.items())))


@dataclass(frozen=True)
class Domain:
    KIND_PARABOLA_CAP = 'parabola_cap'
    KIND_SPHERE_CAP = 'sphere_cap'
    KIND_BALL = 'ball'
    KIND_HALFSPACES = 'halfspaces'
    KIND_CHOICE = (
        (KIND_PARABOLA_CAP, 'Parabola cap'),
        (KIND_SPHERE_CAP, 'Sphere cap'),
        (KIND_BALL, 'Ball'),
        (KIND_HALFSPACES, 'Half-space intersection'),
    )

    kind: str
    n: int = 2
    t: float = 1.0
    gamma: float = 0.0
    radius: float = 1.0
    normals: Tuple[Tuple[float, ...], ...] = ()
    offsets: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in dict(self.KIND_CHOICE):
            raise DomainError('unknown domain kind {!r}'.format(self.kind))
        if int(self.n) != self.n or self.n < 2:
            raise DomainError('dimension must be an integer >= 2, got {}'.format(self.n))
        if self.kind == self.KIND_PARABOLA_CAP:
            if not self.t > 0:
                raise DomainError('parabola cap scale t must be positive')
            if not self.gamma >= 0:
                raise DomainError('parabola cap shift gamma must be nonnegative')
        elif self.kind == self.KIND_BALL:
            if not self.radius > 0:
                raise DomainError('ball radius must be positive')
        elif self.kind == self.KIND_HALFSPACES:
            if len(self.normals) != len(self.offsets) or len(self.normals) <= self.n:
                raise DomainError('a bounded half-space intersection needs more than n matched normals and offsets')
            for normal in self.normals:
                if len(normal) != self.n:
                    raise DomainError('normal {} does not have dimension {}'.format(normal, self.n))
                if abs(np.linalg.norm(normal) - 1.0) > 1e-9:
                    raise DomainError('normal {} is not a unit vector'.format(normal))

    @classmethod
    def parabola_cap(cls, t=1.0, gamma=0.0, n=2):
        return cls(kind=cls.KIND_PARABOLA_CAP, n=n, t=float(t), gamma=float(gamma))

    @classmethod
    def sphere_cap(cls, n=2):
        return cls(kind=cls.KIND_SPHERE_CAP, n=n)

    @classmethod
    def ball(cls, radius=1.0, n=2):
        return cls(kind=cls.KIND_BALL, n=n, radius=float(radius))

    @classmethod
    def halfspaces(cls, normals, offsets):
        normals = tuple(tuple(float(c) for c in row) for row in normals)
        return cls(kind=cls.KIND_HALFSPACES, n=len(normals[0]), normals=normals,
                   offsets=tuple(float(c) for c in offsets))

    def describe(self):
        if self.kind == self.KIND_PARABOLA_CAP:
            return 'parabola_cap(t={:g},gamma={:g},n={})'.format(self.t, self.gamma, self.n)
        if self.kind == self.KIND_BALL:
            return 'ball(radius={:g},n={})'.format(self.radius, self.n)
        if self.kind == self.KIND_SPHERE_CAP:
            return 'sphere_cap(n={})'.format(self.n)
        return 'halfspaces(m={},n={})'.format(len(self.normals), self.n)


@dataclass(frozen=True, eq=False)
class Jet2:
    value: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray

    def __post_init__(self):
        hessian = np.asarray(self.hessian)
        scale = max(1.0, float(np.max(np.abs(hessian))) if hessian.size else 1.0)
        if np.max(np.abs(hessian - np.swapaxes(hessian, -1, -2)), initial=0.0) > 1e-12 * scale:
            raise ParameterError('Hessian is not symmetric')

    @property
    def det(self):
        return np.linalg.det(self.hessian)


@dataclass(frozen=True)
class Barrier:
    KIND_SUB_VALPHA = 'sub_valpha'
    KIND_SUPER_W = 'super_w'
    KIND_SUPER_W2 = 'super_w2'
    KIND_SUPER_WT = 'super_wt'
    KIND_SUB_VALPHA_K = 'sub_valpha_k'
    KIND_SUPER_WK = 'super_wk'
    KIND_EXPLICIT_P1 = 'explicit_p1'
    KIND_EXPLICIT_UJL = 'explicit_ujl'
    KIND_EXPLICIT_AFFINE_CYLINDER = 'explicit_affine_cylinder'
    KIND_CHOICE = (
        (KIND_SUB_VALPHA, 'Subsolution x_n^a(|x\'|^2 - C)'),
        (KIND_SUPER_W, 'Supersolution on the parabola cap'),
        (KIND_SUPER_W2, 'Supersolution on the sphere cap'),
        (KIND_SUPER_WT, 'Rescaled supersolution on the parabola cap'),
        (KIND_SUB_VALPHA_K, 'Subsolution for the affine-sphere equation'),
        (KIND_SUPER_WK, 'Supersolution for the affine-sphere equation'),
        (KIND_EXPLICIT_P1, 'Explicit cylinder solution, p = 1'),
        (KIND_EXPLICIT_UJL, 'Explicit strip solution, n = 2, p = 4'),
        (KIND_EXPLICIT_AFFINE_CYLINDER, 'Explicit cylinder solution, p = n + 2'),
    )
    SUBSOLUTION_KINDS = (KIND_SUB_VALPHA, KIND_SUB_VALPHA_K)
    SUPERSOLUTION_KINDS = (KIND_SUPER_W, KIND_SUPER_W2, KIND_SUPER_WT, KIND_SUPER_WK)
    EXPLICIT_KINDS = (KIND_EXPLICIT_P1, KIND_EXPLICIT_UJL, KIND_EXPLICIT_AFFINE_CYLINDER)

    kind: str
    n: int
    a: float
    C: float
    b: Optional[float] = None
    p: Optional[float] = None
    k: Optional[float] = None
    gamma: float = 0.0
    gamma0: Optional[float] = None
    t: float = 1.0
    linear: bool = True

    def __post_init__(self):
        if self.kind not in dict(self.KIND_CHOICE):
            raise ParameterError('unknown barrier kind {!r}'.format(self.kind))
        if self.n < 2:
            raise ParameterError('dimension must be >= 2')
        if not 0 < self.a < 1:
            raise ParameterError('exponent a must lie in (0, 1), got {}'.format(self.a))
        if not self.C > 0:
            raise ParameterError('constant C must be positive, got {}'.format(self.C))
        if not self.is_subsolution_family:
            if self.b is None or not 0 < self.b < 1:
                raise ParameterError('exponent b must lie in (0, 1), got {}'.format(self.b))
            if self.a + self.b > 1 + 1e-12:
                raise ParameterError('convexity requires a + b <= 1, got {}'.format(self.a + self.b))
        if not self.t > 0:
            raise ParameterError('scale t must be positive')

    @property
    def is_subsolution_family(self):
        return self.kind in self.SUBSOLUTION_KINDS

    @property
    def T(self):
        return self.t ** 2

    @property
    def scale(self):
        """Multiplier K of the supersolution family."""
        if self.kind == self.KIND_SUPER_WT:
            return self.C * self.t ** (2.0 * (1.0 - self.p) / (self.n + self.p))
        return self.C

    @property
    def affine_coefficient(self):
        if self.is_subsolution_family or not self.linear:
            return 0.0
        return 1.0

    def singular_part(self):
        if self.is_subsolution_family:
            return self
        return replace(self, linear=False)

    def describe(self):
        parts = ['n={}'.format(self.n), 'a={:.6g}'.format(self.a)]
        for name in ('b', 'p', 'k'):
            value = getattr(self, name)
            if value is not None:
                parts.append('{}={:.6g}'.format(name, value))
        if self.gamma:
            parts.append('gamma={:g}'.format(self.gamma))
        if self.kind == self.KIND_SUPER_WT:
            parts.append('t={:g}'.format(self.t))
        return '{}({})'.format(self.kind, ','.join(parts))


@dataclass(frozen=True)
class RhsSpec:
    KIND_POWER_SINGULAR = 'power_singular'
    KIND_DEGENERATE = 'degenerate'
    KIND_AFFINE_SPHERE = 'affine_sphere'
    KIND_CHOICE = (
        (KIND_POWER_SINGULAR, 'det D^2u = |u|^-p'),
        (KIND_DEGENERATE, 'det D^2u = |u|^q'),
        (KIND_AFFINE_SPHERE, 'det D^2u = |u|^(-n-2-k) (x.Du - u)^-k'),
    )

    kind: str
    p: Optional[float] = None
    q: Optional[float] = None
    k: Optional[float] = None
    # Affine weight c0 + c.x multiplying |u|^-p; empty for the unweighted equation.
    weight: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.weight and self.kind != self.KIND_POWER_SINGULAR:
            raise ParameterError('only the power-singular right-hand side takes a weight')
        if self.weight and len(self.weight) < 3:
            raise ParameterError('a weight needs a constant and one coefficient per coordinate')
        if self.kind == self.KIND_POWER_SINGULAR:
            if self.p is None or not self.p > 0:
                raise ParameterError('power-singular right-hand side needs p > 0')
        elif self.kind == self.KIND_DEGENERATE:
            if self.q is None or not self.q >= 0:
                raise ParameterError('degenerate right-hand side needs q >= 0')
        elif self.kind == self.KIND_AFFINE_SPHERE:
            if self.k is None or not self.k > 0:
                raise ParameterError('affine-sphere right-hand side needs k > 0')
        else:
            raise ParameterError('unknown right-hand side kind {!r}'.format(self.kind))

    @classmethod
    def power_singular(cls, p, weight=()):
        return cls(kind=cls.KIND_POWER_SINGULAR, p=float(p), weight=tuple(float(c) for c in weight))

    @classmethod
    def degenerate(cls, q):
        return cls(kind=cls.KIND_DEGENERATE, q=float(q))

    @classmethod
    def affine_sphere(cls, k):
        return cls(kind=cls.KIND_AFFINE_SPHERE, k=float(k))

    @property
    def needs_gradient(self):
        return self.kind == self.KIND_AFFINE_SPHERE

    @property
    def unweighted(self):
        return replace(self, weight=())

    def weight_at(self, x):
        x = np.asarray(x, dtype=float)
        if not self.weight:
            return np.ones(x.shape[:-1])
        if x.shape[-1] != len(self.weight) - 1:
            raise ParameterError('weight has {} coefficients for points of dimension {}'.format(
                len(self.weight) - 1, x.shape[-1]))
        return self.weight[0] + x @ np.asarray(self.weight[1:])

    def evaluate(self, u, gradient=None, x=None, eps=0.0, floor=None):
        """
        Right-hand side f(u, Du, x). ``eps`` regularizes |u| in the singular
        kinds; ``floor`` replaces x.Du - u below it instead of raising.
        """
        u = np.asarray(u, dtype=float)
        magnitude = np.abs(u) + eps
        if self.kind == self.KIND_DEGENERATE:
            return np.abs(u) ** self.q
        if self.kind == self.KIND_POWER_SINGULAR:
            f = np.exp(-self.p * np.log(magnitude))
            if self.weight:
                if x is None:
                    raise ParameterError('a weighted right-hand side needs the points')
                f = f * self.weight_at(x)
            return f
        x = np.asarray(x, dtype=float)
        n = x.shape[-1]
        gap = np.sum(x * np.asarray(gradient, dtype=float), axis=-1) - u
        if floor is None:
            if np.any(gap <= 0):
                raise PositivityError('x.Du - u must be positive for the affine-sphere right-hand side')
        else:
            gap = np.maximum(gap, floor)
        return np.exp(-(n + 2 + self.k) * np.log(magnitude) - self.k * np.log(gap))

    def describe(self):
        if self.kind == self.KIND_POWER_SINGULAR:
            if self.weight:
                return 'power_singular(p={:g},weight={})'.format(self.p, ';'.join('{:g}'.format(c) for c in self.weight))
            return 'power_singular(p={:g})'.format(self.p)
        if self.kind == self.KIND_DEGENERATE:
            return 'degenerate(q={:g})'.format(self.q)
        return 'affine_sphere(k={:g})'.format(self.k)


@dataclass(frozen=True)
class SolveConfig:
    h: float = 1.0 / 64
    eps0: Optional[float] = None
    eps_ratio: float = 0.5
    eps_floor: float = 1e-8
    damping: float = 0.5
    tolerance: float = 1e-8
    max_iterations: int = 500000
    inner_sweeps: int = 50
    stencil_width: int = 2
    positivity_floor: float = 1e-8
    initial: str = 'auto'
    # Grids finer than coarse_h start from the interpolated solve at 2h; None solves on h only.
    coarse_h: Optional[float] = 1.0 / 16
    stage_tolerance: float = 1e-5

    INITIAL_CHOICE = (
        ('auto', 'Matched subsolution barrier when available, else the cone'),
        ('barrier', 'Matched subsolution barrier'),
        ('cone', 'Cone -dist(x, boundary)'),
    )

    def __post_init__(self):
        if not self.h > 0:
            raise ParameterError('grid spacing h must be positive')
        if self.eps_floor < 0:
            raise ParameterError('epsilon floor must be nonnegative')
        if not 0 < self.eps_ratio < 1:
            raise ParameterError('epsilon ratio must lie in (0, 1)')
        if not 0 < self.damping <= 1:
            raise ParameterError('damping must lie in (0, 1]')
        if self.stencil_width not in (1, 2, 3):
            raise ParameterError('stencil width must be 1, 2 or 3')
        if self.initial not in dict(self.INITIAL_CHOICE):
            raise ParameterError('unknown initialization {!r}'.format(self.initial))
        if self.coarse_h is not None and not self.coarse_h > 0:
            raise ParameterError('coarse spacing must be positive')
        if not self.stage_tolerance > 0:
            raise ParameterError('stage tolerance must be positive')

    def spacings(self):
        """Grid spacings of the nested solve, coarsest first, ending at h."""
        spacings = [self.h]
        if self.coarse_h is not None:
            while 2.0 * spacings[-1] <= self.coarse_h * (1.0 + 1e-12):
                spacings.append(2.0 * spacings[-1])
        return spacings[::-1]


@dataclass(frozen=True, eq=False)
class GridSpec:
    """
    Interior nodes of h*Z^2 inside a planar domain, with the wide stencil
    resolved against the boundary. Arrays indexed ``[pair, member, side, node]``
    hold, for each orthogonal direction pair, its two members and the forward
    and backward arms: the neighbour node (``size`` marks the boundary slot
    holding the Dirichlet value 0) and the physical arm length.
    """
    h: float
    lower: np.ndarray
    shape: Tuple[int, int]
    mask: np.ndarray
    index: np.ndarray
    nodes: np.ndarray
    lattice: np.ndarray
    directions: np.ndarray
    neighbors: np.ndarray
    arms: np.ndarray
    boundary_points: np.ndarray
    colors: Tuple[np.ndarray, ...]

    @property
    def size(self):
        return len(self.nodes)

    @property
    def full_stencil(self):
        return np.all(self.neighbors < self.size, axis=(0, 1, 2))

    @property
    def axes(self):
        return tuple(self.lower[d] + self.h * np.arange(self.shape[d]) for d in range(2))

    def box_values(self, values):
        box = np.zeros(self.shape)
        box[self.mask] = np.asarray(values, dtype=float)[self.index[self.mask]]
        return box

    def interpolate(self, values, points):
        """Bilinear interpolation of nodal ``values``, taken as 0 off the interior nodes."""
        interpolator = RegularGridInterpolator(self.axes, self.box_values(values), method='linear',
                                               bounds_error=False, fill_value=0.0)
        return interpolator(np.atleast_2d(np.asarray(points, dtype=float)))


@dataclass(eq=False)
class DiscreteSolution(LoggedMixin):
    domain: Domain
    grid: GridSpec
    values: np.ndarray
    rhs: RhsSpec
    eps_final: float
    iterations: int
    residual_norm: float
    floor_bound: bool = False
    history: list = field(default_factory=list)

    def box_values(self):
        return self.grid.box_values(self.values)

    def interpolate(self, points):
        return self.grid.interpolate(self.values, points)

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    window: Tuple[float, float]
    n_points: int
    # Coefficient of the correction term, for the corrected fits.
    linear: float = 0.0

    def __post_init__(self):
        if self.n_points < 5:
            raise ParameterError('a fit needs at least 5 points')
        if not self.window[0] > 0:
            raise ParameterError('fit window must start at a positive distance')


@dataclass(frozen=True, eq=False)
class BootstrapTrace:
    n: int
    q: float
    betas: np.ndarray
    errors: np.ndarray

    @property
    def limit(self):
        return 2.0 / (self.n - self.q)


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated run: one subcommand and every record it may touch."""
    subcommand: str
    domain: Domain
    rhs: RhsSpec
    solver: SolveConfig
    barrier: dict
    fit: dict
    bootstrap: dict
    reproduce: dict
    seed: int = 0
    samples: int = 10000
    output: str = 'out/'
    timing: bool = False

    def output_path(self, name):
        return '{}{}'.format(self.output, name)
