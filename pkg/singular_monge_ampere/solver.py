"""
Discrete solutions of det D^2u = f(u, Du, x), u = 0 on the boundary, on
planar convex domains.

The singular right-hand sides are handled by continuation: at each outer
stage f is frozen at the current iterate with |u| regularized to |u| + eps,
the monotone scheme ma_operator(u) = f is relaxed by nonlinear Gauss-Seidel
sweeps, and the result is blended into the iterate with damping lambda.
eps decreases geometrically to its floor between stages.

Grids finer than ``SolveConfig.coarse_h`` are solved nested: the spacings
h0 = 2^m h >= ... >= h are solved in turn, the continuation runs on h0
only, and every finer grid starts at the eps floor from the bilinear
interpolation of the solution one level up.
"""
import logging
import math
import time

import numpy as np
from scipy.optimize import brentq

from . import barriers
from .exceptions import ConvergenceError, DomainError, ParameterError
from .geometry import affine_range, contains_origin_interior, dist_to_boundary, volume
from .grid import build_grid, discrete_affine_gap, discrete_gradient, ma_operator
from .models import DiscreteSolution, LoggedMixin, RhsSpec, SolveConfig

logger = logging.getLogger(__name__)

MIN_DAMPING = 1.0 / 64


def epsilon_zero(n, p, area):
    """
    Largest eps with eps^n (2 eps)^p C(n) area^-2 < 1/2, where
    C(n) = 4^n n^(2n) |B_1|^2.
    """
    if p < 0:
        raise ParameterError('p must be nonnegative')
    if not area > 0:
        raise ParameterError('area must be positive')
    log_constant = math.log(barriers.volume_constant(n))

    def excess(log_eps):
        return (n + p) * log_eps + p * math.log(2.0) + log_constant - 2.0 * math.log(area) + math.log(2.0)

    guess = -(p * math.log(2.0) + log_constant - 2.0 * math.log(area) + math.log(2.0)) / (n + p)
    root = brentq(excess, guess - 1.0, guess + 1.0, xtol=1e-14)
    eps = math.exp(root) * (1.0 - 1e-10)
    while excess(math.log(eps)) >= 0:
        eps *= 1.0 - 1e-10
    return eps


class MongeAmpereSolver(LoggedMixin):
    def __init__(self, *args, **kwargs):
        self.domain = kwargs.pop('domain')
        self.rhs = kwargs.pop('rhs')
        self.config = kwargs.pop('config', None) or SolveConfig()

        super().__init__(*args, **kwargs)

    def solve(self):
        """
        Run the continuation to convergence and return the DiscreteSolution.
        Raises ConvergenceError once ``max_iterations`` sweeps are spent.
        """
        cfg = self.config
        if self.rhs.needs_gradient:
            inside, _ = contains_origin_interior(self.domain)
            if not inside:
                raise DomainError('the affine-sphere equation needs the origin inside {}'.format(self.domain.describe()))
        if self.rhs.weight:
            low, _ = affine_range(self.rhs.weight, self.domain)
            if not low > 0:
                raise ParameterError('the weight of {} is not positive on {}'.format(self.rhs.describe(),
                                                                                    self.domain.describe()))
        started = time.monotonic()
        eps0, floor = self._epsilon_range()
        self.iterations = 0
        self.history = []

        grid = values = None
        for h in cfg.spacings():
            coarse, coarse_values = grid, values
            grid = build_grid(self.domain, h, cfg.stencil_width)
            if coarse is None:
                values, eps = self._continue(grid, self._initial_values(grid), eps0, floor)
            else:
                self.log_debug('singular_ma.solver.nested', h=h, coarse_h=coarse.h)
                values, eps = self._continue(grid, coarse.interpolate(coarse_values, grid.nodes), floor, floor)

        floor_bound = False
        if self.rhs.needs_gradient:
            floor_bound = bool(np.any(discrete_affine_gap(grid, values) < cfg.positivity_floor))
        eps_final = 0.0 if self.rhs.kind == RhsSpec.KIND_DEGENERATE else eps
        solution = DiscreteSolution(domain=self.domain, grid=grid, values=values, rhs=self.rhs, eps_final=eps_final,
                                    iterations=self.iterations, residual_norm=self._residual_norm(grid, values, eps),
                                    floor_bound=floor_bound, history=self.history)
        solution.log_action('singular_ma.solver.converged', domain=self.domain.describe(), rhs=self.rhs.describe(),
                            h=cfg.h, nodes=grid.size, iterations=self.iterations,
                            residual='{:.3e}'.format(solution.residual_norm),
                            runtime='{:.3f}'.format(time.monotonic() - started))
        if floor_bound:
            solution.log_action('singular_ma.solver.floor_bound', floor=cfg.positivity_floor)
        return solution

    def _continue(self, grid, values, eps0, floor):
        """Outer stages on one grid; returns the converged values and the final eps."""
        cfg = self.config
        damping = cfg.damping
        stage = 0
        previous_update = math.inf
        while True:
            eps = max(eps0 * cfg.eps_ratio ** stage, floor)
            tolerance = cfg.tolerance if eps <= floor else max(cfg.tolerance, cfg.stage_tolerance)
            f = self._frozen_rhs(grid, values, eps)
            relaxed, sweeps = self._relax(grid, values, f, tolerance)
            self.iterations += sweeps
            blended = damping * relaxed + (1.0 - damping) * values
            update = float(np.max(np.abs(blended - values)))
            values = blended
            self.history.append({'h': grid.h, 'stage': stage, 'eps': eps, 'sweeps': sweeps, 'update': update,
                                 'damping': damping})
            self.log_debug('singular_ma.solver.stage', h=grid.h, stage=stage, eps='{:.3e}'.format(eps), sweeps=sweeps,
                           update='{:.3e}'.format(update))
            if eps <= floor and update < cfg.tolerance:
                return values, eps
            if self.iterations >= cfg.max_iterations:
                raise ConvergenceError('no convergence on {} for {}'.format(self.domain.describe(), self.rhs.describe()),
                                       self.iterations, self._residual_norm(grid, values, eps))
            if update > previous_update and damping > MIN_DAMPING:
                damping = max(damping / 2.0, MIN_DAMPING)
                self.log_action('singular_ma.solver.damping_reduced', h=grid.h, stage=stage, damping=damping)
            previous_update = update
            stage += 1

    def _epsilon_range(self):
        cfg = self.config
        if self.rhs.kind == RhsSpec.KIND_DEGENERATE:
            return cfg.eps_floor, cfg.eps_floor
        if cfg.eps0 is not None:
            return max(cfg.eps0, cfg.eps_floor), cfg.eps_floor
        if self.rhs.kind == RhsSpec.KIND_POWER_SINGULAR:
            exponent = self.rhs.p
        else:
            exponent = self.domain.n + 2.0 + self.rhs.k
        return max(epsilon_zero(self.domain.n, exponent, volume(self.domain)), cfg.eps_floor), cfg.eps_floor

    def _initial_values(self, grid):
        mode = self.config.initial
        barrier = barriers.matched_subsolution(self.domain, self.rhs) if mode != 'cone' else None
        if mode == 'barrier' and barrier is None:
            raise ParameterError('no matched subsolution for {} on {}'.format(self.rhs.describe(),
                                                                             self.domain.describe()))
        if barrier is not None:
            self.log_debug('singular_ma.solver.initial', barrier=barrier.describe())
            return barriers.value(barrier, grid.nodes)
        return -np.asarray(dist_to_boundary(self.domain, grid.nodes))

    def _frozen_rhs(self, grid, values, eps):
        if self.rhs.needs_gradient:
            return self.rhs.evaluate(values, discrete_gradient(grid, values), grid.nodes, eps=eps,
                                     floor=self.config.positivity_floor)
        return self.rhs.evaluate(values, x=grid.nodes, eps=eps)

    def _relax(self, grid, values, f, tolerance):
        values = values.copy()
        sweeps = 0
        for _ in range(self.config.inner_sweeps):
            updated = self._sweep(grid, values, f)
            sweeps += 1
            change = float(np.max(np.abs(updated - values)))
            values = updated
            if change < tolerance:
                break
        return values, sweeps

    @staticmethod
    def _sweep(grid, values, f):
        """
        One Gauss-Seidel sweep in colour order. For each pair the node value
        solving B1 B2 (s1 - u)(s2 - u) = f below both s is
        (s1 + s2)/2 - sqrt(((s1 - s2)/2)^2 + f / (B1 B2)); the update is the
        minimum over pairs.
        """
        extended = np.append(values, 0.0)
        for color in grid.colors:
            if not len(color):
                continue
            neighbors = grid.neighbors[..., color]
            arms = grid.arms[..., color]
            lp, lm = arms[:, :, 0], arms[:, :, 1]
            up, um = extended[neighbors[:, :, 0]], extended[neighbors[:, :, 1]]
            s = (up / lp + um / lm) / (1.0 / lp + 1.0 / lm)
            coefficient = 2.0 / (lp * lm)
            s1, s2 = s[:, 0], s[:, 1]
            candidates = (s1 + s2) / 2.0 - np.sqrt(((s1 - s2) / 2.0) ** 2
                                                   + f[color] / (coefficient[:, 0] * coefficient[:, 1]))
            extended[color] = np.min(candidates, axis=0)
        return extended[:-1]

    def _residual_norm(self, grid, values, eps):
        f = self._frozen_rhs(grid, values, eps)
        return float(np.max(np.abs(ma_operator(grid, values) - f) / np.maximum(f, 1.0)))


def solve(d, rhs, cfg=None):
    return MongeAmpereSolver(domain=d, rhs=rhs, config=cfg).solve()
