"""
Command-line entry point ``singular-ma``.

Exit status: 0 when every check passes, 1 when a check fails or a
computation raises, 2 for an invalid configuration.
"""
import argparse
import logging
import sys
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analysis
from .config import apply_environment, apply_overrides, load_experiment, parse_config_file
from .exceptions import ConfigError, SingularMAError
from .export import emit_csv, nodal_rows
from .models import RhsSpec
from .services import (
    CRITERION_FIELDS, VERIFY_FIELDS, AcceptanceSuite, BarrierVerifier,
    barrier_family, compare_rows, fit_row, matched_window,
)
from .solver import solve as solve_problem

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


@dataclass(frozen=True)
class Command:
    name: str
    handler: Callable
    help: str


def command(name, handler, help=''):
    return Command(name=name, handler=handler, help=help)


def _status(rows):
    return EXIT_OK if all(row['pass'] for row in rows) else EXIT_FAILED


def verify_barriers(cfg):
    rng = np.random.default_rng(cfg.seed)
    b = cfg.barrier
    rows = [
        BarrierVerifier(barrier=barrier, rng=rng, samples=cfg.samples).verify()
        for barrier in barrier_family(b['n'], b['p'], alpha=b['alpha'], scales=b['t'], k=b['k'], gamma=b['gamma'])
    ]
    emit_csv(rows, cfg.output_path('verify-barriers.csv'), VERIFY_FIELDS)
    return _status(rows)


def solve(cfg):
    started = time.monotonic()
    solution = solve_problem(cfg.domain, cfg.rhs, cfg.solver)
    runtime = time.monotonic() - started
    emit_csv(nodal_rows(solution), cfg.output_path('solve-nodes.csv'), ['x1', 'x2', 'u'])
    summary = {
        'domain': cfg.domain.describe(),
        'rhs': cfg.rhs.describe(),
        'h': cfg.solver.h,
        'iterations': solution.iterations,
        'eps_final': solution.eps_final,
        'residual_norm': solution.residual_norm,
        'sup_norm': solution.sup_norm(),
        'floor_bound': solution.floor_bound,
    }
    if cfg.timing:
        summary['runtime'] = runtime
    logger.info('singular_ma.cli.solve runtime=%.3f', runtime)
    emit_csv([summary], cfg.output_path('solve-summary.csv'))
    return EXIT_OK


def fit_exponent(cfg):
    solution = solve_problem(cfg.domain, cfg.rhs, cfg.solver)
    row = fit_row(solution, matched_window(cfg, cfg.solver.h), cfg.fit['count'], cfg.fit['model'])
    emit_csv([row], cfg.output_path('fit-exponent.csv'))
    return _status([row])


def compare(cfg):
    solution = solve_problem(cfg.domain, cfg.rhs, cfg.solver)
    rows = compare_rows(solution, cfg.samples, np.random.default_rng(cfg.seed))
    emit_csv(rows, cfg.output_path('compare.csv'))
    return _status(rows)


def bootstrap(cfg):
    b = cfg.bootstrap
    trace = analysis.bootstrap(b['n'], b['q'], b['steps'])
    rows = []
    for k in range(1, b['steps'] + 1):
        error = trace.limit - trace.betas[k]
        rows.append({'n': b['n'], 'q': b['q'], 'k': k, 'beta': trace.betas[k], 'error': error,
                     'closed_form_error': trace.errors[k], 'pass': abs(error - trace.errors[k]) <= 1e-12})
    if b['beta'] is not None:
        logger.info('singular_ma.cli.bootstrap target=%.15g minimal_steps=%d', b['beta'],
                    analysis.minimal_bootstrap_steps(b['n'], b['q'], b['beta']))
    emit_csv(rows, cfg.output_path('bootstrap.csv'),
             ['n', 'q', 'k', 'beta', 'error', 'closed_form_error', 'pass'])
    return _status(rows)


def mixc_probe(cfg):
    if cfg.rhs.kind != RhsSpec.KIND_AFFINE_SPHERE:
        raise ConfigError('rhs.kind', 'mixc-probe needs the affine_sphere right-hand side')
    solution = solve_problem(cfg.domain, cfg.rhs, cfg.solver)
    fit, report = analysis.mixc_probe(solution, cfg.rhs.k, cfg.domain.gamma, matched_window(cfg, cfg.solver.h))
    row = {
        'n': cfg.domain.n,
        'k': cfg.rhs.k,
        'gamma': cfg.domain.gamma,
        'h': cfg.solver.h,
        'slope': fit.slope,
        'exponent': report['exponent'],
        'constant': report['constant'],
        'gap_slope': report['gap_slope'],
        'gap_exponent': report['gap_exponent'],
        'tolerance': analysis.MIXC_TOLERANCE,
        'pass': report['consistent'] and report['gap_consistent'],
    }
    emit_csv([row], cfg.output_path('mixc-probe.csv'))
    return _status([row])


def reproduce_all(cfg):
    suite = AcceptanceSuite(config=cfg)
    rows = suite.run()
    emit_csv(rows, cfg.output_path('reproduce-all.csv'), CRITERION_FIELDS)
    return EXIT_OK if suite.passed else EXIT_FAILED


commands = [
    command('verify-barriers', verify_barriers, 'check the sign of every barrier inequality'),
    command('solve', solve, 'solve one Dirichlet problem and dump the nodal values'),
    command('fit-exponent', fit_exponent, 'fit the boundary exponent along the axis'),
    command('compare', compare, 'check the barrier sandwich of a solve'),
    command('bootstrap', bootstrap, 'iterate the bootstrap recurrence'),
    command('mixc-probe', mixc_probe, 'fit the degeneracy rate of the affine-sphere right-hand side'),
    command('reproduce-all', reproduce_all, 'run the acceptance suite'),
]


def build_parser():
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument('--config', help='key=value configuration file')
    common.add_argument('--verbose', action='store_true', help='log at debug level')
    common.add_argument('--timing', action='store_true', help='add the runtime to the solve summary')
    parser = argparse.ArgumentParser(prog='singular-ma', allow_abbrev=False,
                                     epilog='Settings are overridden with --section.key=value flags.')
    subparsers = parser.add_subparsers(dest='subcommand', required=True)
    for entry in commands:
        subparsers.add_parser(entry.name, parents=[common], help=entry.help, allow_abbrev=False)
    return parser


def main(argv=None):
    args, overrides = build_parser().parse_known_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(asctime)s %(levelname)s %(name)s %(message)s')
    handler = {entry.name: entry.handler for entry in commands}[args.subcommand]
    try:
        values = parse_config_file(args.config) if args.config else {}
        values = apply_environment(apply_overrides(values, overrides))
        cfg = load_experiment(args.subcommand, values, timing=args.timing)
        return handler(cfg)
    except ConfigError as e:
        logger.error('singular_ma.cli.config_error %s', e)
        return EXIT_CONFIG
    except SingularMAError as e:
        logger.error('singular_ma.cli.failed subcommand=%s %s: %s', args.subcommand, type(e).__name__, e)
        return EXIT_FAILED


if __name__ == '__main__':
    sys.exit(main())
