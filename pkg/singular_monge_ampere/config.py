"""
Flat key=value configuration.

Keys are ``section.key`` for the sections below and bare names for the
top-level settings; ``#`` starts a comment. Command-line flags of the form
``--section.key=value`` override the file, and SINGULAR_MA_OUTPUT_DIR
overrides ``output``.
"""
import logging
import os

from .exceptions import ConfigError
from .forms import (
    BarrierForm, BootstrapForm, DomainForm, ExperimentForm, FitForm,
    ReproduceForm, RhsForm, SolverForm, _configure,
)
from .models import ExperimentConfig

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = 'SINGULAR_MA_OUTPUT_DIR'

# Subcommands that fit along the axis window [window_min or 4h, window_max].
FIT_SUBCOMMANDS = ('fit-exponent', 'mixc-probe')

SECTION_FORMS = {
    'domain': DomainForm,
    'rhs': RhsForm,
    'barrier': BarrierForm,
    'solver': SolverForm,
    'fit': FitForm,
    'bootstrap': BootstrapForm,
    'reproduce': ReproduceForm,
}


def parse_config_text(text):
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError('line {}'.format(number), 'expected key=value, got {!r}'.format(raw.strip()))
        key, value = (part.strip() for part in line.split('=', 1))
        if not key:
            raise ConfigError('line {}'.format(number), 'empty key')
        values[key] = value
    return values


def parse_config_file(path):
    try:
        with open(path, encoding='utf-8') as f:
            return parse_config_text(f.read())
    except OSError as e:
        raise ConfigError('config', 'cannot read {}: {}'.format(path, e.strerror))


def apply_overrides(values, overrides):
    """Merge ``--key=value`` flags into ``values``."""
    merged = dict(values)
    for flag in overrides:
        if not flag.startswith('--') or '=' not in flag:
            raise ConfigError(flag, 'expected --key=value')
        key, value = flag[2:].split('=', 1)
        merged[key.strip()] = value.strip()
    return merged


def apply_environment(values, environ=None):
    environ = os.environ if environ is None else environ
    if environ.get(OUTPUT_DIR_ENV):
        values = dict(values, output=os.path.join(environ[OUTPUT_DIR_ENV], ''))
    return values


def split_sections(values):
    sections = {name: {} for name in SECTION_FORMS}
    top = {}
    for key, value in values.items():
        if '.' in key:
            section, name = key.split('.', 1)
            if section not in sections:
                raise ConfigError(key, 'unknown section {!r}'.format(section))
            sections[section][name] = value
        else:
            top[key] = value
    return sections, top


def load_experiment(subcommand, values, timing=False):
    """Validate every record before any work starts."""
    _configure()
    sections, top = split_sections(values)
    top = dict(top, subcommand=subcommand)
    experiment = ExperimentForm.bind(top).validated()
    domain_form = DomainForm.bind(sections['domain'])
    domain_form.validated()
    rhs_form = RhsForm.bind(sections['rhs'])
    rhs_form.validated()
    config = ExperimentConfig(
        subcommand=subcommand,
        domain=domain_form.domain,
        rhs=rhs_form.rhs,
        solver=SolverForm.bind(sections['solver']).to_config(),
        barrier=BarrierForm.bind(sections['barrier']).validated(),
        fit=FitForm.bind(sections['fit']).validated(),
        bootstrap=BootstrapForm.bind(sections['bootstrap']).validated(),
        reproduce=ReproduceForm.bind(sections['reproduce']).validated(),
        seed=experiment['seed'],
        samples=experiment['samples'],
        output=experiment['output'],
        timing=timing,
    )
    check_consistency(config)
    logger.debug('singular_ma.config.loaded subcommand=%s domain=%s rhs=%s', subcommand, config.domain.describe(),
                 config.rhs.describe())
    return config


def check_consistency(config):
    """Cross-section checks: the weight dimension and a nonempty axis window for the fits."""
    rhs, domain = config.rhs, config.domain
    if rhs.weight and len(rhs.weight) != domain.n + 1:
        raise ConfigError('rhs.weight', 'needs {} coefficients on {}'.format(domain.n + 1, domain.describe()))
    if config.subcommand in FIT_SUBCOMMANDS:
        start = config.fit.get('window_min') or 4.0 * config.solver.h
        if not start < config.fit['window_max']:
            raise ConfigError('fit.window_min', 'window start {:g} is not below the window end {:g}; '
                              'refine solver.h or set the window'.format(start, config.fit['window_max']))
    elif config.subcommand == 'reproduce-all' and not 4.0 * config.reproduce['h_exponent'] < 0.1:
        raise ConfigError('reproduce.h_exponent', 'the exponent fits need 4h below 0.1')
