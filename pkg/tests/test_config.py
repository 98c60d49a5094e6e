import pytest

from singular_monge_ampere.config import (
    OUTPUT_DIR_ENV, apply_environment, apply_overrides, load_experiment, parse_config_file, parse_config_text,
)
from singular_monge_ampere.exceptions import ConfigError
from singular_monge_ampere.models import Domain, RhsSpec


def test_parse_config_text():
    text = 'domain.kind = ball  # unit disc\n\n# seeded\nseed=3\nsolver.h = 0.125\n'
    assert parse_config_text(text) == {'domain.kind': 'ball', 'seed': '3', 'solver.h': '0.125'}


def test_malformed_line_is_reported_by_number():
    with pytest.raises(ConfigError) as excinfo:
        parse_config_text('seed = 1\nbogus\n')
    assert excinfo.value.field == 'line 2'
    with pytest.raises(ConfigError):
        parse_config_text('= 1')


def test_parse_config_file(tmp_path):
    path = tmp_path / 'run.cfg'
    path.write_text('rhs.p = 4\n', encoding='utf-8')
    assert parse_config_file(str(path)) == {'rhs.p': '4'}
    with pytest.raises(ConfigError) as excinfo:
        parse_config_file(str(tmp_path / 'missing.cfg'))
    assert excinfo.value.field == 'config'


def test_overrides_win_over_the_file():
    merged = apply_overrides({'seed': '1', 'rhs.p': '2'}, ['--seed=2', '--solver.h=0.25'])
    assert merged == {'seed': '2', 'rhs.p': '2', 'solver.h': '0.25'}
    with pytest.raises(ConfigError):
        apply_overrides({}, ['seed=2'])


def test_environment_overrides_the_output():
    assert apply_environment({'output': 'a/'}, {OUTPUT_DIR_ENV: '/tmp/runs'}) == {'output': '/tmp/runs/'}
    assert apply_environment({'output': 'a/'}, {}) == {'output': 'a/'}


def test_defaults():
    cfg = load_experiment('solve', {})
    assert cfg.domain == Domain.parabola_cap()
    assert cfg.rhs == RhsSpec.power_singular(1.0)
    assert cfg.solver.h == pytest.approx(1.0 / 64)
    assert cfg.solver.eps0 is None
    assert cfg.seed == 0
    assert cfg.samples == 10000
    assert cfg.output_path('solve-nodes.csv') == 'out/solve-nodes.csv'
    assert cfg.barrier['t'] == (0.5, 1.0, 2.0)
    assert cfg.barrier['alpha'] is None
    assert cfg.bootstrap == {'n': 3, 'q': 1.0, 'steps': 10, 'beta': None}
    assert not cfg.timing


def test_sections_are_typed():
    cfg = load_experiment('solve', {
        'domain.kind': 'ball',
        'domain.radius': '2',
        'rhs.kind': 'degenerate',
        'rhs.q': '0.5',
        'solver.stencil_width': '3',
        'solver.initial': 'cone',
        'samples': '500',
    }, timing=True)
    assert cfg.domain == Domain.ball(radius=2.0)
    assert cfg.rhs == RhsSpec.degenerate(0.5)
    assert cfg.solver.stencil_width == 3
    assert cfg.solver.initial == 'cone'
    assert cfg.samples == 500
    assert cfg.timing


def test_halfspace_domain():
    cfg = load_experiment('solve', {
        'domain.kind': 'halfspaces',
        'domain.normals': '1,0; -1,0; 0,1; 0,-1',
        'domain.offsets': '1,1,1,1',
    })
    assert cfg.domain.kind == Domain.KIND_HALFSPACES
    assert cfg.domain.normals == ((1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0))


@pytest.mark.parametrize('values,field', [
    ({'barrier.alpha': '1.5'}, 'barrier.alpha'),
    ({'solver.foo': '1'}, 'solver.foo'),
    ({'colour': 'red'}, 'colour'),
    ({'mesh.h': '0.1'}, 'mesh.h'),
    ({'rhs.kind': 'affine_sphere', 'rhs.k': '0'}, 'rhs.k'),
    ({'rhs.kind': 'degenerate', 'rhs.q': ''}, 'rhs.q'),
    ({'rhs.kind': 'quadratic'}, 'rhs.kind'),
    ({'solver.h': '0'}, 'solver.h'),
    ({'solver.h': 'fine'}, 'solver.h'),
    ({'solver.stencil_width': '4'}, 'solver.stencil_width'),
    ({'bootstrap.q': '1.5'}, 'bootstrap.q'),
    ({'bootstrap.beta': '2'}, 'bootstrap.beta'),
    ({'fit.window_min': '0.2'}, 'fit.window_min'),
    ({'domain.kind': 'halfspaces'}, 'domain'),
    ({'domain.t': '-1'}, 'domain.t'),
    ({'seed': '-1'}, 'seed'),
    ({'rhs.weight': '1,0'}, 'rhs.weight'),
    ({'rhs.weight': '1,0,0,0'}, 'rhs.weight'),
    ({'rhs.kind': 'degenerate', 'rhs.q': '0', 'rhs.weight': '1,0,0'}, 'rhs.weight'),
    ({'solver.coarse_h': '-1'}, 'solver.coarse_h'),
    ({'solver.stage_tolerance': '0'}, 'solver.stage_tolerance'),
    ({'fit.model': 'cubic'}, 'fit.model'),
])
def test_invalid_settings(values, field):
    with pytest.raises(ConfigError) as excinfo:
        load_experiment('solve', values)
    assert excinfo.value.field == field


def test_alpha_message_names_the_interval():
    with pytest.raises(ConfigError, match=r'\(0, 1\)'):
        load_experiment('verify-barriers', {'barrier.alpha': '1.5'})


def test_unknown_subcommand():
    with pytest.raises(ConfigError) as excinfo:
        load_experiment('plot', {})
    assert excinfo.value.field == 'subcommand'


def test_solver_and_fit_extensions():
    cfg = load_experiment('fit-exponent', {
        'rhs.weight': '1, 0.2, 0',
        'solver.coarse_h': '',
        'solver.stage_tolerance': '1e-6',
        'fit.model': 'power',
    })
    assert cfg.rhs == RhsSpec.power_singular(1.0, weight=(1.0, 0.2, 0.0))
    assert cfg.solver.coarse_h is None
    assert cfg.solver.stage_tolerance == 1e-6
    assert cfg.fit['model'] == 'power'
    defaults = load_experiment('fit-exponent', {})
    assert defaults.solver.coarse_h == pytest.approx(1.0 / 16)
    assert defaults.fit['model'] == 'power_linear'


@pytest.mark.parametrize('subcommand', ['fit-exponent', 'mixc-probe'])
def test_empty_fit_window_is_a_config_error(subcommand):
    with pytest.raises(ConfigError) as excinfo:
        load_experiment(subcommand, {'solver.h': '0.05'})
    assert excinfo.value.field == 'fit.window_min'
    load_experiment(subcommand, {'solver.h': '0.05', 'fit.window_min': '0.02'})
    load_experiment('solve', {'solver.h': '0.05'})


def test_coarse_acceptance_spacing_is_a_config_error():
    with pytest.raises(ConfigError) as excinfo:
        load_experiment('reproduce-all', {'reproduce.h_exponent': '0.05'})
    assert excinfo.value.field == 'reproduce.h_exponent'


def test_loading_configures_form_validation():
    from django.conf import settings

    from singular_monge_ampere.forms import _configure

    load_experiment('bootstrap', {})
    assert settings.configured
    _configure()
    assert not settings.USE_I18N
