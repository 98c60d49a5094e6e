from django import forms
from django.conf import settings
from django.utils.translation import gettext_lazy as _

from .exceptions import ConfigError, DomainError, ParameterError
from .models import Domain, RhsSpec, SolveConfig

FIT_MODEL_CHOICE = (
    ('power', _('Power law')),
    ('power_linear', _('Power law with a linear term')),
)

SUBCOMMAND_CHOICE = (
    ('verify-barriers', _('Verify the barrier inequalities')),
    ('solve', _('Solve one Dirichlet problem')),
    ('fit-exponent', _('Fit the boundary exponent of a solve')),
    ('compare', _('Check the barrier sandwich of a solve')),
    ('bootstrap', _('Iterate the bootstrap recurrence')),
    ('mixc-probe', _('Probe the affine-sphere right-hand side')),
    ('reproduce-all', _('Run the acceptance suite')),
)


def _configure():
    """Standalone settings for form validation; a host project's settings win."""
    if not settings.configured:
        settings.configure(USE_I18N=False)


def _float_list(value):
    try:
        return tuple(float(c) for c in value.split(',') if c.strip())
    except ValueError:
        raise forms.ValidationError(_('must be a comma-separated list of numbers'), code='invalid')


class SectionForm(forms.Form):
    """
    Validates one config section. ``section`` prefixes field names in the
    ConfigError raised by ``validated``; top-level settings have none.
    """
    section = None

    @classmethod
    def bind(cls, values):
        """Bound form over the field initials updated with ``values``."""
        unknown = sorted(set(values) - set(cls.base_fields))
        if unknown:
            raise ConfigError(cls._qualified(unknown[0]), 'unknown setting')
        data = {name: field.initial for name, field in cls.base_fields.items() if field.initial is not None}
        data.update(values)
        return cls(data)

    @classmethod
    def _qualified(cls, name):
        if name == '__all__':
            return cls.section or 'config'
        return '{}.{}'.format(cls.section, name) if cls.section else name

    def validated(self):
        if self.is_valid():
            return self.cleaned_data
        for name, errors in self.errors.as_data().items():
            raise ConfigError(self._qualified(name), errors[0].messages[0])


class DomainForm(SectionForm):
    section = 'domain'
    kind = forms.ChoiceField(
        label=_('Domain'),
        choices=Domain.KIND_CHOICE,
        initial=Domain.KIND_PARABOLA_CAP,
    )
    n = forms.IntegerField(label=_('Dimension'), min_value=2, initial=2)
    t = forms.FloatField(label=_('Parabola cap scale'), initial=1.0)
    gamma = forms.FloatField(label=_('Parabola cap shift'), initial=0.0)
    radius = forms.FloatField(label=_('Ball radius'), initial=1.0)
    normals = forms.CharField(
        label=_('Unit outward normals'),
        required=False,
        help_text=_('Rows separated by ";", components by ","'),
    )
    offsets = forms.CharField(label=_('Offsets'), required=False)

    def clean_t(self):
        t = self.cleaned_data['t']
        if not t > 0:
            raise forms.ValidationError(_('must be positive'))
        return t

    def clean_gamma(self):
        gamma = self.cleaned_data['gamma']
        if gamma < 0:
            raise forms.ValidationError(_('must be nonnegative'))
        return gamma

    def clean_radius(self):
        radius = self.cleaned_data['radius']
        if not radius > 0:
            raise forms.ValidationError(_('must be positive'))
        return radius

    def clean_normals(self):
        rows = [row for row in self.cleaned_data['normals'].split(';') if row.strip()]
        return tuple(_float_list(row) for row in rows)

    def clean_offsets(self):
        return _float_list(self.cleaned_data['offsets'])

    def clean(self):
        cleaned = super().clean()
        if self.errors:
            return cleaned
        try:
            self.domain = self._build(cleaned)
        except DomainError as e:
            raise forms.ValidationError(str(e))
        return cleaned

    @staticmethod
    def _build(cleaned):
        kind, n = cleaned['kind'], cleaned['n']
        if kind == Domain.KIND_PARABOLA_CAP:
            return Domain.parabola_cap(t=cleaned['t'], gamma=cleaned['gamma'], n=n)
        if kind == Domain.KIND_SPHERE_CAP:
            return Domain.sphere_cap(n=n)
        if kind == Domain.KIND_BALL:
            return Domain.ball(radius=cleaned['radius'], n=n)
        if not cleaned['normals']:
            raise DomainError('half-space domains need normals and offsets')
        return Domain.halfspaces(cleaned['normals'], cleaned['offsets'])


class RhsForm(SectionForm):
    section = 'rhs'
    kind = forms.ChoiceField(label=_('Right-hand side'), choices=RhsSpec.KIND_CHOICE,
                             initial=RhsSpec.KIND_POWER_SINGULAR)
    p = forms.FloatField(label=_('Singular exponent p'), required=False, initial=1.0)
    q = forms.FloatField(label=_('Degenerate exponent q'), required=False, initial=0.0)
    k = forms.FloatField(label=_('Affine-sphere exponent k'), required=False, initial=1.0)
    weight = forms.CharField(
        label=_('Weight'),
        required=False,
        help_text=_('Coefficients c0,c1,...,cn of c0 + c.x multiplying |u|^-p'),
    )

    def clean_weight(self):
        return _float_list(self.cleaned_data['weight'])

    def clean(self):
        cleaned = super().clean()
        if self.errors:
            return cleaned
        kind = cleaned['kind']
        name = {RhsSpec.KIND_POWER_SINGULAR: 'p', RhsSpec.KIND_DEGENERATE: 'q', RhsSpec.KIND_AFFINE_SPHERE: 'k'}[kind]
        if cleaned.get(name) is None:
            self.add_error(name, _('required for this right-hand side'))
            return cleaned
        weight = cleaned.get('weight') or ()
        if weight and kind != RhsSpec.KIND_POWER_SINGULAR:
            self.add_error('weight', _('only the power-singular right-hand side takes a weight'))
            return cleaned
        try:
            self.rhs = RhsSpec(kind=kind, weight=weight, **{name: cleaned[name]})
        except ParameterError as e:
            self.add_error('weight' if weight and len(weight) < 3 else name, str(e))
        return cleaned


class BarrierForm(SectionForm):
    section = 'barrier'
    n = forms.IntegerField(label=_('Dimension'), min_value=2, initial=2)
    p = forms.FloatField(label=_('Singular exponent p'), initial=1.0)
    alpha = forms.FloatField(
        label=_('Exponent alpha'),
        required=False,
        help_text=_('Defaults to 2/(n+p)'),
    )
    t = forms.CharField(label=_('Scales t'), initial='0.5,1,2')
    k = forms.FloatField(label=_('Affine-sphere exponent k'), initial=1.0)
    gamma = forms.FloatField(label=_('Shift gamma'), initial=0.5)

    def clean_p(self):
        p = self.cleaned_data['p']
        if not p > 0:
            raise forms.ValidationError(_('must be positive'))
        return p

    def clean_alpha(self):
        alpha = self.cleaned_data['alpha']
        if alpha is not None and not 0 < alpha < 1:
            raise forms.ValidationError(_('must lie in the open interval (0, 1)'))
        return alpha

    def clean_t(self):
        scales = _float_list(self.cleaned_data['t'])
        if not scales or any(t <= 0 for t in scales):
            raise forms.ValidationError(_('must be a list of positive scales'))
        return scales

    def clean_k(self):
        k = self.cleaned_data['k']
        if not k > 0:
            raise forms.ValidationError(_('must be positive'))
        return k

    def clean_gamma(self):
        gamma = self.cleaned_data['gamma']
        if not 0 < gamma < 1:
            raise forms.ValidationError(_('must lie in the open interval (0, 1)'))
        return gamma


class SolverForm(SectionForm):
    section = 'solver'
    h = forms.FloatField(label=_('Grid spacing'), initial=SolveConfig.h)
    eps0 = forms.FloatField(label=_('Initial epsilon'), required=False)
    eps_ratio = forms.FloatField(label=_('Epsilon ratio'), initial=SolveConfig.eps_ratio)
    eps_floor = forms.FloatField(label=_('Epsilon floor'), initial=SolveConfig.eps_floor)
    damping = forms.FloatField(label=_('Damping'), initial=SolveConfig.damping)
    tolerance = forms.FloatField(label=_('Update tolerance'), initial=SolveConfig.tolerance)
    max_iterations = forms.IntegerField(label=_('Sweep budget'), min_value=1, initial=SolveConfig.max_iterations)
    inner_sweeps = forms.IntegerField(label=_('Sweeps per stage'), min_value=1, initial=SolveConfig.inner_sweeps)
    stencil_width = forms.TypedChoiceField(label=_('Stencil width'), choices=((1, '1'), (2, '2'), (3, '3')),
                                           coerce=int, initial=SolveConfig.stencil_width)
    positivity_floor = forms.FloatField(label=_('Positivity floor'), initial=SolveConfig.positivity_floor)
    initial = forms.ChoiceField(label=_('Initial iterate'), choices=SolveConfig.INITIAL_CHOICE,
                                initial=SolveConfig.initial)
    coarse_h = forms.FloatField(
        label=_('Coarsest nested spacing'),
        required=False,
        initial=SolveConfig.coarse_h,
        help_text=_('Leave empty to solve on h only'),
    )
    stage_tolerance = forms.FloatField(label=_('Update tolerance above the epsilon floor'),
                                       initial=SolveConfig.stage_tolerance)

    def clean_h(self):
        h = self.cleaned_data['h']
        if not h > 0:
            raise forms.ValidationError(_('must be positive'))
        return h

    def clean_eps_ratio(self):
        ratio = self.cleaned_data['eps_ratio']
        if not 0 < ratio < 1:
            raise forms.ValidationError(_('must lie in the open interval (0, 1)'))
        return ratio

    def clean_eps_floor(self):
        floor = self.cleaned_data['eps_floor']
        if floor < 0:
            raise forms.ValidationError(_('must be nonnegative'))
        return floor

    def clean_damping(self):
        damping = self.cleaned_data['damping']
        if not 0 < damping <= 1:
            raise forms.ValidationError(_('must lie in (0, 1]'))
        return damping

    def clean_tolerance(self):
        tolerance = self.cleaned_data['tolerance']
        if not tolerance > 0:
            raise forms.ValidationError(_('must be positive'))
        return tolerance

    def clean_coarse_h(self):
        coarse_h = self.cleaned_data['coarse_h']
        if coarse_h is not None and not coarse_h > 0:
            raise forms.ValidationError(_('must be positive'))
        return coarse_h

    def clean_stage_tolerance(self):
        tolerance = self.cleaned_data['stage_tolerance']
        if not tolerance > 0:
            raise forms.ValidationError(_('must be positive'))
        return tolerance

    def to_config(self):
        return SolveConfig(**{name: value for name, value in self.validated().items()})


class FitForm(SectionForm):
    section = 'fit'
    window_min = forms.FloatField(label=_('Window start'), required=False, help_text=_('Defaults to 4h'))
    window_max = forms.FloatField(label=_('Window end'), initial=0.1)
    count = forms.IntegerField(label=_('Samples along the axis'), min_value=5, initial=40)
    model = forms.ChoiceField(label=_('Fitted profile'), choices=FIT_MODEL_CHOICE, initial='power_linear')

    def clean(self):
        cleaned = super().clean()
        if self.errors:
            return cleaned
        start = cleaned.get('window_min')
        if start is not None and not 0 < start < cleaned['window_max']:
            self.add_error('window_min', _('must be positive and below the window end'))
        return cleaned


class BootstrapForm(SectionForm):
    section = 'bootstrap'
    n = forms.IntegerField(label=_('Dimension'), min_value=3, initial=3)
    q = forms.FloatField(label=_('Degenerate exponent q'), initial=1.0)
    steps = forms.IntegerField(label=_('Steps'), min_value=0, initial=10)
    beta = forms.FloatField(label=_('Target exponent'), required=False)

    def clean(self):
        cleaned = super().clean()
        if self.errors:
            return cleaned
        if not 0 < cleaned['q'] < cleaned['n'] - 2:
            self.add_error('q', _('must lie in the open interval (0, n - 2)'))
        elif cleaned.get('beta') is not None and not cleaned['beta'] < 2.0 / (cleaned['n'] - cleaned['q']):
            self.add_error('beta', _('must lie below the limit 2/(n - q)'))
        return cleaned


class ReproduceForm(SectionForm):
    section = 'reproduce'
    h_smoke = forms.FloatField(label=_('Smoke test spacing'), initial=1.0 / 64)
    h_sandwich = forms.FloatField(label=_('Sandwich spacing'), initial=1.0 / 128)
    h_exponent = forms.FloatField(label=_('Exponent spacing'), initial=1.0 / 256)

    def clean(self):
        cleaned = super().clean()
        for name in ('h_smoke', 'h_sandwich', 'h_exponent'):
            if name in cleaned and not cleaned[name] > 0:
                self.add_error(name, _('must be positive'))
        return cleaned


class ExperimentForm(SectionForm):
    subcommand = forms.ChoiceField(label=_('Subcommand'), choices=SUBCOMMAND_CHOICE)
    seed = forms.IntegerField(label=_('Sampling seed'), min_value=0, initial=0)
    samples = forms.IntegerField(label=_('Samples per check'), min_value=1, initial=10000)
    output = forms.CharField(label=_('Output path prefix'), initial='out/')
