"""Barriers and a monotone grid solver for singular Monge-Ampere equations."""
from .exceptions import (  # NOQA
    ConfigError, ConvergenceError, DomainError, EvaluationError, FitError,
    ParameterError, PositivityError, SingularMAError, SingularSetError,
)
from .models import (  # NOQA
    Barrier, BootstrapTrace, DiscreteSolution, Domain, ExperimentConfig,
    FitResult, GridSpec, Jet2, RhsSpec, SolveConfig,
)

__version__ = '1.0.0'
