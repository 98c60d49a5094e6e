class SingularMAError(Exception):
    pass


class ConfigError(SingularMAError):
    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__('{}: {}'.format(field, reason))


class DomainError(SingularMAError, ValueError):
    pass


class ParameterError(SingularMAError, ValueError):
    pass


class SingularSetError(SingularMAError, ValueError):
    """
    Raised when a barrier is evaluated on the set where one of its
    fractional powers has a vanishing base.
    """


class PositivityError(SingularMAError, ValueError):
    pass


class EvaluationError(SingularMAError):
    def __init__(self, message, point=None):
        self.point = point
        super().__init__(message)


class FitError(SingularMAError, ValueError):
    pass


class ConvergenceError(SingularMAError):
    def __init__(self, message, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__('{} (iterations={}, residual={:.3e})'.format(message, iterations, residual))
