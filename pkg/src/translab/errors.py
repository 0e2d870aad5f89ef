"""Exception types shared across the package."""


class TranslabError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(TranslabError):
    """Invalid run configuration (bad key, bad value, inconsistent fields)."""


class AdmissibilityError(TranslabError):
    """An eigenvalue left the operator branch's domain of definition."""

    def __init__(self, message, offending=None, bound=None):
        super().__init__(message)
        self.offending = offending
        self.bound = bound


class DegeneracyError(TranslabError):
    """The boundary condition lost obliqueness (normal derivative of h ~ 0)."""

    def __init__(self, message, node=None, obliqueness=None):
        super().__init__(message)
        self.node = node
        self.obliqueness = obliqueness


class EnforcementError(TranslabError):
    """Boundary enforcement failed to converge at some node."""

    def __init__(self, message, node=None, residual=None):
        super().__init__(message)
        self.node = node
        self.residual = residual
