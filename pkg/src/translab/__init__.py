"""Numerical laboratory for fully nonlinear parabolic flows
u_t = F(D^2 u, Du, x) under oblique boundary conditions h(Du, x) = 0,
with convergence diagnostics for translating solutions u = profile + C*t.
"""

__version__ = "0.1.0"

from .boundary import BoundarySpec, Enforcer, enforce
from .config import RunConfig, list_presets, parse_config, preset_config
from .errors import (AdmissibilityError, ConfigError, DegeneracyError,
                     EnforcementError, TranslabError)
from .grid import DomainSpec, Grid, build_grid
from .heat import HeatProblem, exact_solution, fourier_coeffs
from .monitor import ConvergenceReport, Tolerances
from .operators import OperatorSpec, eig_sym, f_derivative, f_value
from .runner import RunResult, execute, run
from .stepper import State, StepConfig, evolve

__all__ = [
    "AdmissibilityError",
    "BoundarySpec",
    "ConfigError",
    "ConvergenceReport",
    "DegeneracyError",
    "DomainSpec",
    "Enforcer",
    "EnforcementError",
    "Grid",
    "HeatProblem",
    "OperatorSpec",
    "RunConfig",
    "RunResult",
    "State",
    "StepConfig",
    "Tolerances",
    "TranslabError",
    "__version__",
    "build_grid",
    "eig_sym",
    "enforce",
    "evolve",
    "exact_solution",
    "execute",
    "f_derivative",
    "f_value",
    "fourier_coeffs",
    "list_presets",
    "parse_config",
    "preset_config",
    "run",
]
