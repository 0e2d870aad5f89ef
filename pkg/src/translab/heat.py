"""Closed-form solution of the two-flux heat problem on [0, 1].

With u_t = u_xx, u_x(0) = alpha, u_x(1) = beta, the solution splits into a
steady quadratic profile V, a linear-in-time drift (beta - alpha) t, and a
decaying cosine series:

    u(x, t) = (beta - alpha) t + V(x) + sum_n C_n exp(-n^2 pi^2 t) cos(n pi x)
    V(x)    = (beta - alpha)/2 x^2 + alpha x

so the flow translates vertically at speed beta - alpha once the series has
died.  This is the one analytically exact case in the laboratory and serves
as ground truth for the finite-difference pipeline.

Coefficients use the cosine-basis normalization on [0, 1]:
C_0 = integral of (u0 - V), C_n = 2 integral of (u0 - V) cos(n pi x) for
n >= 1 — the factor 2 is what makes the series reproduce u0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class HeatProblem:
    """Two-flux heat problem: endpoint slopes, initial data, truncation."""

    alpha: float
    beta: float
    u0: object = None          # callable x -> u0(x); defaults to V
    n_modes: int = 64
    quad_resolution: int = 2049

    def __post_init__(self):
        if self.n_modes < 1:
            raise ConfigError(f"n_modes must be >= 1, got {self.n_modes}")
        if self.quad_resolution < 5:
            raise ConfigError("quadrature resolution too small")


def steady_profile(problem: HeatProblem):
    """The steady translator profile V with V'(0) = alpha, V'(1) = beta."""
    a, b = problem.alpha, problem.beta

    def V(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (b - a) * x * x + a * x

    return V


def drift(problem: HeatProblem, t: float) -> float:
    """Vertical translation accumulated by time t."""
    return (problem.beta - problem.alpha) * t


def _simpson(y: np.ndarray, h: float) -> float:
    n = len(y) - 1
    if n % 2:
        raise ValueError("Simpson rule needs an even interval count")
    return h / 3.0 * (y[0] + y[-1] + 4.0 * np.sum(y[1:-1:2])
                      + 2.0 * np.sum(y[2:-1:2]))


def _quad_nodes(problem: HeatProblem):
    m = problem.quad_resolution
    if m % 2 == 0:
        m += 1
    x = np.linspace(0.0, 1.0, m)
    return x, x[1] - x[0]


def fourier_coeffs(problem: HeatProblem) -> np.ndarray:
    """C_0 .. C_{n_modes} of u0 - V in the cosine basis, by composite
    Simpson quadrature."""
    V = steady_profile(problem)
    x, h = _quad_nodes(problem)
    if problem.u0 is None:
        g = np.zeros_like(x)
    else:
        g = np.asarray(problem.u0(x), dtype=float) - V(x)
    C = np.empty(problem.n_modes + 1)
    C[0] = _simpson(g, h)
    for n in range(1, problem.n_modes + 1):
        C[n] = 2.0 * _simpson(g * np.cos(n * np.pi * x), h)
    return C


def exact_solution(problem: HeatProblem, x, t: float,
                   coeffs: np.ndarray = None):
    """Evaluate the truncated series at (x, t).  Pass precomputed coeffs
    when evaluating many times."""
    if coeffs is None:
        coeffs = fourier_coeffs(problem)
    x = np.asarray(x, dtype=float)
    V = steady_profile(problem)
    out = drift(problem, t) + V(x) + coeffs[0]
    n = np.arange(1, len(coeffs))
    decay = coeffs[1:] * np.exp(-(n * np.pi) ** 2 * t)
    out = out + np.cos(np.pi * np.outer(x, n)) @ decay
    return out if out.shape else float(out)


def truncation_bound(problem: HeatProblem, t: float,
                     coeffs: np.ndarray = None) -> float:
    """Geometric tail estimate |C_N| e^{-N^2 pi^2 t} N for the dropped
    modes."""
    if coeffs is None:
        coeffs = fourier_coeffs(problem)
    N = problem.n_modes
    return abs(coeffs[N]) * np.exp(-(N * np.pi) ** 2 * t) * N


def compare(problem: HeatProblem, grid, state) -> float:
    """Max-norm gap between a finite-difference state on an interval grid
    and the oracle at the same time."""
    if grid.ndim != 1:
        raise ValueError("oracle comparison is defined on intervals only")
    lo, hi = grid.spec.bounds[0]
    if not (abs(lo) < 1e-12 and abs(hi - 1.0) < 1e-12):
        raise ValueError("oracle problem lives on [0, 1]")
    exact = exact_solution(problem, grid.axes[0], state.t)
    return float(np.max(np.abs(state.u - exact)))
