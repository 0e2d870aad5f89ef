"""Closed-form heat oracle: coefficients, series, and self-consistency."""
import numpy as np
import pytest

from translab.errors import ConfigError
from translab.grid import DomainSpec, build_grid
from translab.heat import (
    HeatProblem,
    compare,
    drift,
    exact_solution,
    fourier_coeffs,
    steady_profile,
    truncation_bound,
)
from translab.stepper import State


def V01():
    return steady_profile(HeatProblem(alpha=0.0, beta=1.0))


def test_steady_profile_examples():
    V = V01()
    x = np.linspace(0.0, 1.0, 11)
    assert np.allclose(V(x), 0.5 * x * x, atol=1e-15)
    Vc = steady_profile(HeatProblem(alpha=0.7, beta=0.7))
    assert np.allclose(Vc(x), 0.7 * x, atol=1e-15)
    Vr = steady_profile(HeatProblem(alpha=1.0, beta=0.0))
    assert np.allclose(Vr(x), -0.5 * x * x + x, atol=1e-15)


def test_steady_profile_slopes():
    for a, b in [(0.0, 1.0), (-2.0, 0.5), (3.0, 3.0)]:
        V = steady_profile(HeatProblem(alpha=a, beta=b))
        eps = 1e-7
        assert (V(eps) - V(0.0)) / eps == pytest.approx(a, abs=1e-6)
        assert (V(1.0) - V(1.0 - eps)) / eps == pytest.approx(b, abs=1e-6)


def test_drift():
    p = HeatProblem(alpha=0.0, beta=1.0)
    assert drift(p, 2.0) == pytest.approx(2.0)
    assert drift(p, 0.0) == 0.0
    assert drift(HeatProblem(alpha=0.4, beta=0.4), 9.0) == 0.0


def test_single_mode_coefficients():
    V = V01()
    p = HeatProblem(alpha=0.0, beta=1.0,
                    u0=lambda x: V(x) + np.cos(np.pi * x), n_modes=8)
    C = fourier_coeffs(p)
    assert C[1] == pytest.approx(1.0, abs=1e-10)
    others = np.delete(C, 1)
    assert np.max(np.abs(others)) < 1e-10


def test_constant_offset_coefficient():
    V = V01()
    p = HeatProblem(alpha=0.0, beta=1.0, u0=lambda x: V(x) + 1.0, n_modes=6)
    C = fourier_coeffs(p)
    assert C[0] == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(C[1:])) < 1e-12


def test_linear_offset_coefficients():
    # 2 * integral of x cos(n pi x) = 2((-1)^n - 1)/(n pi)^2
    V = V01()
    p = HeatProblem(alpha=0.0, beta=1.0, u0=lambda x: V(x) + x, n_modes=6)
    C = fourier_coeffs(p)
    assert C[0] == pytest.approx(0.5, abs=1e-10)
    assert C[1] == pytest.approx(-4.0 / np.pi ** 2, abs=1e-10)
    assert abs(C[2]) < 1e-10
    assert C[3] == pytest.approx(-4.0 / (9.0 * np.pi ** 2), abs=1e-10)


def test_parseval_inequality():
    rng = np.random.default_rng(17)
    for _ in range(5):
        a, b = rng.normal(size=2)
        w = rng.normal(size=3) * 0.5
        p = HeatProblem(
            alpha=a, beta=b, n_modes=32,
            u0=lambda x, a=a, b=b, w=w: 0.5 * (b - a) * x * x + a * x
            + w[0] * np.cos(np.pi * x) + w[1] * x ** 3 + w[2])
        C = fourier_coeffs(p)
        x, h = np.linspace(0.0, 1.0, 4097), 1.0 / 4096
        g = p.u0(x) - steady_profile(p)(x)
        mass = np.trapezoid(g * g, x)
        assert C[0] ** 2 + 0.5 * np.sum(C[1:] ** 2) <= mass + 1e-8


def test_exact_solution_pure_translator():
    p = HeatProblem(alpha=0.2, beta=0.9)      # u0 defaults to V
    V = steady_profile(p)
    x = np.linspace(0.0, 1.0, 33)
    for t in (0.0, 0.3, 2.0):
        u = exact_solution(p, x, t)
        assert np.max(np.abs(u - (V(x) + 0.7 * t))) < 1e-12


def test_exact_solution_single_mode():
    V = V01()
    p = HeatProblem(alpha=0.0, beta=1.0,
                    u0=lambda x: V(x) + np.cos(np.pi * x), n_modes=16)
    C = fourier_coeffs(p)
    x = np.linspace(0.0, 1.0, 101)
    for t in (0.0, 0.1, 1.0):
        want = 0.5 * x * x + t + np.exp(-np.pi ** 2 * t) * np.cos(np.pi * x)
        got = exact_solution(p, x, t, coeffs=C)
        assert np.max(np.abs(got - want)) < 1e-9


def test_initial_condition_reproduced():
    V = V01()
    p = HeatProblem(alpha=0.0, beta=1.0, n_modes=64,
                    u0=lambda x: V(x) + 0.1 * np.cos(np.pi * x)
                    + 0.02 * np.cos(3 * np.pi * x))
    x = np.linspace(0.0, 1.0, 201)
    got = exact_solution(p, x, 0.0)
    assert np.max(np.abs(got - p.u0(x))) < 1e-9


def test_boundary_slopes_analytic():
    # each series term has derivative -n pi C_n sin(n pi x) e^{...}, which
    # vanishes at both endpoints, so u_x(0) = alpha, u_x(1) = beta exactly;
    # verify by summing the differentiated series at the endpoints
    p = HeatProblem(alpha=0.3, beta=-0.6, n_modes=32,
                    u0=lambda x: 0.5 * (-0.9) * x * x + 0.3 * x
                    + 0.2 * np.cos(2 * np.pi * x))
    C = fourier_coeffs(p)
    n = np.arange(1, len(C))
    for t in (0.01, 0.5):
        tail0 = np.sum(-C[1:] * n * np.pi * np.exp(-(n * np.pi) ** 2 * t)
                       * np.sin(0.0))
        tail1 = np.sum(-C[1:] * n * np.pi * np.exp(-(n * np.pi) ** 2 * t)
                       * np.sin(n * np.pi))
        assert abs(p.alpha + tail0 - p.alpha) < 1e-10
        assert abs(p.beta + tail1 - p.beta) < 1e-10


def test_long_time_decay_rate():
    V = V01()
    p = HeatProblem(alpha=0.0, beta=1.0, n_modes=32,
                    u0=lambda x: V(x) + 0.7 * np.cos(np.pi * x))
    C = fourier_coeffs(p)
    x = np.linspace(0.0, 1.0, 64)
    for t in (1.0, 2.0, 3.0):
        gap = exact_solution(p, x, t, coeffs=C) - (t + V(x) + C[0])
        top = np.max(np.abs(gap))
        assert top <= 0.7 * np.exp(-np.pi ** 2 * t) * 1.001
        assert top >= 0.7 * np.exp(-np.pi ** 2 * t) * 0.5


def test_discrete_residual_of_oracle():
    # u_t - u_xx of the oracle under second-order stencils on 401 nodes
    p = HeatProblem(alpha=0.0, beta=1.0, n_modes=64,
                    u0=lambda x: 0.5 * x * x + 0.1 * np.cos(np.pi * x))
    C = fourier_coeffs(p)
    x = np.linspace(0.0, 1.0, 401)
    h = x[1] - x[0]
    t, dt = 0.5, 1e-5
    um = exact_solution(p, x, t - dt, coeffs=C)
    u0 = exact_solution(p, x, t, coeffs=C)
    up = exact_solution(p, x, t + dt, coeffs=C)
    ut = (up - um) / (2 * dt)
    uxx = (u0[2:] - 2 * u0[1:-1] + u0[:-2]) / h ** 2
    assert np.max(np.abs(ut[1:-1] - uxx)) <= 2e-4


def test_truncation_bound_dominates_tail():
    p = HeatProblem(alpha=0.0, beta=1.0, n_modes=4,
                    u0=lambda x: 0.5 * x * x + x ** 3)
    rich = HeatProblem(alpha=0.0, beta=1.0, n_modes=64, u0=p.u0)
    x = np.linspace(0.0, 1.0, 41)
    for t in (0.05, 0.2):
        gap = np.max(np.abs(exact_solution(p, x, t)
                            - exact_solution(rich, x, t)))
        assert gap <= truncation_bound(p, t) + 1e-12


def test_compare_oracle_with_itself():
    p = HeatProblem(alpha=0.0, beta=1.0,
                    u0=lambda x: 0.5 * x * x + 0.1 * np.cos(np.pi * x))
    grid = build_grid(DomainSpec(kind="interval", resolution=101,
                                 bounds=((0.0, 1.0),)))
    C = fourier_coeffs(p)
    u = exact_solution(p, grid.axes[0], 0.5, coeffs=C)
    assert compare(p, grid, State(u, 0.5)) == 0.0


def test_compare_rejects_mismatched_grid():
    p = HeatProblem(alpha=0.0, beta=1.0)
    grid = build_grid(DomainSpec(kind="interval", resolution=11,
                                 bounds=((0.0, 2.0),)))
    with pytest.raises(ValueError):
        compare(p, grid, State(np.zeros(11), 0.0))


def test_problem_validation():
    with pytest.raises(ConfigError):
        HeatProblem(alpha=0.0, beta=1.0, n_modes=0)