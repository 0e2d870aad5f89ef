"""Run orchestration: wire a configuration into grid, operator, boundary,
stepper, and monitor; persist the results.

Artifacts written to the configured output directory:

    series.csv       one row per checkpoint pair (see monitor.SERIES_FIELDS)
    report.json      the full ConvergenceReport
    profile.csv      node coordinates and the extracted profile
    convergence.png  oscillation / speed-spread decay
    profile.png      the profile itself

All numbers in the delimited files carry 17 significant digits, so reruns
of the same configuration are byte-identical.

Exit status contract: 0 converged, 2 completed without converging, 1 any
error (the error text lands in the report).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import heat, monitor
from .boundary import BoundarySpec, Enforcer
from .config import InitialSpec, RunConfig
from .errors import TranslabError
from .grid import EXTERIOR, Grid, build_grid
from .monitor import SERIES_FIELDS, ConvergenceReport
from .stepper import State, evolve

EXIT_CONVERGED = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


@dataclass
class RunResult:
    exit_code: int
    report: ConvergenceReport
    grid: Grid = None
    paths: dict = None


def build_initial(grid: Grid, initial: InitialSpec,
                  boundary: BoundarySpec) -> np.ndarray:
    """Initial data on the lattice.

    quad_cos starts from the translator-shaped quadratic matched to the
    boundary data — the steady two-flux profile on intervals, the scaled
    paraboloid whose gradient covers the target disk on disks — and adds an
    amplitude-scaled cosine bump (rim-damped on disks so the boundary
    condition stays approximately satisfied at t = 0).
    """
    pts = grid.node_coordinates()
    if initial.kind == "polynomial":
        u = np.zeros(grid.shape)
        for a, coeffs in enumerate(initial.coefficients):
            u = u + np.polynomial.polynomial.polyval(pts[a], list(coeffs))
    elif grid.ndim == 1:
        lo, hi = grid.spec.bounds[0]
        x = pts[0]
        V = heat.steady_profile(
            heat.HeatProblem(alpha=boundary.alpha, beta=boundary.beta))
        xi = (x - lo) / (hi - lo)
        u = V(x) + initial.amplitude * np.cos(np.pi * xi)
    elif grid.spec.kind == "disk":
        c = np.asarray(grid.spec.center)
        r = grid.spec.radius
        rho2 = sum((pts[a] - c[a]) ** 2 for a in range(2))
        base = 0.5 * (boundary.radius / r) * rho2
        damp = 1.0 - rho2 / (r * r)
        u = base + initial.amplitude * damp * np.cos(np.pi * (pts[0] - c[0]))
    else:
        xi = [(pts[a] - lo) / (hi - lo)
              for a, (lo, hi) in enumerate(grid.spec.bounds)]
        u = initial.amplitude * np.cos(np.pi * xi[0]) * np.cos(np.pi * xi[1])
        u = np.asarray(u, dtype=float)
    u = np.asarray(u, dtype=float).copy()
    u[grid.classification == EXTERIOR] = np.nan
    return u


def initial_callable_1d(initial: InitialSpec, boundary: BoundarySpec):
    """The same initial data as build_initial on [0, 1], as a function —
    what the closed-form oracle integrates against."""
    if initial.kind == "polynomial":
        coeffs = list(initial.coefficients[0])
        return lambda x: np.polynomial.polynomial.polyval(x, coeffs)
    V = heat.steady_profile(
        heat.HeatProblem(alpha=boundary.alpha, beta=boundary.beta))
    A = initial.amplitude
    return lambda x: V(x) + A * np.cos(np.pi * np.asarray(x))


def execute(cfg: RunConfig) -> RunResult:
    """Run the configuration end to end.  Never raises for domain errors:
    they are folded into the report and the exit code."""
    try:
        grid = build_grid(cfg.domain)
        enforcer = Enforcer(cfg.boundary, grid)
        u0 = build_initial(grid, cfg.initial, cfg.boundary)
        anchor = grid.anchor_node()
    except TranslabError as e:
        report = ConvergenceReport(
            series=[], c_inf=math.nan, c_inf_mean=math.nan, converged=False,
            caps_exceeded=False, anchor=(), profile=None, error=str(e))
        return RunResult(EXIT_ERROR, report)

    collected = []
    error = None
    try:
        final, ring = evolve(grid, State(u0, 0.0), cfg.operator,
                             cfg.boundary, cfg.time,
                             hook=collected.append)
    except TranslabError as e:
        error = str(e)
        ring = collected       # whatever checkpoints completed before abort
        final = ring[-1] if ring else None

    series = monitor.build_series(grid, ring, cfg.operator, enforcer,
                                  anchor) if len(ring) >= 2 else []
    if series:
        c_inf = series[-1].speed_estimate
        c_mean = monitor.speed_estimate_mean(grid, ring[-2], ring[-1])
    else:
        c_inf = c_mean = math.nan
    converged = error is None \
        and monitor.convergence_decision(series, cfg.tolerances)
    caps = monitor.caps_exceeded(series, cfg.tolerances)
    profile = None
    if final is not None and series:
        profile = monitor.extract_profile(final, c_inf, anchor)
    report = ConvergenceReport(
        series=series, c_inf=c_inf, c_inf_mean=c_mean, converged=converged,
        caps_exceeded=caps, anchor=anchor, profile=profile, error=error)
    if error is not None:
        code = EXIT_ERROR
    else:
        code = EXIT_CONVERGED if converged else EXIT_NOT_CONVERGED
    return RunResult(code, report, grid=grid)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_series_csv(series, path: str):
    with open(path, "w") as f:
        f.write(",".join(SERIES_FIELDS) + "\n")
        for row in series:
            f.write(",".join(_fmt(getattr(row, k))
                             for k in SERIES_FIELDS) + "\n")


def write_profile_csv(grid: Grid, profile: np.ndarray, path: str):
    pts = grid.node_coordinates()
    live = grid.classification != EXTERIOR
    cols = ["x%d" % a for a in range(grid.ndim)] + ["u_tilde"]
    with open(path, "w") as f:
        f.write(",".join(cols) + "\n")
        for node in np.argwhere(live):
            node = tuple(node)
            vals = [pts[a][node] for a in range(grid.ndim)]
            vals.append(profile[node])
            f.write(",".join(_fmt(float(v)) for v in vals) + "\n")


def persist(result: RunResult, out_dir: str) -> dict:
    """Write all artifacts; returns a name -> path map."""
    from . import figures
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    rep = result.report
    paths["report"] = os.path.join(out_dir, "report.json")
    with open(paths["report"], "w") as f:
        f.write(rep.to_json() + "\n")
    if rep.series:
        paths["series"] = os.path.join(out_dir, "series.csv")
        write_series_csv(rep.series, paths["series"])
        paths["convergence_fig"] = os.path.join(out_dir, "convergence.png")
        figures.render_convergence(rep.series, paths["convergence_fig"])
    if rep.profile is not None and result.grid is not None:
        paths["profile"] = os.path.join(out_dir, "profile.csv")
        write_profile_csv(result.grid, rep.profile, paths["profile"])
        paths["profile_fig"] = os.path.join(out_dir, "profile.png")
        figures.render_profile(result.grid, rep.profile,
                               paths["profile_fig"])
    return paths


def run(cfg: RunConfig) -> RunResult:
    """execute + persist (when an output directory is configured)."""
    result = execute(cfg)
    if cfg.output_dir:
        result.paths = persist(result, cfg.output_dir)
    return result


def oracle_comparison(cfg: RunConfig):
    """Run the finite-difference pipeline and score each checkpoint against
    the closed-form solution.  Interval domains with two-flux data only.
    Returns (list of (t, error), problem)."""
    if cfg.domain.kind != "interval" or cfg.boundary.kind != "flux1d":
        raise TranslabError(
            "oracle comparison needs an interval domain with flux1d data")
    grid = build_grid(cfg.domain)
    problem = heat.HeatProblem(
        alpha=cfg.boundary.alpha, beta=cfg.boundary.beta,
        u0=initial_callable_1d(cfg.initial, cfg.boundary),
        quad_resolution=4 * cfg.domain.resolution + 1)
    coeffs = heat.fourier_coeffs(problem)
    u0 = build_initial(grid, cfg.initial, cfg.boundary)
    _, ring = evolve(grid, State(u0, 0.0), cfg.operator, cfg.boundary,
                     cfg.time)
    rows = []
    for s in ring:
        exact = heat.exact_solution(problem, grid.axes[0], s.t,
                                    coeffs=coeffs)
        rows.append((s.t, float(np.max(np.abs(s.u - exact)))))
    return rows, problem
