"""Convergence diagnostics for translating-solution runs.

The central quantity is the lagged difference w(x, t) = u(x, t) - u(x, t+t0)
between checkpoint states exactly t0 apart.  For a flow settling onto a
translator u = u_tilde + C t, w becomes spatially constant (-C t0), so its
oscillation max w - min w is the Lyapunov-style quantity tracked here: it
must decay monotonically and reach a tolerance, while the pointwise
translation rate flattens onto a single speed.  The per-checkpoint record
also carries the obliqueness minimum (the boundary condition's transversal
grip), the boundary residual, and sup-norms of u_t, Du, D^2 u mirroring the
a-priori bounds the continuous theory assumes.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import operators, stepper
from .grid import BOUNDARY, INTERIOR, Grid

SERIES_FIELDS = ("t", "osc_w", "speed_estimate", "sup_ut_minus_speed",
                 "min_obliqueness", "max_boundary_residual", "sup_ut",
                 "max_grad", "max_hess")


@dataclass(frozen=True)
class Tolerances:
    """Convergence thresholds and runtime norm caps."""

    tol_osc: float = 1e-6
    tol_speed: float = 1e-4
    obliqueness_floor: float = 0.5
    cap_ut: float = 50.0
    cap_grad: float = 20.0
    cap_hess: float = 200.0


@dataclass
class CheckpointStats:
    """One series row; t is the earlier time of the (t, t + t0) pair."""

    t: float
    osc_w: float
    speed_estimate: float
    sup_ut_minus_speed: float
    min_obliqueness: float
    max_boundary_residual: float
    sup_ut: float
    max_grad: float
    max_hess: float


@dataclass
class ConvergenceReport:
    """Everything a run leaves behind, JSON-serializable."""

    series: list
    c_inf: float
    c_inf_mean: float
    converged: bool
    caps_exceeded: bool
    anchor: tuple
    profile: np.ndarray = None
    error: str = None

    def to_json(self) -> str:
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return None
            return x
        payload = {
            "series": [{k: clean(v) for k, v in asdict(row).items()}
                       for row in self.series],
            "c_inf": clean(self.c_inf),
            "c_inf_mean": clean(self.c_inf_mean),
            "converged": self.converged,
            "caps_exceeded": self.caps_exceeded,
            "anchor": list(self.anchor),
            "profile": None if self.profile is None else
            [clean(float(v)) for v in np.asarray(self.profile).ravel()],
            "profile_shape": None if self.profile is None else
            list(np.asarray(self.profile).shape),
            "error": self.error,
        }
        return json.dumps(payload, indent=2)

    @staticmethod
    def from_json(text: str) -> "ConvergenceReport":
        d = json.loads(text)

        def restore(x):
            return math.nan if x is None else x
        series = [CheckpointStats(**{k: restore(row[k])
                                     for k in SERIES_FIELDS})
                  for row in d["series"]]
        profile = None
        if d["profile"] is not None:
            profile = np.array([restore(v) for v in d["profile"]],
                               dtype=float).reshape(d["profile_shape"])
        return ConvergenceReport(
            series=series, c_inf=restore(d["c_inf"]),
            c_inf_mean=restore(d["c_inf_mean"]), converged=d["converged"],
            caps_exceeded=d["caps_exceeded"], anchor=tuple(d["anchor"]),
            profile=profile, error=d["error"])


# -- pointwise diagnostics ---------------------------------------------------

def osc(field: np.ndarray) -> float:
    """max - min over the nodes that carry values (exterior NaN ignored)."""
    return float(np.nanmax(field) - np.nanmin(field))


def lagged_difference(s0: stepper.State, s1: stepper.State,
                      t0: float) -> np.ndarray:
    """w = u(., t) - u(., t + t0); the states must be exactly t0 apart."""
    if abs((s1.t - s0.t) - t0) > 1e-9 * max(1.0, abs(t0)):
        raise ValueError(
            f"states are {s1.t - s0.t} apart, expected the lag {t0}")
    return s0.u - s1.u


def speed_estimate(s0: stepper.State, s1: stepper.State, anchor) -> float:
    """Translation rate read at the anchor node."""
    dt = s1.t - s0.t
    return float((s1.u[tuple(anchor)] - s0.u[tuple(anchor)]) / dt)


def speed_estimate_mean(grid: Grid, s0: stepper.State,
                        s1: stepper.State) -> float:
    """Domain-averaged translation rate (interior and boundary nodes)."""
    mask = grid.classification != 2
    dt = s1.t - s0.t
    return float(np.mean((s1.u[mask] - s0.u[mask]) / dt))


def check_monotone_osc(osc_series) -> tuple:
    """(True, None) when the oscillation sequence never increases beyond a
    relative tolerance; otherwise (False, first offending index)."""
    osc_series = list(osc_series)
    tol = 1e-9 * (1.0 + osc_series[0])
    for i in range(1, len(osc_series)):
        if osc_series[i] > osc_series[i - 1] + tol:
            return False, i
    return True, None


def extract_profile(final: stepper.State, c_inf: float, anchor) -> np.ndarray:
    """The translator profile u_tilde, pinned to zero at the anchor.  The
    c_inf * t terms cancel in the normalization, so this is exactly
    u - u(anchor)."""
    return final.u - final.u[tuple(anchor)]


def boundary_distance(grid: Grid) -> np.ndarray:
    """Euclidean distance from each node to the continuous boundary."""
    pts = np.stack(grid.node_coordinates(), axis=-1)
    if grid.spec.kind == "disk":
        c = np.asarray(grid.spec.center)
        return grid.spec.radius - np.linalg.norm(pts - c, axis=-1)
    dists = []
    for a, (lo, hi) in enumerate(grid.spec.bounds):
        x = pts[..., a]
        dists.append(np.minimum(x - lo, hi - x))
    return np.minimum.reduce(dists)


def elliptic_residual(grid: Grid, profile: np.ndarray,
                      op: operators.OperatorSpec, c_inf: float,
                      depth: float = 3.0) -> float:
    """max |F(D^2 u_tilde) - c_inf| over interior nodes at distance at
    least depth * h from the boundary — the discrete stationarity check on
    the extracted profile."""
    F = stepper.pde_field(grid, profile, op)
    deep = (grid.classification == INTERIOR) \
        & (boundary_distance(grid) >= depth * max(grid.spacing))
    return float(np.max(np.abs(F[deep] - c_inf)))


# -- series assembly ---------------------------------------------------------

def build_series(grid: Grid, ring, op: operators.OperatorSpec,
                 enforcer, anchor) -> list:
    """One CheckpointStats per consecutive checkpoint pair.  Norm columns
    and boundary columns are evaluated at the later state of each pair, so
    the last row reflects the final state."""
    live = grid.classification != 2
    rows = []
    for s0, s1 in zip(ring[:-1], ring[1:]):
        t0 = s1.t - s0.t
        w = lagged_difference(s0, s1, t0)
        speed = speed_estimate(s0, s1, anchor)
        ut = (s1.u[live] - s0.u[live]) / t0
        G = stepper.gradient_field(grid, s1.u)
        lams = stepper.interior_eigenvalues(grid, s1.u)
        gnorm = np.sqrt(np.nansum(G * G, axis=-1))
        rows.append(CheckpointStats(
            t=s0.t,
            osc_w=osc(w),
            speed_estimate=speed,
            sup_ut_minus_speed=float(np.max(np.abs(ut - speed))),
            min_obliqueness=float(
                np.min(np.abs(enforcer.obliqueness_values(s1.u)))),
            max_boundary_residual=float(
                np.max(np.abs(enforcer.residuals(s1.u)))),
            sup_ut=float(np.max(np.abs(ut))),
            max_grad=float(np.nanmax(gnorm[grid.classification == INTERIOR])),
            max_hess=float(max(np.nanmax(np.abs(lam)) for lam in lams)),
        ))
    return rows


def convergence_decision(series, tol: Tolerances) -> bool:
    """Converged iff the last oscillation and speed spread are under their
    tolerances and the obliqueness floor held at every checkpoint."""
    if not series:
        return False
    last = series[-1]
    if not (last.osc_w <= tol.tol_osc
            and last.sup_ut_minus_speed <= tol.tol_speed):
        return False
    return all(row.min_obliqueness >= tol.obliqueness_floor
               for row in series)


def caps_exceeded(series, tol: Tolerances) -> bool:
    """True when any checkpoint breached the a-priori norm caps."""
    return any(row.sup_ut > tol.cap_ut or row.max_grad > tol.cap_grad
               or row.max_hess > tol.cap_hess for row in series)
