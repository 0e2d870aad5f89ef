"""Explicit Euler stepping for u_t = F(D^2 u, Du, x) with boundary
enforcement after every interior update.

The interior update is a pure vectorized map over the previous state;
boundary node values are owned entirely by the enforcement pass, which is
how the continuous problem couples the equation and its boundary condition.
All stencils are second-order central differences at interior nodes; on cut
(disk) lattices an interior node may have an exterior *diagonal* neighbour,
in which case the mixed derivative averages the cross stencil over the
readable quadrants (still exact on quadratics).

Time steps obey dt = dt_safety * h_min^2 / (2 n Lambda) where Lambda bounds
the largest eigenvalue of the operator linearization over the current
state, and dt is then shrunk so the checkpoint lag t0 is an exact integer
multiple of it — the oscillation monitor needs state pairs at an exact lag.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from . import operators
from .boundary import BoundarySpec, Enforcer
from .errors import AdmissibilityError, ConfigError
from .grid import EXTERIOR, INTERIOR, Grid


@dataclass
class State:
    """Nodal values plus the time they belong to."""

    u: np.ndarray
    t: float = 0.0

    def copy(self) -> "State":
        return State(self.u.copy(), self.t)


@dataclass(frozen=True)
class StepConfig:
    """Time-stepping controls: safety factor, horizon, checkpoint lag."""

    t_end: float
    dt_safety: float = 0.9
    t0: float = 0.0625

    def __post_init__(self):
        if not 0.0 < self.dt_safety <= 1.0:
            raise ConfigError(
                f"dt_safety must lie in (0, 1], got {self.dt_safety}")
        if self.t_end <= 0.0:
            raise ConfigError(f"t_end must be > 0, got {self.t_end}")
        if self.t0 <= 0.0:
            raise ConfigError(f"checkpoint lag t0 must be > 0, got {self.t0}")


# -- per-node difference operators (diagnostics, small n) --------------------

def _require_interior(grid: Grid, node):
    if grid.classification[tuple(node)] != INTERIOR:
        raise ValueError(f"node {tuple(node)} is not interior")


def gradient(grid: Grid, u: np.ndarray, node) -> np.ndarray:
    """Second-order central gradient at one interior node."""
    _require_interior(grid, node)
    node = tuple(node)
    out = np.empty(grid.ndim)
    for a in range(grid.ndim):
        up = list(node)
        dn = list(node)
        up[a] += 1
        dn[a] -= 1
        out[a] = (u[tuple(up)] - u[tuple(dn)]) / (2.0 * grid.spacing[a])
    return out


def hessian(grid: Grid, u: np.ndarray, node) -> np.ndarray:
    """Central second differences at one interior node; mixed entries use
    the 4-corner cross stencil, averaged over readable quadrants when a
    diagonal neighbour is exterior."""
    _require_interior(grid, node)
    node = tuple(node)
    nd = grid.ndim
    H = np.empty((nd, nd))
    for a in range(nd):
        up = list(node)
        dn = list(node)
        up[a] += 1
        dn[a] -= 1
        H[a, a] = (u[tuple(up)] - 2.0 * u[node] + u[tuple(dn)]) \
            / grid.spacing[a] ** 2
    if nd == 2:
        H[0, 1] = H[1, 0] = _cross_at(grid, u, node)
    return H


def _cross_at(grid: Grid, u: np.ndarray, node) -> float:
    i, j = node
    hx, hy = grid.spacing
    cls = grid.classification
    shape = grid.shape

    def ok(a, b):
        return 0 <= a < shape[0] and 0 <= b < shape[1] \
            and cls[a, b] != EXTERIOR

    corners = [(sx, sy) for sx in (1, -1) for sy in (1, -1)
               if ok(i + sx, j + sy)]
    if len(corners) == 4:
        return (u[i + 1, j + 1] - u[i + 1, j - 1]
                - u[i - 1, j + 1] + u[i - 1, j - 1]) / (4.0 * hx * hy)
    total = 0.0
    for sx, sy in corners:
        total += sx * sy * (u[i + sx, j + sy] - u[i + sx, j]
                            - u[i, j + sy] + u[i, j]) / (hx * hy)
    return total / len(corners)


# -- vectorized field operators ----------------------------------------------

def _padded(u: np.ndarray) -> np.ndarray:
    return np.pad(u, 1, constant_values=np.nan)


def gradient_field(grid: Grid, u: np.ndarray) -> np.ndarray:
    """Central gradient, shape grid.shape + (ndim,), NaN off the interior."""
    P = _padded(u)
    mask = grid.classification == INTERIOR
    out = np.full(grid.shape + (grid.ndim,), np.nan)
    if grid.ndim == 1:
        out[..., 0] = (P[2:] - P[:-2]) / (2.0 * grid.spacing[0])
    else:
        out[..., 0] = (P[2:, 1:-1] - P[:-2, 1:-1]) / (2.0 * grid.spacing[0])
        out[..., 1] = (P[1:-1, 2:] - P[1:-1, :-2]) / (2.0 * grid.spacing[1])
    out[~mask] = np.nan
    return out


def _cross_plan(grid: Grid):
    """Gather tables fixing the mixed derivative at interior nodes whose
    diagonal neighbour is exterior: flat node indices, flat stencil indices
    (unused slots point at the node itself so no NaN is ever read), and
    coefficients averaging the readable quadrant stencils.  Cached on the
    grid."""
    plan = getattr(grid, "_cross_plan", None)
    if plan is not None:
        return plan
    cls = grid.classification
    hx, hy = grid.spacing
    rows = []
    for i, j in np.argwhere(cls == INTERIOR):
        corners = [(sx, sy) for sx in (1, -1) for sy in (1, -1)
                   if cls[i + sx, j + sy] != EXTERIOR]
        if len(corners) == 4:
            continue
        own = np.ravel_multi_index((i, j), grid.shape)
        idx = np.full(16, own)
        co = np.zeros(16)
        w = 1.0 / (len(corners) * hx * hy)
        for slot, (sx, sy) in enumerate(corners):
            pts = [((i + sx, j + sy), w), ((i + sx, j), -w),
                   ((i, j + sy), -w), ((i, j), w)]
            for q, (pt, c) in enumerate(pts):
                idx[4 * slot + q] = np.ravel_multi_index(pt, grid.shape)
                co[4 * slot + q] = c * sx * sy
        rows.append((own, idx, co))
    if rows:
        plan = (np.array([r[0] for r in rows]),
                np.stack([r[1] for r in rows]),
                np.stack([r[2] for r in rows]))
    else:
        plan = (np.empty(0, dtype=int), np.empty((0, 16), dtype=int),
                np.empty((0, 16)))
    grid._cross_plan = plan
    return plan


def hessian_field(grid: Grid, u: np.ndarray):
    """Second-derivative fields over the interior (NaN elsewhere).
    Returns (uxx,) in 1-D and (uxx, uxy, uyy) in 2-D."""
    P = _padded(u)
    mask = grid.classification == INTERIOR
    if grid.ndim == 1:
        h2 = grid.spacing[0] ** 2
        uxx = (P[2:] - 2.0 * u + P[:-2]) / h2
        uxx = np.where(mask, uxx, np.nan)
        return (uxx,)
    hx, hy = grid.spacing
    uxx = (P[2:, 1:-1] - 2.0 * u + P[:-2, 1:-1]) / hx ** 2
    uyy = (P[1:-1, 2:] - 2.0 * u + P[1:-1, :-2]) / hy ** 2
    with np.errstate(invalid="ignore"):
        uxy = (P[2:, 2:] - P[2:, :-2] - P[:-2, 2:] + P[:-2, :-2]) \
            / (4.0 * hx * hy)
    nodes, idx, co = _cross_plan(grid)
    if len(nodes):
        flat = u.reshape(-1)
        uxy.reshape(-1)[nodes] = np.einsum("ks,ks->k", co, flat[idx])
    uxx = np.where(mask, uxx, np.nan)
    uxy = np.where(mask, uxy, np.nan)
    uyy = np.where(mask, uyy, np.nan)
    return uxx, uxy, uyy


def interior_eigenvalues(grid: Grid, u: np.ndarray):
    """Hessian eigenvalue fields (ascending), NaN off the interior."""
    H = hessian_field(grid, u)
    if grid.ndim == 1:
        return (H[0],)
    return operators.eigenvalues_2d_field(*H)


def pde_field(grid: Grid, u: np.ndarray, op: operators.OperatorSpec) \
        -> np.ndarray:
    """F(D^2 u) over the interior, NaN elsewhere.  Raises on admissibility
    loss, naming the worst node and its eigenvalues."""
    lams = interior_eigenvalues(grid, u)
    mask = grid.classification == INTERIOR
    lo = lams[0]
    with np.errstate(invalid="ignore"):
        margin = operators.admissibility_margin(op, np.where(mask, lo, 1.0))
        bad = mask & ~(margin > 0.0)
    if np.any(bad):
        ranked = np.nan_to_num(np.where(bad, margin, np.inf), nan=-np.inf)
        worst = np.unravel_index(np.argmin(ranked), grid.shape)
        eigs = tuple(float(l[worst]) for l in lams)
        raise AdmissibilityError(
            f"state left the operator domain at node {tuple(worst)}: "
            f"eigenvalues {eigs}, requires {operators.admissibility_bound(op)}",
            offending=eigs, bound=operators.admissibility_bound(op))
    F = np.full(grid.shape, np.nan)
    with np.errstate(invalid="ignore"):
        acc = sum(operators.branch_value(op, np.where(mask, lam, 1.0))
                  for lam in lams)
    F[mask] = acc[mask]
    return F


def stiffness(grid: Grid, u: np.ndarray, op: operators.OperatorSpec) -> float:
    """Largest eigenvalue of the operator linearization over the interior."""
    lams = interior_eigenvalues(grid, u)
    mask = grid.classification == INTERIOR
    best = 0.0
    with np.errstate(invalid="ignore"):
        for lam in lams:
            d = operators.branch_derivative(op, np.where(mask, lam, 1.0))
            best = max(best, float(np.max(d[mask])))
    return best


def cfl_dt(grid: Grid, state: State, op: operators.OperatorSpec,
           cfg: StepConfig) -> float:
    """Stable explicit step, shrunk so t0 is an exact multiple of it."""
    pde_field(grid, state.u, op)          # admissibility gate
    lam = stiffness(grid, state.u, op)
    if not np.isfinite(lam) or lam <= 0.0:
        raise AdmissibilityError(
            f"operator linearization bound is {lam}; cannot set a stable "
            f"time step")
    h2 = min(grid.spacing) ** 2
    raw = cfg.dt_safety * h2 / (2.0 * grid.ndim * lam)
    return cfg.t0 / ceil(cfg.t0 / raw)


def step(grid: Grid, state: State, op: operators.OperatorSpec,
         bc, dt: float) -> State:
    """One explicit Euler step: interior update at the old state, then
    boundary enforcement.  bc may be a BoundarySpec or a prebuilt Enforcer."""
    enforcer = bc if isinstance(bc, Enforcer) else Enforcer(bc, grid)
    F = pde_field(grid, state.u, op)
    mask = grid.classification == INTERIOR
    new = state.u.copy()
    new[mask] += dt * F[mask]
    enforcer.enforce_(new)
    return State(new, state.t + dt)


def _heat1d_segment(u: np.ndarray, m: int, dt: float, h: float,
                    alpha: float, beta: float):
    """Fused inner loop for the linear special case (1-D trace operator
    with two-flux data): the per-step boundary Newton solve collapses to a
    closed form, so the whole segment runs as a handful of array ops per
    step.  Produces the same states as the general path (the enforcement
    equations are linear and decoupled); kept only because desk-scale heat
    runs take ~2e5 steps."""
    r = dt / (h * h)
    for _ in range(m):
        u[1:-1] += r * (u[2:] - 2.0 * u[1:-1] + u[:-2])
        u[0] = (4.0 * u[1] - u[2] - 2.0 * h * alpha) / 3.0
        u[-1] = (4.0 * u[-2] - u[-3] + 2.0 * h * beta) / 3.0


def evolve(grid: Grid, state0: State, op: operators.OperatorSpec,
           bspec: BoundarySpec, cfg: StepConfig, hook=None):
    """March to t_end, checkpointing at exact multiples of t0.

    The initial state is boundary-enforced before stepping.  The time step
    is re-derived from the CFL bound at every checkpoint so stiffening
    states stay stable.  hook(state) runs at each completed checkpoint.
    Returns (final state, list of checkpoint states including the initial
    one).  Step errors propagate to the caller with the time intact.
    """
    enforcer = Enforcer(bspec, grid)
    u = state0.u.copy()
    enforcer.enforce_(u)
    state = State(u, state0.t)
    checkpoints = [state.copy()]
    fused = (grid.ndim == 1 and op.branch == operators.TRACE
             and bspec.kind == "flux1d")
    n_seg = ceil(round(cfg.t_end / cfg.t0, 9))
    for k in range(1, n_seg + 1):
        dt = cfl_dt(grid, state, op, cfg)
        m = int(round(cfg.t0 / dt))
        if fused:
            u = state.u.copy()
            _heat1d_segment(u, m, dt, grid.spacing[0],
                            bspec.alpha, bspec.beta)
            state = State(u, state.t + m * dt)
        else:
            for _ in range(m):
                state = step(grid, state, op, enforcer, dt)
        state.t = state0.t + k * cfg.t0
        checkpoints.append(state.copy())
        if hook is not None:
            hook(checkpoints[-1])
    return state, checkpoints
