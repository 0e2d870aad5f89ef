"""Parabolic operators F(D^2 u) and their eigenvalue kernel.

Two families are shipped:

* ``trace`` — the heat operator, F(A) = tr A.
* ``tau``   — the one-parameter family interpolating between
  ``sum ln(lambda_i)`` at tau = 0 and ``sum arctan(lambda_i)`` at tau = pi/2,
  with a = cot(tau) and b = sqrt(|cot^2(tau) - 1|) feeding the two middle
  branches through the Moebius map (lambda + a - b)/(lambda + a + b).
  The knots tau in {0, pi/4, pi/2} use their dedicated formulas rather than
  limits of the neighbouring branches.

All operators act on eigenvalues only, so values and derivative matrices are
assembled spectrally: F(A) = sum f(lambda_i) and
dF/dA = Q diag(f'(lambda_i)) Q^T.  The scalar kernels are numpy ufunc
compositions and therefore accept arrays of eigenvalues; the stepper uses
that to evaluate whole lattices at once.

The eigenvalue kernel is closed-form: trivial at n = 1, the half-trace /
radius formula at n = 2, and the trigonometric solution of the
characteristic cubic at n = 3 with a cyclic-Jacobi fallback whenever
eigenvalues cluster or the frame fails its reconstruction audit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityError, ConfigError

_QUARTER_PI = math.pi / 4
_HALF_PI = math.pi / 2
_KNOT_TOL = 1e-12

# branch tags
TRACE = "trace"
LOG = "log"                  # tau = 0
LOG_MOBIUS = "log_mobius"    # 0 < tau < pi/4
INVERSE = "inverse"          # tau = pi/4
ATAN_MOBIUS = "atan_mobius"  # pi/4 < tau < pi/2
ATAN = "atan"                # tau = pi/2


@dataclass(frozen=True)
class OperatorSpec:
    """Operator family selector with cached branch constants."""

    family: str
    tau: float | None = None
    a: float = field(init=False, default=0.0)
    b: float = field(init=False, default=0.0)
    branch: str = field(init=False, default=TRACE)

    def __post_init__(self):
        if self.family == "trace":
            if self.tau is not None:
                raise ConfigError("trace family takes no tau parameter")
            object.__setattr__(self, "branch", TRACE)
            return
        if self.family != "tau":
            raise ConfigError(f"unknown operator family {self.family!r}")
        t = self.tau
        if t is None or not 0.0 <= t <= _HALF_PI:
            raise ConfigError(f"tau must lie in [0, pi/2], got {t}")
        if abs(t) <= _KNOT_TOL:
            branch, a, b = LOG, math.inf, math.inf
        elif abs(t - _QUARTER_PI) <= _KNOT_TOL:
            branch, a, b = INVERSE, 1.0, 0.0
        elif abs(t - _HALF_PI) <= _KNOT_TOL:
            branch, a, b = ATAN, 0.0, 1.0
        else:
            a = 1.0 / math.tan(t)
            b = math.sqrt(abs(a * a - 1.0))
            branch = LOG_MOBIUS if t < _QUARTER_PI else ATAN_MOBIUS
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "branch", branch)


@dataclass
class Eigenvalues:
    """Sorted eigenvalues with an orthogonal frame (columns = eigenvectors)."""

    values: np.ndarray
    frame: np.ndarray


# ---------------------------------------------------------------------------
# scalar branch kernels (ufunc-friendly: accept floats or arrays)
# ---------------------------------------------------------------------------

def branch_value(spec: OperatorSpec, lam):
    """f(lambda) for the spec's branch, elementwise."""
    br = spec.branch
    if br == TRACE:
        return np.asarray(lam, dtype=float) + 0.0
    if br == LOG:
        return np.log(lam)
    if br == LOG_MOBIUS:
        return np.log((lam + spec.a - spec.b) / (lam + spec.a + spec.b))
    if br == INVERSE:
        return -1.0 / (1.0 + np.asarray(lam, dtype=float))
    if br == ATAN_MOBIUS:
        return np.arctan((lam + spec.a - spec.b) / (lam + spec.a + spec.b))
    return np.arctan(lam)


def branch_derivative(spec: OperatorSpec, lam):
    """f'(lambda) for the spec's branch, elementwise; positive on the
    admissible set (this is what makes the flow parabolic)."""
    br = spec.branch
    lam = np.asarray(lam, dtype=float)
    if br == TRACE:
        return np.ones_like(lam)
    if br == LOG:
        return 1.0 / lam
    if br == LOG_MOBIUS:
        s = lam + spec.a
        return 2.0 * spec.b / (s * s - spec.b * spec.b)
    if br == INVERSE:
        s = 1.0 + lam
        return 1.0 / (s * s)
    if br == ATAN_MOBIUS:
        s = lam + spec.a
        return spec.b / (s * s + spec.b * spec.b)
    return 1.0 / (1.0 + lam * lam)


def admissibility_margin(spec: OperatorSpec, lam):
    """Signed distance of each eigenvalue to the branch's domain edge;
    the eigenvalue is admissible iff the margin is > 0.  Branches defined
    for every real eigenvalue return +inf."""
    lam = np.asarray(lam, dtype=float)
    br = spec.branch
    if br in (TRACE, ATAN):
        return np.full_like(lam, np.inf)
    if br == LOG:
        return lam
    if br == LOG_MOBIUS:
        return lam + spec.a - spec.b
    if br == INVERSE:
        return lam + 1.0
    return lam + spec.a + spec.b  # ATAN_MOBIUS


def admissibility_bound(spec: OperatorSpec) -> str:
    """Human-readable description of the branch's domain requirement."""
    br = spec.branch
    if br in (TRACE, ATAN):
        return "all eigenvalues admissible"
    if br == LOG:
        return "lambda > 0"
    if br == LOG_MOBIUS:
        return f"lambda > {spec.b - spec.a!r} (lambda + a - b > 0)"
    if br == INVERSE:
        return "lambda > -1"
    return f"lambda > {-(spec.a + spec.b)!r} (lambda + a + b > 0)"


def domain_check(spec: OperatorSpec, lam) -> bool:
    """True iff every eigenvalue lies inside the branch's admissible set."""
    values = lam.values if isinstance(lam, Eigenvalues) else lam
    return bool(np.all(admissibility_margin(spec, values) > 0.0))


def _require_admissible(spec: OperatorSpec, values: np.ndarray):
    margin = admissibility_margin(spec, values)
    if np.all(margin > 0.0):
        return
    k = int(np.argmin(margin))
    raise AdmissibilityError(
        f"eigenvalue {values[k]} violates {admissibility_bound(spec)} "
        f"for branch {spec.branch}",
        offending=float(values[k]), bound=admissibility_bound(spec))


# ---------------------------------------------------------------------------
# symmetric eigenvalue kernel, n in {1, 2, 3}
# ---------------------------------------------------------------------------

def _eig2(A: np.ndarray) -> Eigenvalues:
    a, b, c = A[0, 0], A[0, 1], A[1, 1]
    m = 0.5 * (a + c)
    d = math.hypot(0.5 * (a - c), b)
    lo, hi = m - d, m + d
    if d <= 1e-300:
        return Eigenvalues(np.array([lo, hi]), np.eye(2))
    # eigenvector of the larger eigenvalue; pick the better-conditioned form
    v1 = np.array([b, hi - a])
    v2 = np.array([hi - c, b])
    v = v1 if v1 @ v1 >= v2 @ v2 else v2
    v = v / np.linalg.norm(v)
    frame = np.column_stack([np.array([-v[1], v[0]]), v])
    return Eigenvalues(np.array([lo, hi]), frame)


def _jacobi(A: np.ndarray, sweeps: int = 30) -> Eigenvalues:
    """Cyclic Jacobi rotations; robust fallback for clustered spectra."""
    n = A.shape[0]
    M = A.astype(float).copy()
    V = np.eye(n)
    scale = max(1.0, float(np.max(np.abs(A))))
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off = max(off, abs(M[p, q]))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(M[p, q]) <= 1e-18 * scale:
                    continue
                theta = 0.5 * (M[q, q] - M[p, p]) / M[p, q]
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                R = np.eye(n)
                R[p, p] = R[q, q] = c
                R[p, q] = s
                R[q, p] = -s
                M = R.T @ M @ R
                V = V @ R
    order = np.argsort(np.diag(M), kind="stable")
    return Eigenvalues(np.diag(M)[order].copy(), V[:, order].copy())


def _eig3(A: np.ndarray) -> Eigenvalues:
    scale = max(1.0, float(np.max(np.abs(A))))
    off2 = A[0, 1] ** 2 + A[0, 2] ** 2 + A[1, 2] ** 2
    if off2 <= (1e-15 * scale) ** 2:
        order = np.argsort(np.diag(A), kind="stable")
        frame = np.eye(3)[:, order]
        return Eigenvalues(np.diag(A)[order].copy(), frame)
    # trigonometric solution of the characteristic cubic
    q = float(np.trace(A)) / 3.0
    B = A - q * np.eye(3)
    p = math.sqrt(float(np.sum(B * B)) / 6.0)
    r = float(np.linalg.det(B)) / (2.0 * p ** 3)
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3.0
    hi = q + 2.0 * p * math.cos(phi)
    lo = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    mid = 3.0 * q - hi - lo
    values = np.array([lo, mid, hi])
    # clustered spectra destabilize the cross-product frame: fall back
    gaps = np.diff(values)
    if np.any(gaps <= 1e-12 * scale):
        return _jacobi(A)
    frame = np.empty((3, 3))
    for k, lam in enumerate(values):
        M = A - lam * np.eye(3)
        # eigenvector = cross product of the two most independent rows
        crosses = [np.cross(M[i], M[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
        norms = [float(v @ v) for v in crosses]
        v = crosses[int(np.argmax(norms))]
        nv = math.sqrt(max(norms))
        if nv <= 1e-14 * scale * scale:
            return _jacobi(A)
        frame[:, k] = v / nv
    # audit: the frame must reproduce A; clustered input can sneak past the
    # gap test, so verify and fall back rather than return garbage
    recon = frame @ np.diag(values) @ frame.T
    if float(np.max(np.abs(recon - A))) > 1e-12 * scale:
        return _jacobi(A)
    return Eigenvalues(values, frame)


def eig_sym(A) -> Eigenvalues:
    """Eigen-decomposition of a symmetric matrix, n in {1, 2, 3}.

    Values come back ascending; frame columns are the matching orthonormal
    eigenvectors.  Input is symmetrized (the mean of A and A^T is used), so
    tiny asymmetries from upstream arithmetic cannot leak in.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if n not in (1, 2, 3):
        raise ValueError(f"eig_sym supports n in {{1, 2, 3}}, got n={n}")
    A = 0.5 * (A + A.T)
    if n == 1:
        return Eigenvalues(A[0].copy(), np.eye(1))
    if n == 2:
        return _eig2(A)
    return _eig3(A)


# ---------------------------------------------------------------------------
# operator values and derivative matrices
# ---------------------------------------------------------------------------

def f_value(spec: OperatorSpec, A) -> float:
    """F(A) = sum_i f(lambda_i); raises AdmissibilityError off-branch."""
    eig = A if isinstance(A, Eigenvalues) else eig_sym(A)
    _require_admissible(spec, eig.values)
    return float(np.sum(branch_value(spec, eig.values)))


def f_derivative(spec: OperatorSpec, A) -> np.ndarray:
    """dF/dA = Q diag(f'(lambda_i)) Q^T — symmetric positive definite on
    the admissible set."""
    eig = A if isinstance(A, Eigenvalues) else eig_sym(A)
    _require_admissible(spec, eig.values)
    fp = branch_derivative(spec, eig.values)
    M = (eig.frame * fp) @ eig.frame.T
    return 0.5 * (M + M.T)


def eigenvalues_2d_field(uxx, uxy, uyy):
    """Vectorized eigenvalues of the 2x2 symmetric fields (uxx, uxy; uxy,
    uyy): returns (smaller, larger) arrays.  This is the stepping hot path;
    single matrices go through eig_sym instead."""
    m = 0.5 * (uxx + uyy)
    d = np.sqrt(0.25 * (uxx - uyy) ** 2 + uxy ** 2)
    return m - d, m + d
