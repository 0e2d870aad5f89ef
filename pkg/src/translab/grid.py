"""Uniform Cartesian lattices over intervals, rectangles, and disks.

Nodes are classified as interior, boundary, or exterior.  Box domains
(interval, rectangle) have no exterior nodes: the lattice endpoints are the
boundary.  Disk domains use a cut lattice over the bounding box: a node is
*inside* iff it satisfies the strict level-set predicate ``|x - c| < r``,
*interior* iff it is inside and all its axis neighbours are inside, and
*boundary* iff it is inside with at least one axis neighbour outside.
Everything else is exterior and carries a NaN sentinel in state arrays so
that an accidental read poisons the result instead of passing silently.

Inward unit normals are analytic: ``(c - x)/|c - x|`` on the disk,
axis vectors on faces, and the normalized diagonal at rectangle corners.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

INTERIOR = 0
BOUNDARY = 1
EXTERIOR = 2


@dataclass(frozen=True)
class DomainSpec:
    """Geometry request: what region to cover and how finely.

    kind:       "interval", "rectangle", or "disk"
    bounds:     ((lo, hi),) per axis for interval/rectangle; ignored for disk
    center:     disk centre (disk only)
    radius:     disk radius (disk only)
    resolution: nodes per axis, >= 5
    """

    kind: str
    resolution: int
    bounds: tuple = ()
    center: tuple = (0.0, 0.0)
    radius: float = 0.0

    def __post_init__(self):
        if self.kind not in ("interval", "rectangle", "disk"):
            raise ConfigError(f"unknown domain kind {self.kind!r}")
        if self.resolution < 5:
            raise ConfigError(
                f"resolution must be at least 5, got {self.resolution}")
        if self.kind == "disk":
            if self.radius <= 0:
                raise ConfigError(f"disk radius must be > 0, got {self.radius}")
            if len(self.center) != 2:
                raise ConfigError("disk center must have two coordinates")
        else:
            expect = 1 if self.kind == "interval" else 2
            if len(self.bounds) != expect:
                raise ConfigError(
                    f"{self.kind} needs {expect} bound pair(s), "
                    f"got {len(self.bounds)}")
            for lo, hi in self.bounds:
                if not hi > lo:
                    raise ConfigError(
                        f"degenerate bounds ({lo}, {hi}): need hi > lo")


@dataclass
class Grid:
    """Built lattice: axes, spacings, classification, and boundary normals.

    classification is an int8 array over the full lattice shape with values
    INTERIOR / BOUNDARY / EXTERIOR.  boundary_nodes holds index tuples (one
    row per boundary node, ndim columns) in deterministic scan order, and
    boundary_normals the matching inward unit normals.
    """

    spec: DomainSpec
    ndim: int
    shape: tuple
    axes: tuple               # one 1-D coordinate array per axis
    spacing: tuple            # uniform spacing per axis
    classification: np.ndarray
    boundary_nodes: np.ndarray
    boundary_normals: np.ndarray
    interior_nodes: np.ndarray = field(repr=False, default=None)

    @property
    def n_interior(self) -> int:
        return int(np.count_nonzero(self.classification == INTERIOR))

    @property
    def n_boundary(self) -> int:
        return len(self.boundary_nodes)

    @property
    def n_exterior(self) -> int:
        return int(np.count_nonzero(self.classification == EXTERIOR))

    def coords(self, node) -> np.ndarray:
        """Coordinates of a node given as an index tuple/array."""
        node = np.asarray(node)
        return np.array([self.axes[a][node[..., a] if node.ndim > 1 else node[a]]
                         for a in range(self.ndim)]).T

    def node_coordinates(self) -> tuple:
        """Meshgrid coordinate arrays over the full lattice (ij indexing)."""
        if self.ndim == 1:
            return (self.axes[0],)
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    def new_state_array(self, fill=np.nan) -> np.ndarray:
        """Full-lattice array with exterior nodes pre-set to the sentinel."""
        u = np.full(self.shape, fill, dtype=float)
        return u

    def anchor_node(self) -> tuple:
        """Node nearest the domain centroid (deterministic tie-break by scan
        order); used as the reference point x0 for speed and profile."""
        if self.spec.kind == "disk":
            target = np.asarray(self.spec.center)
        else:
            target = np.array([(lo + hi) / 2 for lo, hi in self.spec.bounds])
        best, best_d2 = None, np.inf
        it = np.argwhere(self.classification == INTERIOR)
        for idx in it:
            x = np.array([self.axes[a][idx[a]] for a in range(self.ndim)])
            d2 = float(np.sum((x - target) ** 2))
            if d2 < best_d2 - 1e-15:
                best, best_d2 = tuple(int(i) for i in idx), d2
        return best


def _box_axes(bounds, resolution):
    axes, spacing = [], []
    for lo, hi in bounds:
        ax = np.linspace(lo, hi, resolution)
        axes.append(ax)
        spacing.append(float(ax[1] - ax[0]))
    return tuple(axes), tuple(spacing)


def _build_interval(spec: DomainSpec) -> Grid:
    axes, spacing = _box_axes(spec.bounds, spec.resolution)
    n = spec.resolution
    cls = np.full((n,), INTERIOR, dtype=np.int8)
    cls[0] = cls[-1] = BOUNDARY
    bnodes = np.array([[0], [n - 1]], dtype=np.int64)
    bnormals = np.array([[1.0], [-1.0]])
    interior = np.argwhere(cls == INTERIOR)
    return Grid(spec, 1, (n,), axes, spacing, cls, bnodes, bnormals, interior)


def _build_rectangle(spec: DomainSpec) -> Grid:
    axes, spacing = _box_axes(spec.bounds, spec.resolution)
    n = spec.resolution
    cls = np.full((n, n), INTERIOR, dtype=np.int8)
    cls[0, :] = cls[-1, :] = BOUNDARY
    cls[:, 0] = cls[:, -1] = BOUNDARY
    bnodes = np.argwhere(cls == BOUNDARY).astype(np.int64)
    normals = np.zeros((len(bnodes), 2))
    for k, (i, j) in enumerate(bnodes):
        nu = np.zeros(2)
        if i == 0:
            nu[0] += 1.0
        elif i == n - 1:
            nu[0] -= 1.0
        if j == 0:
            nu[1] += 1.0
        elif j == n - 1:
            nu[1] -= 1.0
        normals[k] = nu / np.linalg.norm(nu)
    interior = np.argwhere(cls == INTERIOR)
    return Grid(spec, 2, (n, n), axes, spacing, cls, bnodes, normals, interior)


def _build_disk(spec: DomainSpec) -> Grid:
    cx, cy = spec.center
    r = spec.radius
    bounds = ((cx - r, cx + r), (cy - r, cy + r))
    axes, spacing = _box_axes(bounds, spec.resolution)
    X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
    inside = (X - cx) ** 2 + (Y - cy) ** 2 < r * r
    # interior: inside with all four axis neighbours inside (out-of-lattice
    # counts as outside)
    nb_all = np.zeros_like(inside)
    nb_all[1:-1, 1:-1] = (inside[2:, 1:-1] & inside[:-2, 1:-1]
                          & inside[1:-1, 2:] & inside[1:-1, :-2])
    cls = np.full(inside.shape, EXTERIOR, dtype=np.int8)
    cls[inside & nb_all] = INTERIOR
    cls[inside & ~nb_all] = BOUNDARY
    if not np.any(cls == INTERIOR):
        raise ConfigError(
            f"disk of radius {r} at resolution {spec.resolution} has no "
            f"interior nodes; refine the lattice")
    bnodes = np.argwhere(cls == BOUNDARY).astype(np.int64)
    pts = np.stack([X[bnodes[:, 0], bnodes[:, 1]],
                    Y[bnodes[:, 0], bnodes[:, 1]]], axis=1)
    nu = np.array([cx, cy])[None, :] - pts
    norms = np.linalg.norm(nu, axis=1, keepdims=True)
    if np.any(norms < 1e-14):
        raise ConfigError("boundary node coincides with the disk centre")
    nu = nu / norms
    interior = np.argwhere(cls == INTERIOR)
    return Grid(spec, 2, inside.shape, axes, spacing, cls, bnodes, nu, interior)


def build_grid(spec: DomainSpec) -> Grid:
    """Construct the lattice for a validated DomainSpec."""
    if spec.kind == "interval":
        return _build_interval(spec)
    if spec.kind == "rectangle":
        return _build_rectangle(spec)
    return _build_disk(spec)
