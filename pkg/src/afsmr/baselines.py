"""Scattered-data interpolators used as reference methods.

Linear and cubic interpolation work on a Delaunay triangulation of the mesh
(barycentric and Clough-Tocher respectively); grid positions outside the
convex hull take the value of the nearest mesh point. The Nadaraya-Watson
estimator is a truncated Gaussian-kernel weighted mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CloughTocher2DInterpolator, LinearNDInterpolator
from scipy.spatial import Delaunay, QhullError, cKDTree

from .types import MeshPointSet


@dataclass(frozen=True)
class NweConfig:
    bandwidth: float = 1.0
    support: float | None = None  # defaults to 3 * bandwidth

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        if self.support is not None and not self.support > 0:
            raise ValueError(f"support must be positive, got {self.support}")

    @property
    def radius(self) -> float:
        return 3.0 * self.bandwidth if self.support is None else self.support


def grid_points(width: int, height: int) -> np.ndarray:
    """Integer ``(x, y)`` positions of a ``height x width`` frame, row-major."""
    ys, xs = np.mgrid[0:height, 0:width]
    return np.column_stack([xs.ravel(), ys.ravel()]).astype(np.float64)


def _triangulate(points: np.ndarray):
    """Delaunay triangulation, or ``None`` for degenerate (collinear) input."""
    if len(points) < 3:
        return None
    try:
        # QJ would jitter input positions; Qbb/Qc/Qz keep them exact and give
        # deterministic handling of cocircular grids.
        return Delaunay(points, qhull_options="Qbb Qc Qz")
    except QhullError:
        return None


def _nearest(mesh: MeshPointSet, queries: np.ndarray, tree: cKDTree | None = None) -> np.ndarray:
    tree = tree if tree is not None else cKDTree(mesh.coords)
    _, idx = tree.query(queries)
    return mesh.vals[idx]


def scattered_interpolator(mesh: MeshPointSet, kind: str = "linear"):
    """Build a Delaunay-based interpolator over ``mesh``.

    Returns a function mapping ``(n, 2)`` query positions to values. Queries
    outside the convex hull, or every query when the points are collinear,
    get the nearest mesh point's value.
    """
    if kind not in ("linear", "cubic"):
        raise ValueError(f"kind must be 'linear' or 'cubic', got {kind!r}")
    if len(mesh) == 0:
        raise ValueError("mesh is empty")
    tree = cKDTree(mesh.coords)
    tri = _triangulate(mesh.coords)
    if tri is None:
        return lambda queries: _nearest(mesh, queries, tree)
    if kind == "linear":
        interp = LinearNDInterpolator(tri, mesh.vals)
    else:
        interp = CloughTocher2DInterpolator(tri, mesh.vals)

    def evaluate(queries):
        queries = np.asarray(queries, dtype=np.float64).reshape(-1, 2)
        out = interp(queries)
        outside = np.isnan(out)
        if outside.any():
            out[outside] = _nearest(mesh, queries[outside], tree)
        return out

    return evaluate


def _interpolate(mesh: MeshPointSet, queries: np.ndarray, kind: str) -> np.ndarray:
    return scattered_interpolator(mesh, kind)(queries)


def interpolate_linear_at(mesh: MeshPointSet, queries) -> np.ndarray:
    return _interpolate(mesh, np.asarray(queries, dtype=np.float64).reshape(-1, 2), "linear")


def interpolate_cubic_at(mesh: MeshPointSet, queries) -> np.ndarray:
    return _interpolate(mesh, np.asarray(queries, dtype=np.float64).reshape(-1, 2), "cubic")


def interpolate_linear(mesh: MeshPointSet, width: int, height: int) -> np.ndarray:
    return interpolate_linear_at(mesh, grid_points(width, height)).reshape(height, width)


def interpolate_cubic(mesh: MeshPointSet, width: int, height: int) -> np.ndarray:
    return interpolate_cubic_at(mesh, grid_points(width, height)).reshape(height, width)


def interpolate_nwe_at(mesh: MeshPointSet, queries, cfg: NweConfig | None = None) -> np.ndarray:
    """Gaussian Nadaraya-Watson estimate at ``queries``.

    Only mesh points within ``cfg.radius`` contribute; a query with none in
    range takes the nearest mesh point's value.
    """
    cfg = cfg or NweConfig()
    if len(mesh) == 0:
        raise ValueError("mesh is empty")
    queries = np.asarray(queries, dtype=np.float64).reshape(-1, 2)
    mesh_tree = cKDTree(mesh.coords)
    pairs = cKDTree(queries).sparse_distance_matrix(mesh_tree, cfg.radius, output_type="ndarray")
    rows, cols, dist = pairs["i"], pairs["j"], pairs["v"]
    weights = np.exp(-0.5 * (dist / cfg.bandwidth) ** 2)
    num = np.bincount(rows, weights=weights * mesh.vals[cols], minlength=len(queries))
    den = np.bincount(rows, weights=weights, minlength=len(queries))
    out = np.empty(len(queries))
    covered = den > 0
    out[covered] = num[covered] / den[covered]
    if (~covered).any():
        out[~covered] = _nearest(mesh, queries[~covered], mesh_tree)
    return out


def interpolate_nwe(mesh: MeshPointSet, width: int, height: int, cfg: NweConfig | None = None) -> np.ndarray:
    return interpolate_nwe_at(mesh, grid_points(width, height), cfg).reshape(height, width)
