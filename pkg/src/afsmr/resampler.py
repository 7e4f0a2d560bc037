"""Frequency-selective mesh-to-grid resampling.

The frame is cut into blocks; each block plus a support border forms a
reconstruction area. Inside an area the signal is modelled as a sparse sum
of 2-D DCT-II basis functions, built greedily: every iteration estimates a
weighted least-squares coefficient for each candidate frequency, picks the
frequency whose spectrally weighted energy reduction is largest, adds it to
the model and updates the residual at the sample points. The finished model
is then evaluated on the integer positions of the central block.

Two variants share this machinery:

* ``"AFSMR"`` fits the model to the mesh points only.
* ``"FSMR"`` first adds key points on the integer grid of the area whose
  values come from piecewise cubic interpolation of the mesh.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ._kernel import TIE_RTOL, greedy_fit
from .types import MeshPointSet

VARIANTS = ("AFSMR", "FSMR")
KEY_POINT_PLACEMENTS = ("area", "block")

# A denominator below this fraction of the total spatial weight means the
# basis function is numerically zero at every sample point.
_UNAVAILABLE_RTOL = 1e-12
# Energy at or below this fraction of the starting energy is treated as exact
# convergence, so rounding noise is never fitted.
_ZERO_ENERGY_RTOL = 1e-24


@dataclass(frozen=True)
class ResamplerConfig:
    block_size: int = 4
    border: int = 6
    rho: float = 0.8
    sigma: float = 0.5
    max_iterations: int = 500
    residual_energy_stop: float = 0.0
    variant: str = "AFSMR"
    key_points: str = "area"

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError(f"block_size must be >= 1, got {self.block_size}")
        if self.border < 0:
            raise ValueError(f"border must be >= 0, got {self.border}")
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError(f"sigma must lie in (0, 1), got {self.sigma}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.residual_energy_stop < 0:
            raise ValueError("residual_energy_stop must be non-negative")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.key_points not in KEY_POINT_PLACEMENTS:
            raise ValueError(f"key_points must be one of {KEY_POINT_PLACEMENTS}, got {self.key_points!r}")

    @property
    def area_size(self) -> int:
        """Side length of an uncropped reconstruction area."""
        return self.block_size + 2 * self.border


@dataclass(frozen=True)
class AreaDescriptor:
    """Placement of one reconstruction area in frame coordinates.

    ``x0, y0`` is the top-left corner of the (cropped) area, ``width`` x
    ``height`` its size; ``block_*`` describe the central block it owns.
    """

    x0: int
    y0: int
    width: int
    height: int
    block_x0: int
    block_y0: int
    block_width: int
    block_height: int

    @property
    def block_slices(self) -> tuple[slice, slice]:
        """Row and column slices of the central block inside the frame."""
        return (
            slice(self.block_y0, self.block_y0 + self.block_height),
            slice(self.block_x0, self.block_x0 + self.block_width),
        )


@dataclass(frozen=True)
class ReconstructionArea:
    """Sample points of one area in area-local coordinates.

    The first ``n_mesh`` points are mesh points, any remaining ones are FSMR
    key points. ``grid_x`` / ``grid_y`` are the local integer positions of
    the central block.
    """

    descriptor: AreaDescriptor
    xs: np.ndarray
    ys: np.ndarray
    vals: np.ndarray
    n_mesh: int

    @property
    def M(self) -> int:
        return self.descriptor.width

    @property
    def N(self) -> int:
        return self.descriptor.height

    @property
    def grid_x(self) -> np.ndarray:
        d = self.descriptor
        return np.arange(d.block_x0 - d.x0, d.block_x0 - d.x0 + d.block_width, dtype=np.float64)

    @property
    def grid_y(self) -> np.ndarray:
        d = self.descriptor
        return np.arange(d.block_y0 - d.y0, d.block_y0 - d.y0 + d.block_height, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.vals)


@dataclass
class ModelState:
    """Accumulated model of one area.

    ``coefficients[k, l]`` multiplies the basis function with horizontal
    frequency ``k`` and vertical frequency ``l``. ``residual`` is aligned
    with the area's points. ``energy_history[0]`` is the energy of the
    zero model; entry ``i`` the energy after iteration ``i``.
    """

    coefficients: np.ndarray
    residual: np.ndarray
    iterations: int = 0
    energy: float = 0.0
    energy_history: list = field(default_factory=list)
    selections: list = field(default_factory=list)


def partition(frame_width: int, frame_height: int, cfg: ResamplerConfig) -> list[AreaDescriptor]:
    """Tile the frame with ``block_size`` blocks, each grown by ``border`` and
    cropped to the frame. Blocks are listed row by row."""
    if frame_width < 1 or frame_height < 1:
        raise ValueError("frame dimensions must be >= 1")
    B, D = cfg.block_size, cfg.border
    areas = []
    for by in range(0, frame_height, B):
        bh = min(B, frame_height - by)
        y0, y1 = max(0, by - D), min(frame_height, by + bh + D)
        for bx in range(0, frame_width, B):
            bw = min(B, frame_width - bx)
            x0, x1 = max(0, bx - D), min(frame_width, bx + bw + D)
            areas.append(AreaDescriptor(x0, y0, x1 - x0, y1 - y0, bx, by, bw, bh))
    return areas


def gather_mesh(descriptor: AreaDescriptor, mesh: MeshPointSet) -> ReconstructionArea:
    """Collect the mesh points falling into ``[0, M) x [0, N)`` of the area."""
    xs = mesh.xs - descriptor.x0
    ys = mesh.ys - descriptor.y0
    inside = (xs >= 0) & (xs < descriptor.width) & (ys >= 0) & (ys < descriptor.height)
    return ReconstructionArea(descriptor, xs[inside], ys[inside], mesh.vals[inside], int(inside.sum()))


class MeshIndex:
    """Buckets mesh points into square cells so an area only scans the
    points near it. ``gather`` returns the same points, in the same order,
    as :func:`gather_mesh`."""

    def __init__(self, mesh: MeshPointSet, cell: int):
        self.mesh = mesh
        self.cell = cell
        cx = np.floor(mesh.xs / cell).astype(np.int64)
        cy = np.floor(mesh.ys / cell).astype(np.int64)
        if len(mesh) == 0:
            cx = cy = np.zeros(1, dtype=np.int64)
        self.cx_min, self.cy_min = int(cx.min()), int(cy.min())
        self.ncx = int(cx.max()) - self.cx_min + 1
        self.ncy = int(cy.max()) - self.cy_min + 1
        key = ((cy - self.cy_min) * self.ncx + (cx - self.cx_min))[: len(mesh)]
        self.order = np.argsort(key, kind="stable")
        self.starts = np.searchsorted(key[self.order], np.arange(self.ncx * self.ncy + 1))

    def gather(self, descriptor: AreaDescriptor) -> ReconstructionArea:
        d = descriptor
        c0x = max(d.x0 // self.cell - self.cx_min, 0)
        c1x = min((d.x0 + d.width - 1) // self.cell - self.cx_min, self.ncx - 1)
        c0y = max(d.y0 // self.cell - self.cy_min, 0)
        c1y = min((d.y0 + d.height - 1) // self.cell - self.cy_min, self.ncy - 1)
        if c1x < c0x or c1y < c0y:
            idx = np.empty(0, dtype=np.int64)
        else:
            rows = [
                self.order[self.starts[cy * self.ncx + c0x] : self.starts[cy * self.ncx + c1x + 1]]
                for cy in range(c0y, c1y + 1)
            ]
            idx = np.sort(np.concatenate(rows))
        xs = self.mesh.xs[idx] - d.x0
        ys = self.mesh.ys[idx] - d.y0
        inside = (xs >= 0) & (xs < d.width) & (ys >= 0) & (ys < d.height)
        return ReconstructionArea(d, xs[inside], ys[inside], self.mesh.vals[idx][inside], int(inside.sum()))


def add_key_points(area: ReconstructionArea, estimate: np.ndarray, placement: str = "area") -> ReconstructionArea:
    """Append one key point per integer position of the area (or of its
    central block only), valued from the frame-sized ``estimate``."""
    d = area.descriptor
    if placement == "area":
        ky, kx = np.mgrid[0 : d.height, 0 : d.width]
    elif placement == "block":
        ky, kx = np.meshgrid(area.grid_y.astype(int), area.grid_x.astype(int), indexing="ij")
    else:
        raise ValueError(f"unknown key point placement {placement!r}")
    kx, ky = kx.ravel(), ky.ravel()
    kvals = estimate[ky + d.y0, kx + d.x0]
    return ReconstructionArea(
        d,
        np.concatenate([area.xs[: area.n_mesh], kx.astype(np.float64)]),
        np.concatenate([area.ys[: area.n_mesh], ky.astype(np.float64)]),
        np.concatenate([area.vals[: area.n_mesh], kvals]),
        area.n_mesh,
    )


def spatial_weight(x, y, M: int, N: int, rho: float):
    """Isotropic window ``rho ** distance`` around the area centre."""
    dist = np.hypot(np.asarray(x, dtype=np.float64) - (M - 1) / 2, np.asarray(y, dtype=np.float64) - (N - 1) / 2)
    return rho**dist


def spectral_weight(k, l, sigma: float):
    """Frequency prior ``sigma ** sqrt(k**2 + l**2)``."""
    return sigma ** np.hypot(np.asarray(k, dtype=np.float64), np.asarray(l, dtype=np.float64))


def dct_basis(positions, size: int) -> np.ndarray:
    """1-D DCT-II atoms ``cos(pi k (2x + 1) / (2 size))`` for every ``k < size``.

    Returns shape ``(size, len(positions))``; positions may be continuous.
    """
    k = np.arange(size, dtype=np.float64)[:, None]
    x = np.asarray(positions, dtype=np.float64)[None, :]
    return np.cos(np.pi * k * (2.0 * x + 1.0) / (2.0 * size))


def basis_function(k: int, l: int, x, y, M: int, N: int):
    """Separable 2-D atom ``phi_(k,l)`` at continuous positions."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.cos(np.pi * k * (2 * x + 1) / (2 * M)) * np.cos(np.pi * l * (2 * y + 1) / (2 * N))


class _AreaSystem:
    """Per-area quantities that stay fixed while the model grows."""

    def __init__(self, area: ReconstructionArea, cfg: ResamplerConfig):
        self.M, self.N = area.M, area.N
        self.cx = dct_basis(area.xs, self.M)  # (M, P)
        self.cyT = np.ascontiguousarray(dct_basis(area.ys, self.N).T)  # (P, N)
        self.w = spatial_weight(area.xs, area.ys, self.M, self.N, cfg.rho)
        self.denominator = (self.cx**2 * self.w) @ (self.cyT**2)
        self.available = self.denominator > _UNAVAILABLE_RTOL * self.w.sum()
        wf = spectral_weight(np.arange(self.M)[:, None], np.arange(self.N)[None, :], cfg.sigma)
        self.score_scale = np.zeros_like(wf)
        np.divide(wf, self.denominator, out=self.score_scale, where=self.available)

    def numerator(self, residual: np.ndarray) -> np.ndarray:
        return (self.cx * (self.w * residual)) @ self.cyT

    def energy(self, residual: np.ndarray) -> float:
        return float(np.dot(self.w, residual * residual))


def estimate_coefficient(k: int, l: int, state: ModelState, area: ReconstructionArea, cfg: ResamplerConfig):
    """Weighted least-squares coefficient of ``phi_(k,l)`` for the current
    residual, or ``None`` if the atom vanishes at every point of the area."""
    phi = basis_function(k, l, area.xs, area.ys, area.M, area.N)
    w = spatial_weight(area.xs, area.ys, area.M, area.N, cfg.rho)
    den = float(np.dot(w, phi * phi))
    if not den > _UNAVAILABLE_RTOL * w.sum():
        return None
    return float(np.dot(w * phi, state.residual)) / den


def select_basis(state: ModelState, area: ReconstructionArea, cfg: ResamplerConfig):
    """Frequency ``(u, v)`` maximising the spectrally weighted energy gain.

    Ties go to the lexicographically smallest ``(k, l)``. Returns ``None``
    when no frequency has a usable coefficient.
    """
    return _select(_AreaSystem(area, cfg), state.residual)


def _select(system: _AreaSystem, residual: np.ndarray):
    num = system.numerator(residual)
    score = num * num * system.score_scale
    best = score.max()
    if not best > 0.0:
        return None
    # argmax returns the first hit in C order, i.e. the smallest (k, l)
    flat = int(np.argmax(score >= best * (1.0 - TIE_RTOL)))
    return divmod(flat, system.N)


def generate_model(area: ReconstructionArea, cfg: ResamplerConfig):
    """Greedy model fit on one area; ``None`` if the area has no mesh points.

    Key points, if the area carries any, are treated exactly like mesh
    points. The loop ends after ``max_iterations``, once the weighted
    residual energy drops to ``residual_energy_stop`` (or numerically zero),
    or when no frequency can reduce it further.
    """
    if area.n_mesh == 0:
        return None
    system = _AreaSystem(area, cfg)
    start = system.energy(area.vals)
    floor = max(cfg.residual_energy_stop, _ZERO_ENERGY_RTOL * start)
    coefficients, residual, history, su, sv, sc = greedy_fit(
        system.cx,
        system.cyT,
        system.w,
        np.ascontiguousarray(area.vals),
        system.denominator,
        system.score_scale,
        cfg.max_iterations,
        floor,
    )
    return ModelState(
        coefficients=coefficients,
        residual=residual,
        iterations=len(sc),
        energy=float(history[-1]),
        energy_history=history.tolist(),
        selections=list(zip(su.tolist(), sv.tolist(), sc.tolist())),
    )


def synthesize_grid(state: ModelState, area: ReconstructionArea) -> np.ndarray:
    """Evaluate the model on the central block; returns ``(rows, cols)``."""
    bx = dct_basis(area.grid_x, area.M)  # (M, bw)
    by = dct_basis(area.grid_y, area.N)  # (N, bh)
    return by.T @ state.coefficients.T @ bx


def evaluate_model(state: ModelState, area: ReconstructionArea, x, y) -> np.ndarray:
    """Evaluate the model at arbitrary area-local positions."""
    cx = dct_basis(np.ravel(x), area.M)
    cy = dct_basis(np.ravel(y), area.N)
    return np.einsum("kp,kl,lp->p", cx, state.coefficients, cy)


@dataclass
class AreaResult:
    """Fitted model of one area and its synthesized central block.

    ``state`` is ``None`` for areas without mesh points; their ``patch``
    holds the nearest-mesh-point fallback.
    """

    descriptor: AreaDescriptor
    area: ReconstructionArea
    state: ModelState | None
    patch: np.ndarray


def fit_areas(
    mesh: MeshPointSet,
    width: int,
    height: int,
    cfg: ResamplerConfig | None = None,
    n_jobs: int = 1,
) -> list[AreaResult]:
    """Fit one model per reconstruction area, in :func:`partition` order.

    ``n_jobs`` other than 1 runs areas on a thread pool (``-1``: one thread
    per CPU); every area owns a disjoint block, so the result does not
    depend on scheduling.
    """
    cfg = cfg or ResamplerConfig()
    if len(mesh) == 0:
        raise ValueError("mesh is empty, nothing to resample")
    estimate = None
    if cfg.variant == "FSMR":
        from .baselines import interpolate_cubic

        estimate = interpolate_cubic(mesh, width, height)

    index = MeshIndex(mesh, cfg.block_size)

    def run(descriptor):
        area = index.gather(descriptor)
        if estimate is not None and area.n_mesh:
            area = add_key_points(area, estimate, cfg.key_points)
        state = generate_model(area, cfg)
        patch = None if state is None else synthesize_grid(state, area)
        return AreaResult(descriptor, area, state, patch)

    descriptors = partition(width, height, cfg)
    if n_jobs == 1:
        results = [run(d) for d in descriptors]
    else:
        with ThreadPoolExecutor(max_workers=None if n_jobs < 1 else n_jobs) as pool:
            results = list(pool.map(run, descriptors))

    empty = [res for res in results if res.state is None]
    if empty:
        tree = cKDTree(mesh.coords)
        for res in empty:
            rows, cols = res.descriptor.block_slices
            gy, gx = np.mgrid[rows, cols]
            _, idx = tree.query(np.column_stack([gx.ravel(), gy.ravel()]))
            res.patch = mesh.vals[idx].reshape(gy.shape)
    return results


def assemble(results: list[AreaResult], width: int, height: int) -> np.ndarray:
    """Paste the block patches into a frame, clamped to ``[0, 255]``."""
    out = np.empty((height, width))
    for res in results:
        out[res.descriptor.block_slices] = res.patch
    return np.clip(out, 0.0, 255.0, out=out)


def resample_frame(
    mesh: MeshPointSet,
    width: int,
    height: int,
    cfg: ResamplerConfig | None = None,
    n_jobs: int = 1,
) -> np.ndarray:
    """Resample ``mesh`` onto the ``height x width`` integer grid.

    Blocks whose area holds no mesh point take the value of the nearest
    mesh point. Output is clamped to ``[0, 255]``.
    """
    return assemble(fit_areas(mesh, width, height, cfg, n_jobs), width, height)


def write_model_trace(results, path) -> None:
    """Dump ``(area, iteration, u, v, coefficient)`` rows of every model."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["area", "x0", "y0", "iteration", "u", "v", "coefficient", "energy"])
        for i, res in enumerate(results):
            if res.state is None:
                continue
            d = res.descriptor
            for it, (u, v, c) in enumerate(res.state.selections, start=1):
                writer.writerow([i, d.x0, d.y0, it, u, v, repr(c), repr(res.state.energy_history[it])])

