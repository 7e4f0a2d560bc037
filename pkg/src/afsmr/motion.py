"""Motion fields and forward motion compensation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import MeshPointSet, MotionField, as_frame


@dataclass(frozen=True)
class BlockMatchConfig:
    block_size: int = 8
    search_range: int = 8

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError(f"block_size must be >= 1, got {self.block_size}")
        if self.search_range < 0:
            raise ValueError(f"search_range must be >= 0, got {self.search_range}")


def _candidate_order(search_range: int) -> list[tuple[int, int]]:
    """All ``(dm, dn)`` in the search window, in tie-breaking priority:
    smallest magnitude first, then lexicographic ``(dn, dm)``."""
    r = range(-search_range, search_range + 1)
    cands = [(dm, dn) for dn in r for dm in r]
    return sorted(cands, key=lambda d: (d[0] * d[0] + d[1] * d[1], d[1], d[0]))


def estimate_block_matching(prev, next_, cfg: BlockMatchConfig | None = None) -> MotionField:
    """Integer-pel full-search block matching with SAD cost.

    For each block of ``prev`` the displacement into ``next_`` with minimal
    SAD is assigned to all its pixels. Candidates that would leave the frame
    are skipped; zero displacement is always admissible.
    """
    cfg = cfg or BlockMatchConfig()
    prev, next_ = as_frame(prev), as_frame(next_)
    if prev.shape != next_.shape:
        raise ValueError(f"frame shapes differ: {prev.shape} vs {next_.shape}")
    height, width = prev.shape
    B = cfg.block_size
    dm = np.zeros((height, width))
    dn = np.zeros((height, width))
    order = _candidate_order(cfg.search_range)
    for by in range(0, height, B):
        for bx in range(0, width, B):
            block = prev[by : by + B, bx : bx + B]
            bh, bw = block.shape
            best, best_cost = (0, 0), np.inf
            for cm, cn in order:
                y, x = by + cn, bx + cm
                if y < 0 or x < 0 or y + bh > height or x + bw > width:
                    continue
                cost = np.abs(next_[y : y + bh, x : x + bw] - block).sum()
                # strict comparison keeps the earliest candidate on ties
                if cost < best_cost:
                    best, best_cost = (cm, cn), cost
            dm[by : by + bh, bx : bx + bw] = best[0]
            dn[by : by + bh, bx : bx + bw] = best[1]
    return MotionField(dm, dn)


@dataclass(frozen=True)
class GlobalTranslation:
    dx: float
    dy: float


@dataclass(frozen=True)
class Affine:
    """Maps pixel ``(m, n)`` to ``(a11 m + a12 n + tx, a21 m + a22 n + ty)``."""

    a11: float = 1.0
    a12: float = 0.0
    a21: float = 0.0
    a22: float = 1.0
    tx: float = 0.0
    ty: float = 0.0


def synthesize_flow(spec, width: int, height: int) -> MotionField:
    if isinstance(spec, GlobalTranslation):
        return MotionField(np.full((height, width), float(spec.dx)), np.full((height, width), float(spec.dy)))
    if isinstance(spec, Affine):
        n, m = np.mgrid[0:height, 0:width].astype(np.float64)
        return MotionField(
            spec.a11 * m + spec.a12 * n + spec.tx - m,
            spec.a21 * m + spec.a22 * n + spec.ty - n,
        )
    raise TypeError(f"unsupported flow spec {type(spec).__name__}")


def parse_flow_spec(text: str):
    """Parse ``"translate:dx,dy"`` or ``"affine:a11,a12,a21,a22,tx,ty"``."""
    kind, _, params = text.partition(":")
    values = [float(v) for v in params.split(",")] if params else []
    if kind == "translate" and len(values) == 2:
        return GlobalTranslation(*values)
    if kind == "affine" and len(values) == 6:
        return Affine(*values)
    raise ValueError(f"cannot parse flow spec {text!r}; expected translate:dx,dy or affine:a11,a12,a21,a22,tx,ty")


def motion_compensate_forward(prev, flow: MotionField, t: float = 0.5) -> MeshPointSet:
    """Shift every pixel of ``prev`` a fraction ``t`` along its motion vector.

    The result keeps one point per pixel, including points that land
    outside the frame.
    """
    prev = as_frame(prev)
    if prev.shape != flow.shape:
        raise ValueError(f"frame shape {prev.shape} does not match flow shape {flow.shape}")
    n, m = np.mgrid[0 : prev.shape[0], 0 : prev.shape[1]]
    return MeshPointSet(
        (m + t * flow.dm).ravel(),
        (n + t * flow.dn).ravel(),
        prev.ravel(),
    )
