"""Shared containers for motion fields and irregular point sets.

Coordinates follow one convention everywhere: ``m`` / ``x`` is the
horizontal (column) index, ``n`` / ``y`` the vertical (row) index, origin
at the top-left pixel centre. Regular frames are plain 2-D ``float64``
arrays of shape ``(height, width)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def as_frame(values) -> np.ndarray:
    """Return ``values`` as a finite 2-D float64 frame."""
    frame = np.asarray(values, dtype=np.float64)
    if frame.ndim != 2 or frame.size == 0:
        raise ValueError(f"frame must be a non-empty 2-D array, got shape {frame.shape}")
    if not np.all(np.isfinite(frame)):
        raise ValueError("frame contains non-finite values")
    return frame


@dataclass(frozen=True)
class MotionField:
    """Dense per-pixel displacement, ``dm`` horizontal and ``dn`` vertical."""

    dm: np.ndarray
    dn: np.ndarray

    def __post_init__(self):
        dm = np.asarray(self.dm, dtype=np.float64)
        dn = np.asarray(self.dn, dtype=np.float64)
        if dm.ndim != 2 or dm.shape != dn.shape:
            raise ValueError(f"dm/dn shapes differ or are not 2-D: {dm.shape} vs {dn.shape}")
        if not (np.all(np.isfinite(dm)) and np.all(np.isfinite(dn))):
            raise ValueError("motion field contains non-finite components")
        dm.flags.writeable = False
        dn.flags.writeable = False
        object.__setattr__(self, "dm", dm)
        object.__setattr__(self, "dn", dn)

    @property
    def shape(self) -> tuple[int, int]:
        return self.dm.shape

    @property
    def height(self) -> int:
        return self.dm.shape[0]

    @property
    def width(self) -> int:
        return self.dm.shape[1]

    @classmethod
    def zeros(cls, width: int, height: int) -> "MotionField":
        return cls(np.zeros((height, width)), np.zeros((height, width)))

    def scaled(self, factor: float) -> "MotionField":
        return MotionField(self.dm * factor, self.dn * factor)


@dataclass(frozen=True)
class MeshPointSet:
    """Irregular samples ``(xs[i], ys[i]) -> vals[i]``.

    Points may sit at non-integer positions and outside the frame; clipping
    is left to the consumer.
    """

    xs: np.ndarray
    ys: np.ndarray
    vals: np.ndarray

    def __post_init__(self):
        arrays = []
        for name in ("xs", "ys", "vals"):
            a = np.ascontiguousarray(np.ravel(getattr(self, name)), dtype=np.float64)
            if not np.all(np.isfinite(a)):
                raise ValueError(f"mesh {name} contains non-finite entries")
            a.flags.writeable = False
            arrays.append(a)
        if not (len(arrays[0]) == len(arrays[1]) == len(arrays[2])):
            raise ValueError("mesh arrays must have equal length")
        for name, a in zip(("xs", "ys", "vals"), arrays):
            object.__setattr__(self, name, a)

    def __len__(self) -> int:
        return len(self.vals)

    @property
    def coords(self) -> np.ndarray:
        """``(n_points, 2)`` array of ``(x, y)`` pairs."""
        return np.column_stack([self.xs, self.ys])

    @classmethod
    def from_frame(cls, frame) -> "MeshPointSet":
        """Every pixel of ``frame`` at its own integer position."""
        frame = as_frame(frame)
        ys, xs = np.mgrid[0 : frame.shape[0], 0 : frame.shape[1]]
        return cls(xs.ravel(), ys.ravel(), frame.ravel())

    def take(self, index) -> "MeshPointSet":
        return MeshPointSet(self.xs[index], self.ys[index], self.vals[index])
