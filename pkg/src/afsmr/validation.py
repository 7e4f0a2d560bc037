"""Input checks shared by the estimator classes and the CLI."""

from __future__ import annotations

import math

import numpy as np
from sklearn.utils.validation import check_array, check_X_y

from .types import MeshPointSet


def check_mesh(X, y) -> MeshPointSet:
    """Validate ``X`` of shape ``(n, 2)`` holding ``(x, y)`` positions and
    sample values ``y``; return them as a :class:`MeshPointSet`."""
    X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
    if X.shape[1] != 2:
        raise ValueError(f"X must have two columns (x, y), got {X.shape[1]}")
    return MeshPointSet(X[:, 0], X[:, 1], y)


def check_positions(X) -> np.ndarray:
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != 2:
        raise ValueError(f"X must have two columns (x, y), got {X.shape[1]}")
    return X


def infer_frame_size(mesh: MeshPointSet, width=None, height=None) -> tuple[int, int]:
    """Use the given size or the smallest grid enclosing every point
    with a non-negative position."""
    if width is None:
        width = max(1, math.floor(max(float(mesh.xs.max()), 0.0)) + 1)
    if height is None:
        height = max(1, math.floor(max(float(mesh.ys.max()), 0.0)) + 1)
    width, height = int(width), int(height)
    if width < 1 or height < 1:
        raise ValueError(f"frame size must be positive, got {width}x{height}")
    return width, height
