"""Raw I420 luma, Middlebury ``.flo`` and binary PGM file handling."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .types import MeshPointSet, MotionField, as_frame

FLO_MAGIC = 202021.25
FLO_MAGIC_BYTES = b"PIEH"
# Middlebury convention for "unknown flow"
FLO_UNKNOWN_THRESHOLD = 1e9


class FormatError(ValueError):
    """Raised when a file does not match the expected binary layout."""


def _check_i420_dims(width: int, height: int) -> None:
    if width <= 0 or height <= 0:
        raise ValueError(f"frame dimensions must be positive, got {width}x{height}")
    if width % 2 or height % 2:
        raise ValueError(f"I420 requires even dimensions, got {width}x{height}")


def yuv_frame_bytes(width: int, height: int) -> int:
    _check_i420_dims(width, height)
    return width * height * 3 // 2


def count_yuv_frames(path, width: int, height: int) -> int:
    return os.path.getsize(path) // yuv_frame_bytes(width, height)


def read_yuv_frame(path, frame_index: int, width: int, height: int) -> np.ndarray:
    """Read the luma plane of frame ``frame_index`` (0-based) from a planar
    8-bit YUV 4:2:0 file. Chroma is skipped."""
    frame_size = yuv_frame_bytes(width, height)
    if frame_index < 0:
        raise ValueError("frame_index must be non-negative")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    offset = frame_index * frame_size
    if path.stat().st_size < offset + frame_size:
        raise FormatError(
            f"{path}: frame {frame_index} lies beyond end of file "
            f"({path.stat().st_size} bytes, need {offset + frame_size})"
        )
    with open(path, "rb") as fh:
        fh.seek(offset)
        luma = np.frombuffer(fh.read(width * height), dtype=np.uint8)
    return luma.reshape(height, width).astype(np.float64)


def write_yuv_frames(path, frames, append: bool = False) -> None:
    """Write luma frames as I420 with neutral (128) chroma.

    Values are rounded and clamped to 8 bits.
    """
    with open(path, "ab" if append else "wb") as fh:
        for frame in frames:
            frame = as_frame(frame)
            height, width = frame.shape
            _check_i420_dims(width, height)
            fh.write(quantize(frame).tobytes())
            fh.write(np.full(width * height // 2, 128, dtype=np.uint8).tobytes())


def quantize(frame) -> np.ndarray:
    """Round to nearest and clamp to ``uint8``."""
    return np.clip(np.rint(np.asarray(frame, dtype=np.float64)), 0, 255).astype(np.uint8)


def read_flo(path, unknown: str = "error") -> MotionField:
    """Read a Middlebury ``.flo`` file.

    ``unknown`` controls components with magnitude above 1e9 (the format's
    "unknown flow" marker): ``"error"`` raises, ``"zero"`` maps the whole
    vector to (0, 0).
    """
    if unknown not in ("error", "zero"):
        raise ValueError(f"unknown must be 'error' or 'zero', got {unknown!r}")
    raw = Path(path).read_bytes()
    if len(raw) < 12:
        raise FormatError(f"{path}: too short for a .flo header")
    magic = np.frombuffer(raw, dtype="<f4", count=1)[0]
    if magic != np.float32(FLO_MAGIC):
        raise FormatError(f"{path}: bad .flo magic {raw[:4]!r}")
    width, height = (int(v) for v in np.frombuffer(raw, dtype="<i4", count=2, offset=4))
    if width <= 0 or height <= 0:
        raise FormatError(f"{path}: invalid dimensions {width}x{height}")
    expected = 12 + width * height * 8
    if len(raw) != expected:
        raise FormatError(f"{path}: size {len(raw)} does not match {width}x{height} ({expected} bytes)")
    uv = np.frombuffer(raw, dtype="<f4", offset=12).reshape(height, width, 2).astype(np.float64)
    if not np.all(np.isfinite(uv)):
        raise FormatError(f"{path}: non-finite flow components")
    bad = np.any(np.abs(uv) > FLO_UNKNOWN_THRESHOLD, axis=2)
    if bad.any():
        if unknown == "error":
            raise FormatError(f"{path}: {int(bad.sum())} vectors carry the unknown-flow marker")
        uv[bad] = 0.0
    return MotionField(uv[..., 0], uv[..., 1])


def write_flo(field: MotionField, path) -> None:
    uv = np.stack([field.dm, field.dn], axis=-1).astype("<f4")
    header = np.array([FLO_MAGIC], dtype="<f4").tobytes()
    header += np.array([field.width, field.height], dtype="<i4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(uv.tobytes())


def write_frame_pgm(frame, path) -> None:
    data = quantize(as_frame(frame))
    height, width = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read an 8-bit binary (P5) PGM. Comment lines are skipped."""
    raw = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    if tokens[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise FormatError(f"{path}: only maxval 255 is supported, got {maxval}")
    pos += 1
    data = np.frombuffer(raw, dtype=np.uint8, count=width * height, offset=pos)
    return data.reshape(height, width).astype(np.float64)


def write_mesh_csv(mesh: MeshPointSet, path) -> None:
    """Write a point set as ``x,y,value`` rows with full float precision."""
    data = np.column_stack([mesh.xs, mesh.ys, mesh.vals])
    np.savetxt(path, data, delimiter=",", header="x,y,value", comments="", fmt="%.17g")


def read_mesh_csv(path) -> MeshPointSet:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3:
        raise FormatError(f"{path}: expected 3 columns x,y,value, got {data.shape[1]}")
    return MeshPointSet(data[:, 0], data[:, 1], data[:, 2])
