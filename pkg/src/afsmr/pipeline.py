"""Frame rate up-conversion evaluation protocol.

Frames are numbered from 1, as in the usual "frame 62" references; frame
``c`` is stored at 0-based position ``c - 1`` of the YUV file. For every
target ``c = offset, offset + stride, ... <= first_n`` the previous frame
``c - 1`` is motion compensated halfway along the flow ``c-1 -> c+1``,
each method resamples the resulting mesh and the result is scored against
the true frame ``c``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .estimators import make_resampler
from .frame_io import count_yuv_frames, read_flo, read_yuv_frame, write_flo, write_frame_pgm
from .metrics import psnr, ssim
from .motion import BlockMatchConfig, estimate_block_matching, motion_compensate_forward, parse_flow_spec, synthesize_flow

log = logging.getLogger(__name__)

ALL_METHODS = ("LIN", "CUB", "NWE", "FSMR", "AFSMR")
FLOW_SOURCES = ("flo", "block_matching", "synthetic")
CSV_COLUMNS = ("sequence", "frame", "method", "psnr_db", "ssim", "runtime_s")


@dataclass
class RunConfig:
    input: str
    width: int
    height: int
    sequence: str | None = None
    flow_source: str = "block_matching"
    flow_dir: str | None = None
    flow_spec: str | None = None
    flo_unknown: str = "error"
    methods: list = field(default_factory=lambda: list(ALL_METHODS))
    first_n: int = 100
    stride: int = 2
    offset: int = 2
    resampler: dict = field(default_factory=dict)
    nwe: dict = field(default_factory=dict)
    block_match: dict = field(default_factory=dict)
    output_dir: str = "fruc_out"
    write_frames: bool = False
    quantize_metrics: bool = False
    metric_border: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.first_n < 3:
            raise ValueError(f"first_n must be >= 3, got {self.first_n}")
        if self.stride < 2:
            raise ValueError(f"stride must be >= 2, got {self.stride}")
        if not 2 <= self.offset <= self.first_n:
            raise ValueError(f"offset must lie in [2, first_n], got {self.offset}")
        if self.flow_source not in FLOW_SOURCES:
            raise ValueError(f"flow_source must be one of {FLOW_SOURCES}, got {self.flow_source!r}")
        if self.flow_source == "flo" and not self.flow_dir:
            raise ValueError("flow_source 'flo' needs flow_dir")
        if self.flow_source == "synthetic":
            if not self.flow_spec:
                raise ValueError("flow_source 'synthetic' needs flow_spec")
            parse_flow_spec(self.flow_spec)
        self.methods = [m.upper() for m in self.methods]
        unknown = set(self.methods) - set(ALL_METHODS)
        if unknown or not self.methods:
            raise ValueError(f"methods must be a non-empty subset of {ALL_METHODS}, got {self.methods}")
        if self.metric_border < 0:
            raise ValueError("metric_border must be non-negative")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    @property
    def targets(self) -> list[int]:
        return list(range(self.offset, self.first_n + 1, self.stride))

    @property
    def sequence_name(self) -> str:
        return self.sequence or Path(self.input).stem


def flow_filename(c: int) -> str:
    return f"flow_{c - 1}_{c + 1}.flo"


class _Sequence:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        if not Path(cfg.input).exists():
            raise FileNotFoundError(cfg.input)
        self.n_frames = count_yuv_frames(cfg.input, cfg.width, cfg.height)

    def frame(self, c: int) -> np.ndarray:
        if not 1 <= c <= self.n_frames:
            raise ValueError(f"frame {c} requested but {self.cfg.input} holds {self.n_frames} frames")
        return read_yuv_frame(self.cfg.input, c - 1, self.cfg.width, self.cfg.height)


def _flow_for(cfg: RunConfig, seq: _Sequence, c: int, prev: np.ndarray):
    if cfg.flow_source == "flo":
        path = Path(cfg.flow_dir) / flow_filename(c)
        if not path.exists():
            raise FileNotFoundError(f"missing flow file {path}")
        flow = read_flo(path, unknown=cfg.flo_unknown)
        if flow.shape != prev.shape:
            raise ValueError(f"{path}: flow is {flow.width}x{flow.height}, frames are {cfg.width}x{cfg.height}")
        return flow
    if cfg.flow_source == "synthetic":
        return synthesize_flow(parse_flow_spec(cfg.flow_spec), cfg.width, cfg.height)
    return estimate_block_matching(prev, seq.frame(c + 1), BlockMatchConfig(**cfg.block_match))


def _crop(frame: np.ndarray, border: int) -> np.ndarray:
    if border == 0:
        return frame
    return frame[border:-border, border:-border]


def _method_params(cfg: RunConfig) -> dict:
    return {**cfg.resampler, **cfg.nwe, "n_jobs": cfg.n_jobs}


def reconstruct(method: str, prev: np.ndarray, flow, params: dict) -> tuple[np.ndarray, float]:
    """Motion compensate ``prev`` and resample with ``method``.

    Returns the frame and the wall-clock seconds spent on both steps.
    """
    height, width = prev.shape
    est = make_resampler(method, **params)
    start = time.perf_counter()
    mesh = motion_compensate_forward(prev, flow)
    out = est.fit_mesh(mesh, width=width, height=height).predict_grid()
    return out, time.perf_counter() - start


def run_fruc(cfg: RunConfig) -> list[dict]:
    """Run the protocol, write ``metrics.csv`` and ``config.json`` into
    ``cfg.output_dir`` (plus PGM frames if requested) and return the rows."""
    seq = _Sequence(cfg)
    if seq.n_frames < cfg.first_n:
        raise ValueError(f"{cfg.input} holds {seq.n_frames} frames, protocol needs {cfg.first_n}")
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = _method_params(cfg)
    rows = []
    for c in cfg.targets:
        prev, truth = seq.frame(c - 1), seq.frame(c)
        try:
            flow = _flow_for(cfg, seq, c, prev)
        except Exception as exc:
            raise RuntimeError(f"frame {c}: flow {c - 1}->{c + 1}: {exc}") from exc
        for method in cfg.methods:
            try:
                out, runtime = reconstruct(method, prev, flow, params)
            except Exception as exc:
                raise RuntimeError(f"frame {c}, method {method}: {exc}") from exc
            ref_c, out_c = _crop(truth, cfg.metric_border), _crop(out, cfg.metric_border)
            row = {
                "sequence": cfg.sequence_name,
                "frame": c,
                "method": method,
                "psnr_db": psnr(ref_c, out_c, to_uint8=cfg.quantize_metrics),
                "ssim": ssim(ref_c, out_c, to_uint8=cfg.quantize_metrics),
                "runtime_s": runtime,
            }
            log.info("frame %d %-5s %.3f dB  ssim %.4f  %.2f s", c, method, row["psnr_db"], row["ssim"], runtime)
            rows.append(row)
            if cfg.write_frames:
                write_frame_pgm(out, out_dir / f"{cfg.sequence_name}_{method}_{c:04d}.pgm")
    rows += average_rows(rows, cfg.methods)
    write_metrics_csv(rows, out_dir / "metrics.csv")
    write_effective_config(cfg, out_dir / "config.json")
    return rows


def average_rows(rows: list[dict], methods) -> list[dict]:
    out = []
    for method in methods:
        sel = [r for r in rows if r["method"] == method and r["frame"] != "average"]
        if not sel:
            continue
        out.append(
            {
                "sequence": sel[0]["sequence"],
                "frame": "average",
                "method": method,
                "psnr_db": float(np.mean([r["psnr_db"] for r in sel])),
                "ssim": float(np.mean([r["ssim"] for r in sel])),
                "runtime_s": float(np.mean([r["runtime_s"] for r in sel])),
            }
        )
    return out


def _fmt(value) -> str:
    if isinstance(value, float):
        return "inf" if math.isinf(value) else repr(value)
    return str(value)


def write_metrics_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])


def read_metrics_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        if row["frame"] != "average":
            row["frame"] = int(row["frame"])
        for key in ("psnr_db", "ssim", "runtime_s"):
            row[key] = float(row[key])
    return rows


def write_effective_config(cfg: RunConfig, path, **extra) -> None:
    doc = {
        "config": asdict(cfg),
        "flow_provenance": {
            "flo": f"files {cfg.flow_dir}/flow_<c-1>_<c+1>.flo",
            "block_matching": f"integer-pel SAD block matching {BlockMatchConfig(**cfg.block_match)}",
            "synthetic": f"synthetic flow {cfg.flow_spec}",
        }[cfg.flow_source],
        "parallelism": {"n_jobs": cfg.n_jobs},
        "version": __version__,
        **extra,
    }
    Path(path).write_text(json.dumps(doc, indent=2, default=str) + "\n")


def timing_rows(rows: list[dict], methods) -> list[dict]:
    """Mean per-frame runtime per method and its speed-up over FSMR.

    The speed-up entry is omitted when FSMR did not run.
    """
    averages = {r["method"]: r["runtime_s"] for r in average_rows(rows, methods)}
    out = []
    for method in methods:
        row = {"method": method, "runtime_s": averages[method]}
        if "FSMR" in averages:
            row["speedup_vs_fsmr"] = averages["FSMR"] / averages[method]
        out.append(row)
    return out


def run_timing(cfg: RunConfig) -> list[dict]:
    """Run the protocol and write ``timing.csv`` next to ``metrics.csv``."""
    rows = run_fruc(cfg)
    table = timing_rows(rows, cfg.methods)
    columns = ["method", "runtime_s"] + (["speedup_vs_fsmr"] if "FSMR" in cfg.methods else [])
    with open(Path(cfg.output_dir) / "timing.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in table:
            writer.writerow([_fmt(row[c]) for c in columns])
    return table


def generate_flows(cfg: RunConfig) -> list[Path]:
    """Write ``flow_<c-1>_<c+1>.flo`` for every protocol target into
    ``cfg.flow_dir`` using block matching or the synthetic spec."""
    if cfg.flow_source == "flo":
        raise ValueError("flow generation needs flow_source block_matching or synthetic")
    if not cfg.flow_dir:
        raise ValueError("flow_dir is required for flow generation")
    seq = _Sequence(cfg) if cfg.flow_source == "block_matching" else None
    out_dir = Path(cfg.flow_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for c in cfg.targets:
        prev = seq.frame(c - 1) if seq else np.zeros((cfg.height, cfg.width))
        flow = _flow_for(cfg, seq, c, prev)
        path = out_dir / flow_filename(c)
        write_flo(flow, path)
        paths.append(path)
    return paths
