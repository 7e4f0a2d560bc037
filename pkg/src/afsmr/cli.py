"""Command line entry point: ``afsmr {fruc,resample,timing,flow-gen,metrics}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .estimators import make_resampler
from .frame_io import read_flo, read_mesh_csv, read_pgm, read_yuv_frame, write_frame_pgm, write_mesh_csv
from .metrics import psnr, ssim
from .motion import motion_compensate_forward, parse_flow_spec, synthesize_flow
from .pipeline import ALL_METHODS, RunConfig, generate_flows, run_fruc, run_timing
from .resampler import write_model_trace
from .types import MotionField

log = logging.getLogger("afsmr")

RESAMPLER_FLAGS = ("block_size", "border", "rho", "sigma", "max_iterations", "residual_energy_stop", "key_points")
NWE_FLAGS = ("bandwidth", "support")


def _add_sequence_args(p: argparse.ArgumentParser, flows_optional: bool = True) -> None:
    p.add_argument("--config", help="JSON file with run settings; flags override it")
    p.add_argument("--input", help="planar 8-bit YUV 4:2:0 sequence")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--sequence", help="name used in the CSV (default: input file stem)")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--flow-dir", help="directory of flow_<c-1>_<c+1>.flo files")
    src.add_argument("--block-matching", action="store_true", help="estimate flows by block matching")
    src.add_argument("--synthetic", metavar="SPEC", help="translate:dx,dy or affine:a11,a12,a21,a22,tx,ty")
    p.add_argument("--bm-block-size", type=int)
    p.add_argument("--bm-search-range", type=int)
    p.add_argument("--flo-unknown", choices=("error", "zero"))
    p.add_argument("--first-n", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--offset", type=int, help="first target frame (1-based, default 2)")


def _add_method_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--methods", help=f"comma separated subset of {','.join(ALL_METHODS)}")
    p.add_argument("--block-size", type=int)
    p.add_argument("--border", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--residual-energy-stop", type=float)
    p.add_argument("--key-points", choices=("area", "block"))
    p.add_argument("--bandwidth", type=float, help="NWE Gaussian bandwidth in pixels")
    p.add_argument("--support", type=float, help="NWE support radius in pixels")
    p.add_argument("--jobs", type=int, help="threads per frame for FSMR/AFSMR (-1: all CPUs)")


def _run_config(args) -> RunConfig:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    simple = {
        "input": args.input,
        "width": args.width,
        "height": args.height,
        "sequence": args.sequence,
        "flo_unknown": args.flo_unknown,
        "first_n": args.first_n,
        "stride": args.stride,
        "offset": args.offset,
        "n_jobs": args.jobs,
    }
    for key, value in simple.items():
        if value is not None:
            data[key] = value
    for key in ("output_dir", "write_frames", "quantize_metrics", "metric_border"):
        value = getattr(args, key, None)
        if value not in (None, False):
            data[key] = value
    if args.flow_dir:
        data.update(flow_source="flo", flow_dir=args.flow_dir)
    elif args.block_matching:
        data["flow_source"] = "block_matching"
    elif args.synthetic:
        data.update(flow_source="synthetic", flow_spec=args.synthetic)
    if getattr(args, "methods", None):
        data["methods"] = [m.strip() for m in args.methods.split(",") if m.strip()]
    for group, names in (("resampler", RESAMPLER_FLAGS), ("nwe", NWE_FLAGS)):
        for name in names:
            value = getattr(args, name, None)
            if value is not None:
                data.setdefault(group, {})[name] = value
    bm = {"block_size": args.bm_block_size, "search_range": args.bm_search_range}
    data.setdefault("block_match", {}).update({k: v for k, v in bm.items() if v is not None})
    for required in ("input", "width", "height"):
        if data.get(required) is None:
            raise ValueError(f"--{required} is required (flag or config file)")
    return RunConfig.from_dict(data)


def cmd_fruc(args) -> int:
    cfg = _run_config(args)
    rows = run_fruc(cfg)
    for row in rows:
        if row["frame"] == "average":
            print(f"{row['method']:6s} PSNR {row['psnr_db']:.3f} dB  SSIM {row['ssim']:.4f}  {row['runtime_s']:.3f} s/frame")
    print(f"wrote {Path(cfg.output_dir) / 'metrics.csv'}")
    return 0


def cmd_timing(args) -> int:
    cfg = _run_config(args)
    for row in run_timing(cfg):
        speedup = f"  speed-up {row['speedup_vs_fsmr']:.1f}" if "speedup_vs_fsmr" in row else ""
        print(f"{row['method']:6s} {row['runtime_s']:.3f} s{speedup}")
    print(f"wrote {Path(cfg.output_dir) / 'timing.csv'}")
    return 0


def cmd_flow_gen(args) -> int:
    if not args.output:
        raise ValueError("--output directory is required")
    cfg = _run_config(args)
    cfg.flow_dir = args.output
    paths = generate_flows(cfg)
    print(f"wrote {len(paths)} flow files to {args.output}")
    return 0


def _load_frame(path, frame_index, width, height):
    if str(path).lower().endswith(".pgm"):
        return read_pgm(path)
    if width is None or height is None:
        raise ValueError(f"{path}: --width and --height are needed for YUV input")
    return read_yuv_frame(path, frame_index - 1, width, height)


def cmd_resample(args) -> int:
    if args.mesh:
        mesh = read_mesh_csv(args.mesh)
        if args.width is None or args.height is None:
            raise ValueError("--width and --height are required with --mesh")
        width, height = args.width, args.height
        prev = None
    elif args.frame:
        prev = _load_frame(args.frame, args.frame_index, args.width, args.height)
        height, width = prev.shape
        if args.flow:
            flow = read_flo(args.flow, unknown=args.flo_unknown or "error")
        elif args.synthetic:
            flow = synthesize_flow(parse_flow_spec(args.synthetic), width, height)
        else:
            flow = MotionField.zeros(width, height)
        mesh = None
    else:
        raise ValueError("give either --mesh or --frame")

    params = {name: getattr(args, name) for name in RESAMPLER_FLAGS + NWE_FLAGS if getattr(args, name) is not None}
    if args.jobs is not None:
        params["n_jobs"] = args.jobs
    est = make_resampler(args.method, **params)
    start = time.perf_counter()
    if mesh is None:
        mesh = motion_compensate_forward(prev, flow)
    out = est.fit_mesh(mesh, width=width, height=height).predict_grid()
    runtime = time.perf_counter() - start
    print(f"{args.method.upper()} {width}x{height} from {len(mesh)} points in {runtime:.3f} s")

    if args.output:
        write_frame_pgm(out, args.output)
        print(f"wrote {args.output}")
    if args.mesh_out:
        write_mesh_csv(mesh, args.mesh_out)
    if args.trace:
        if not hasattr(est, "areas_"):
            raise ValueError("--trace is only available for FSMR and AFSMR")
        write_model_trace(est.areas_, args.trace)
    if args.reference:
        ref = _load_frame(args.reference, args.reference_index, width, height)
        print(f"PSNR {psnr(ref, out):.4f} dB  SSIM {ssim(ref, out):.4f}")
    return 0


def cmd_metrics(args) -> int:
    ref = _load_frame(args.reference, args.reference_index, args.width, args.height)
    test = _load_frame(args.test, args.test_index, args.width, args.height)
    print(f"PSNR {psnr(ref, test, to_uint8=args.quantize):.4f} dB")
    print(f"SSIM {ssim(ref, test, to_uint8=args.quantize):.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="afsmr", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fruc", help="run the up-conversion protocol and write metrics.csv")
    _add_sequence_args(p)
    _add_method_args(p)
    p.add_argument("--output", dest="output_dir", help="output directory")
    p.add_argument("--write-frames", action="store_true", help="also write reconstructed frames as PGM")
    p.add_argument("--quantize-metrics", action="store_true", help="round reconstructions to 8 bits before scoring")
    p.add_argument("--metric-border", type=int, help="exclude this many pixels at each edge from the metrics")
    p.set_defaults(func=cmd_fruc)

    p = sub.add_parser("timing", help="average runtimes and speed-up relative to FSMR")
    _add_sequence_args(p)
    _add_method_args(p)
    p.add_argument("--output", dest="output_dir", help="output directory")
    p.set_defaults(func=cmd_timing)

    p = sub.add_parser("flow-gen", help="write flow_<c-1>_<c+1>.flo files for the protocol targets")
    _add_sequence_args(p)
    p.add_argument("--output", help="directory for the .flo files")
    p.set_defaults(func=cmd_flow_gen, jobs=None)

    p = sub.add_parser("resample", help="resample a single mesh or motion-compensated frame")
    p.add_argument("--mesh", help="CSV point set with columns x,y,value")
    p.add_argument("--frame", help="source frame (PGM, or YUV with --frame-index)")
    p.add_argument("--frame-index", type=int, default=1, help="1-based frame number inside a YUV file")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    flow = p.add_mutually_exclusive_group()
    flow.add_argument("--flow", help=".flo motion field from the source frame to two frames later")
    flow.add_argument("--synthetic", metavar="SPEC")
    p.add_argument("--flo-unknown", choices=("error", "zero"))
    p.add_argument("--method", default="AFSMR", type=str.upper, choices=ALL_METHODS)
    for name in ("block-size", "border", "max-iterations"):
        p.add_argument(f"--{name}", type=int)
    for name in ("rho", "sigma", "residual-energy-stop", "bandwidth", "support"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--key-points", choices=("area", "block"))
    p.add_argument("--jobs", type=int)
    p.add_argument("--output", help="write the result as PGM")
    p.add_argument("--mesh-out", help="write the mesh as CSV")
    p.add_argument("--trace", help="write the per-area model trace as CSV (FSMR/AFSMR)")
    p.add_argument("--reference", help="score the result against this frame")
    p.add_argument("--reference-index", type=int, default=1)
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("metrics", help="PSNR and SSIM between two frames")
    p.add_argument("--reference", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--reference-index", type=int, default=1)
    p.add_argument("--test-index", type=int, default=1)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--quantize", action="store_true")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"afsmr {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
