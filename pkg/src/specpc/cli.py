"""Command-line entry point: ``specpc <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data or format error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import formats
from .cfar import CfarConfig, density, detect
from .core import RadarConfig, compute_envelope, default_code_map
from .enrichment import DescriptorConfig, NeighborhoodConfig, enrich_cloud
from .errors import SpcError
from .metrics import auc_f1, load_curve
from .mimo import build_cloud
from .pillars import PillarGrid, pillarize
from .sparse_rd import mask_rd
from .sweep import SweepOptions, SweepReport, sweep
from .synth import build_dictionary, render_frame

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise formats.FormatError(f"bad config JSON {path}: {exc}") from None


def _cfar_config(args, conf) -> CfarConfig:
    c = conf.get("cfar", {})
    return CfarConfig(
        window=args.window or c.get("window", 9),
        guard=args.guard or c.get("guard", 3),
        tau=args.tau if args.tau is not None else c.get("tau", 1.0),
    )


def _peaks(args, frame, conf):
    code_map = default_code_map(frame.config)
    if args.peaks is not None:
        return formats.load_peaks(args.peaks)
    if args.tau is None and "tau" not in conf.get("cfar", {}):
        raise UsageError("one of --tau or --peaks is required")
    return detect(compute_envelope(frame, code_map), code_map, _cfar_config(args, conf))


def cmd_synth(args, conf):
    scene = formats.load_scene(args.scene)
    if args.seed is not None:
        scene = dataclasses.replace(scene, seed=args.seed)
    radar = dict(conf.get("radar", {}))
    radar.setdefault("n_range", 512)
    radar.setdefault("n_tx_signatures", 1)
    radar.setdefault("n_doppler", radar.pop("n_doppler_consolidated", 16) * radar["n_tx_signatures"])
    radar.setdefault("n_rx", max(scene.n_virtual // radar["n_tx_signatures"], 1))
    config = RadarConfig.from_dict(radar)
    frame = render_frame(scene, config)
    formats.save_frame(frame, args.out)
    if args.dict_out:
        d = conf.get("dictionary", {})
        dictionary = build_dictionary(
            scene.geometry,
            (d.get("n_az", 64), d.get("n_el", 1)),
            tuple(d.get("az_fov", (-np.pi / 3, np.pi / 3))),
            tuple(d.get("el_fov", (0.0, 0.0))),
        )
        formats.save_dictionary(dictionary, args.dict_out)


def cmd_envelope(args, conf):
    frame = formats.load_frame(args.frame)
    np.save(args.out, compute_envelope(frame).values)


def cmd_cfar(args, conf):
    frame = formats.load_frame(args.frame)
    peaks = _peaks(args, frame, conf)
    formats.save_peaks(peaks, args.out)
    print(f"{len(peaks.consolidated)} peaks, density {density(peaks, frame.config):.3f} %")


def cmd_cloud(args, conf):
    frame = formats.load_frame(args.frame)
    cloud = build_cloud(frame, _peaks(args, frame, conf), formats.load_dictionary(args.dict))
    formats.save_cloud(cloud, args.out)
    print(f"{len(cloud)} points")


def cmd_enrich(args, conf):
    frame = formats.load_frame(args.frame)
    e = conf.get("enrichment", {})
    n = args.n if args.n is not None else e.get("neighborhood_n", 3)
    n_az = args.n_az if args.n_az is not None else e.get("n_az", 32)
    n_el = args.n_el if args.n_el is not None else e.get("n_el", 1)
    ncfg = None if args.no_neighborhood else NeighborhoodConfig(n)
    dcfg = None if args.no_descriptor else DescriptorConfig(n_az, n_el)
    cloud = enrich_cloud(frame, _peaks(args, frame, conf), formats.load_dictionary(args.dict), None, ncfg, dcfg)
    formats.save_cloud(cloud, args.out)
    print(f"{len(cloud)} points")


def cmd_mask(args, conf):
    frame = formats.load_frame(args.frame)
    formats.save_frame(mask_rd(frame, _peaks(args, frame, conf)), args.out)


def cmd_sweep(args, conf):
    taus = sorted(float(t) for group in args.tau for t in str(group).split(",") if t)
    if not taus:
        raise UsageError("--tau is required")
    c = conf.get("cfar", {})
    opts = SweepOptions(
        window=args.window or c.get("window", 9),
        guard=args.guard or c.get("guard", 3),
        dictionary=formats.load_dictionary(args.dict) if args.dict else None,
        neighborhood=NeighborhoodConfig(args.n) if args.n else None,
        descriptor=DescriptorConfig(args.n_az, args.n_el or 1) if args.n_az else None,
        timing=args.timing,
    )
    report = sweep([formats.load_frame(p) for p in args.frame], taus, opts)
    text = report.to_jsonl()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_pillarize(args, conf):
    cloud = formats.load_cloud(args.cloud)
    if args.az_extent:
        az_extent = tuple(args.az_extent)
    elif args.dict:
        az_extent = formats.load_dictionary(args.dict).azimuth_extent()
    else:
        raise UsageError("one of --az-extent or --dict is required")
    cfg = cloud.config
    r_extent = tuple(args.range_extent) if args.range_extent else (0.0, cfg.n_range * cfg.range_resolution)
    p = conf.get("pillars", {})
    cells = args.cells or (p.get("n_range_cells", 256), p.get("n_azimuth_cells", 448))
    grid = PillarGrid(r_extent, az_extent, cells[0], cells[1], args.downsample or p.get("downsample", 2))
    out = pillarize(cloud, grid)
    np.savez(args.out, cells=out.cells, canvas=out.canvas, pooled=out.pooled,
             n_out_of_extent=out.n_out_of_extent, n_non_finite=out.n_non_finite)
    print(f"{int(out.canvas[0].sum())} points binned, {out.n_rejected} rejected")


def cmd_auc(args, conf):
    print(repr(auc_f1(load_curve(args.curve), (args.lo, args.hi))))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="specpc", description="Spectral point clouds from range-Doppler spectra.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="JSON config with radar/cfar/dictionary/enrichment sections")
        p.set_defaults(func=func)
        return p

    def peak_args(p):
        p.add_argument("--frame", required=True)
        p.add_argument("--tau", type=float)
        p.add_argument("--peaks", help="peak set JSON instead of running CFAR")
        p.add_argument("--window", type=int)
        p.add_argument("--guard", type=int)

    p = add("synth", cmd_synth, "render a synthetic scene to an RD frame")
    p.add_argument("--scene", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dict-out", help="also write the matching steering dictionary")
    p.add_argument("--seed", type=int)

    p = add("envelope", cmd_envelope, "write the consolidated RD envelope (.npy)")
    p.add_argument("--frame", required=True)
    p.add_argument("--out", required=True)

    p = add("cfar", cmd_cfar, "run CA-CFAR and write the peak set JSON")
    peak_args(p)
    p.add_argument("--out", required=True)

    p = add("cloud", cmd_cloud, "build a spectral point cloud")
    peak_args(p)
    p.add_argument("--dict", required=True)
    p.add_argument("--out", required=True)

    p = add("enrich", cmd_enrich, "build an enriched spectral point cloud")
    peak_args(p)
    p.add_argument("--dict", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, help="RD neighbourhood size (odd)")
    p.add_argument("--n-az", type=int)
    p.add_argument("--n-el", type=int)
    p.add_argument("--no-neighborhood", action="store_true")
    p.add_argument("--no-descriptor", action="store_true")

    p = add("mask", cmd_mask, "write a sparse RD frame keeping only peak cells")
    peak_args(p)
    p.add_argument("--out", required=True)

    p = add("sweep", cmd_sweep, "sweep CFAR thresholds and write a JSON-lines report")
    p.add_argument("--frame", nargs="+", required=True)
    p.add_argument("--tau", action="append", default=[], help="threshold(s), repeatable or comma separated")
    p.add_argument("--out")
    p.add_argument("--dict")
    p.add_argument("--n", type=int)
    p.add_argument("--n-az", type=int)
    p.add_argument("--n-el", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--guard", type=int)
    p.add_argument("--timing", action="store_true", help="add per-stage timings")

    p = add("pillarize", cmd_pillarize, "bin a point cloud into the polar BEV grid (.npz)")
    p.add_argument("--cloud", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dict")
    p.add_argument("--az-extent", type=float, nargs=2)
    p.add_argument("--range-extent", type=float, nargs=2)
    p.add_argument("--cells", type=int, nargs=2)
    p.add_argument("--downsample", type=int)

    p = add("auc", cmd_auc, "mean F1 over a density interval")
    p.add_argument("--curve", required=True)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args, _load_config(args.config))
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (SpcError, OSError) as exc:
        print(f"specpc: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
