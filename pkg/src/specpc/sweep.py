"""Threshold sweeps over RD frames and their JSON-lines reports."""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from .cfar import CfarConfig, detect
from .core import RdFrame, TxCodeMap, compute_envelope, default_code_map
from .enrichment import DescriptorConfig, NeighborhoodConfig, enrich_cloud, expand_neighborhood
from .errors import ConfigError, FormatError
from .mimo import BeamformingDictionary, build_cloud

SCHEMA = "spc-report/1"
STAGES = ("envelope", "cfar", "cloud", "enrich")

@dataclass
class SweepOptions:
    window: int = 9
    guard: int = 3
    code_map: TxCodeMap | None = None
    dictionary: BeamformingDictionary | None = None
    neighborhood: NeighborhoodConfig | None = None
    descriptor: DescriptorConfig | None = None
    timing: bool = False
    workers: int = 1

@dataclass
class SweepEntry:
    tau: float
    density_pct: float
    n_points: int
    n_enriched_points: int | None = None
    timing_ms: dict | None = None

    def to_dict(self) -> dict:
        doc = {
            "schema": SCHEMA,
            "type": "entry",
            "tau": self.tau,
            "density_pct": self.density_pct,
            "n_points": self.n_points,
            "n_enriched_points": self.n_enriched_points,
        }
        if self.timing_ms is not None:
            doc["timing_ms"] = self.timing_ms
        return doc

@dataclass
class SweepReport:
    config: dict
    entries: list[SweepEntry] = field(default_factory=list)

    def to_jsonl(self) -> str:
        lines = [dict({"schema": SCHEMA, "type": "config"}, **self.config)]
        lines += [e.to_dict() for e in self.entries]
        return "".join(json.dumps(doc) + "\n" for doc in lines)

    @classmethod
    def from_jsonl(cls, text: str) -> "SweepReport":
        docs = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not docs or docs[0].get("schema") != SCHEMA or docs[0].get("type") != "config":
            raise FormatError(f"not a {SCHEMA} report", offset=0)
        config = {k: v for k, v in docs[0].items() if k not in ("schema", "type")}
        entries = []
        for doc in docs[1:]:
            if doc.get("schema") != SCHEMA or doc.get("type") != "entry":
                raise FormatError("unexpected record in report")
            entries.append(
                SweepEntry(
                    doc["tau"],
                    doc["density_pct"],
                    doc["n_points"],
                    doc.get("n_enriched_points"),
                    doc.get("timing_ms"),
                )
            )
        return cls(config, entries)

    def save(self, path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def load(cls, path) -> "SweepReport":
        return cls.from_jsonl(Path(path).read_text())

class _Clock:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.ms = dict.fromkeys(STAGES, 0.0)

    @contextmanager
    def stage(self, name):
        if not self.enabled:
            yield
            return
        t0 = time.perf_counter()
        yield
        self.ms[name] += (time.perf_counter() - t0) * 1e3

def _sweep_frame(frame: RdFrame, taus, opts: SweepOptions):
    """Per-tau (|S|, |P|, |P*|, timings) for one frame."""
    cfg = frame.config
    code_map = opts.code_map or default_code_map(cfg)
    clock = _Clock(opts.timing)
    with clock.stage("envelope"):
        env = compute_envelope(frame, code_map)
    envelope_ms = clock.ms["envelope"]
    rows = []
    for tau in taus:
        clock.ms = dict.fromkeys(STAGES, 0.0)
        clock.ms["envelope"] = envelope_ms
        with clock.stage("cfar"):
            peaks = detect(env, code_map, CfarConfig(opts.window, opts.guard, tau))
        n_enriched = None
        if opts.neighborhood is not None:
            n_enriched = len(expand_neighborhood(peaks.consolidated, opts.neighborhood, cfg.consolidated_shape))
        if opts.dictionary is not None:
            with clock.stage("cloud"):
                build_cloud(frame, peaks, opts.dictionary, code_map)
            if opts.neighborhood is not None or opts.descriptor is not None:
                with clock.stage("enrich"):
                    enrich_cloud(frame, peaks, opts.dictionary, code_map, opts.neighborhood, opts.descriptor)
        rows.append((len(peaks.expanded), len(peaks.consolidated), n_enriched, dict(clock.ms)))
    return cfg.n_range * cfg.n_doppler, rows

def sweep(frames, taus, options: SweepOptions | None = None) -> SweepReport:
    """Density and point counts per threshold, summed over ``frames``.

    Density is the retained share of all full-grid cells across frames.
    Frames may be processed in parallel; the reduction runs in frame order.
    """
    opts = options or SweepOptions()
    frames = list(frames)
    taus = [float(t) for t in taus]
    if not frames:
        raise ConfigError("sweep needs at least one frame")
    if not taus:
        raise ConfigError("sweep needs at least one threshold")
    if any(b < a for a, b in zip(taus, taus[1:])):
        raise ConfigError("thresholds must be sorted ascending")
    if opts.workers > 1:
        with ThreadPoolExecutor(opts.workers) as pool:
            results = list(pool.map(lambda f: _sweep_frame(f, taus, opts), frames))
    else:
        results = [_sweep_frame(f, taus, opts) for f in frames]

    total_cells = sum(n for n, _ in results)
    entries = []
    for i, tau in enumerate(taus):
        n_s = sum(rows[i][0] for _, rows in results)
        n_p = sum(rows[i][1] for _, rows in results)
        n_e = None if opts.neighborhood is None else sum(rows[i][2] for _, rows in results)
        timing = None
        if opts.timing:
            timing = {s: sum(rows[i][3][s] for _, rows in results) for s in STAGES}
        entries.append(SweepEntry(tau, n_s / total_cells * 100.0, n_p, n_e, timing))

    config = {
        "n_frames": len(frames),
        "taus": taus,
        "window": opts.window,
        "guard": opts.guard,
        "radar": frames[0].config.to_dict(),
        "neighborhood_n": None if opts.neighborhood is None else opts.neighborhood.n,
        "n_az": None if opts.descriptor is None else opts.descriptor.n_az,
        "n_el": None if opts.descriptor is None else opts.descriptor.n_el,
    }
    return SweepReport(config, entries)
