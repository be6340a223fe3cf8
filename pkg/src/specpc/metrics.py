"""Curve summaries for F1-versus-density sweeps."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataRangeError, FormatError


def auc_f1(curve, interval: tuple[float, float]) -> float:
    """Mean F1 over ``interval``: trapezoidal area divided by the interval length.

    ``curve`` is a sequence of (density_pct, f1) with strictly increasing
    densities. Interval bounds falling between samples are linearly
    interpolated.
    """
    pts = np.asarray(curve, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise ConfigError("curve needs at least two (density, f1) points")
    x, y = pts[:, 0], pts[:, 1]
    if not np.all(np.diff(x) > 0):
        raise ConfigError("curve densities must be strictly increasing")
    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        raise DataRangeError(f"empty interval ({lo}, {hi})")
    if lo < x[0] or hi > x[-1]:
        raise DataRangeError(f"interval ({lo}, {hi}) is outside the curve span ({x[0]}, {x[-1]})")
    inner = (x > lo) & (x < hi)
    xs = np.concatenate([[lo], x[inner], [hi]])
    ys = np.concatenate([[np.interp(lo, x, y)], y[inner], [np.interp(hi, x, y)]])
    return float(np.trapezoid(ys, xs) / (hi - lo))


def load_curve(path) -> list[tuple[float, float]]:
    """Read a ``density_pct,f1`` CSV."""
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["density_pct", "f1"]:
        raise FormatError("curve CSV must start with the header 'density_pct,f1'", offset=0)
    try:
        return [(float(a), float(b)) for a, b in (r for r in rows[1:] if r)]
    except ValueError as exc:
        raise FormatError(f"bad curve row: {exc}") from None
