"""Cell-averaging CFAR on the RD envelope, peak expansion and data density.

The training mean at each cell is the average of the envelope over the
training window minus the guard window, both truncated at the grid
boundary. Window sums come from a summed-area table, so cost does not
depend on the window size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Envelope, RadarConfig, TxCodeMap
from .errors import ConfigError

# relative half-width of the band around tau in which the fast ratio is
# re-checked with an exactly rounded direct sum
_BORDERLINE_RTOL = 1e-9
# background floor in units of eps * sum(E)
_FLOOR_ULPS = 8


@dataclass(frozen=True)
class CfarConfig:
    window: int = 9
    guard: int = 3
    tau: float = 1.0

    def __post_init__(self):
        if self.window % 2 == 0 or self.guard % 2 == 0:
            raise ConfigError("CFAR window and guard sizes must be odd")
        if self.guard < 1 or self.guard >= self.window:
            raise ConfigError(f"need 1 <= guard < window, got guard={self.guard}, window={self.window}")
        if not self.tau >= 0:
            raise ConfigError(f"tau must be non-negative, got {self.tau}")

    def with_tau(self, tau: float) -> "CfarConfig":
        return CfarConfig(self.window, self.guard, tau)


def _as_array(env) -> np.ndarray:
    values = env.values if isinstance(env, Envelope) else np.asarray(env, dtype=np.float64)
    if values.ndim != 2:
        raise ConfigError(f"envelope must be 2-D, got shape {values.shape}")
    return values


def _box_sums(sat: np.ndarray, half: int, n_r: int, n_l: int):
    """Sum and cell count of the clipped (2*half+1)^2 box centred on every cell."""
    r = np.arange(n_r)
    c = np.arange(n_l)
    r0 = np.clip(r - half, 0, n_r)[:, None]
    r1 = np.clip(r + half + 1, 0, n_r)[:, None]
    c0 = np.clip(c - half, 0, n_l)[None, :]
    c1 = np.clip(c + half + 1, 0, n_l)[None, :]
    total = sat[r1, c1] - sat[r0, c1] - sat[r1, c0] + sat[r0, c0]
    count = (r1 - r0) * (c1 - c0)
    return total, count


def _direct_mean(values, r, l, wh, gh):
    n_r, n_l = values.shape
    rows = np.arange(max(r - wh, 0), min(r + wh + 1, n_r))
    cols = np.arange(max(l - wh, 0), min(l + wh + 1, n_l))
    ring = (np.abs(rows - r) > gh)[:, None] | (np.abs(cols - l) > gh)[None, :]
    cells = values[np.ix_(rows, cols)][ring]
    if cells.size == 0:
        return 0.0
    return math.fsum(cells.tolist()) / cells.size


def training_mean(env, window: int = 9, guard: int = 3) -> np.ndarray:
    """Mean of the in-bounds training cells around every cell (0 where there are none)."""
    values = _as_array(env)
    n_r, n_l = values.shape
    if n_r < guard or n_l < guard:
        raise ConfigError(f"envelope {values.shape} is smaller than the {guard}x{guard} guard window")
    sat = np.zeros((n_r + 1, n_l + 1))
    np.cumsum(np.cumsum(values, axis=0), axis=1, out=sat[1:, 1:])
    w_sum, w_cnt = _box_sums(sat, window // 2, n_r, n_l)
    g_sum, g_cnt = _box_sums(sat, guard // 2, n_r, n_l)
    count = w_cnt - g_cnt
    # cancellation can leave tiny negatives where the ring is all zeros
    ring = np.maximum(w_sum - g_sum, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(count > 0, ring / np.maximum(count, 1), 0.0)
    return mean


def background_floor(env) -> float:
    """Smallest training mean distinguishable from zero for this envelope.

    Summed-area differences carry an absolute rounding error of a few ulps
    of the envelope total; means below this floor are clamped up to it, so a
    cell over an all-zero background gets a large but finite ratio.
    """
    values = _as_array(env)
    return _FLOOR_ULPS * np.finfo(np.float64).eps * float(values.sum())


def cfar_ratio(env, window: int = 9, guard: int = 3) -> np.ndarray:
    """Linear SNR E / max(mu, floor) for every cell (0 for an all-zero envelope)."""
    values = _as_array(env)
    mean = np.maximum(training_mean(values, window, guard), background_floor(values))
    ratio = np.zeros_like(values)
    pos = mean > 0
    ratio[pos] = values[pos] / mean[pos]
    return ratio


def ca_cfar(env, cfg: CfarConfig = CfarConfig()) -> np.ndarray:
    """Detections {(r, l) : E / mu > tau} as a lexicographically sorted (K, 2) int array."""
    values = _as_array(env)
    ratio = cfar_ratio(values, cfg.window, cfg.guard)
    hits = ratio > cfg.tau
    near = np.abs(ratio - cfg.tau) <= _BORDERLINE_RTOL * cfg.tau
    if near.any():
        floor = background_floor(values)
        for r, l in zip(*np.nonzero(near)):
            mu = max(_direct_mean(values, int(r), int(l), cfg.window // 2, cfg.guard // 2), floor)
            hits[r, l] = mu > 0 and values[r, l] / mu > cfg.tau
    return np.argwhere(hits).astype(np.int64)


@dataclass(frozen=True, eq=False)
class PeakSet:
    """Consolidated detections P and their full-grid expansion S.

    Both are lexicographically sorted int64 arrays of shape (K, 2).
    """

    consolidated: np.ndarray = field(repr=False)
    expanded: np.ndarray = field(repr=False)
    tau: float = float("nan")

    def __len__(self):
        return len(self.consolidated)

    def __eq__(self, other):
        if not isinstance(other, PeakSet):
            return NotImplemented
        same_tau = self.tau == other.tau or (math.isnan(self.tau) and math.isnan(other.tau))
        return (
            same_tau
            and np.array_equal(self.consolidated, other.consolidated)
            and np.array_equal(self.expanded, other.expanded)
        )

    __hash__ = None


def _as_cells(peaks) -> np.ndarray:
    cells = np.asarray(peaks, dtype=np.int64)
    if cells.size == 0:
        return np.zeros((0, 2), np.int64)
    if cells.ndim != 2 or cells.shape[1] != 2:
        raise ConfigError(f"peaks must be an (K, 2) array of cells, got shape {cells.shape}")
    return cells


def sort_cells(cells) -> np.ndarray:
    """Unique rows in lexicographic order."""
    cells = _as_cells(cells)
    if len(cells) == 0:
        return cells
    return np.unique(cells, axis=0)


def expand_peaks(peaks, code_map: TxCodeMap, tau: float = float("nan"), n_range: int | None = None) -> PeakSet:
    """Map every consolidated peak to its M full-axis cells."""
    cells = sort_cells(peaks)
    if len(cells) and (
        cells.min() < 0
        or cells[:, 1].max() >= code_map.n_doppler_consolidated
        or (n_range is not None and cells[:, 0].max() >= n_range)
    ):
        raise ConfigError("peak outside the consolidated grid")
    if len(cells) == 0:
        return PeakSet(cells, np.zeros((0, 2), np.int64), float(tau))
    bins = code_map.lookup(cells[:, 0], cells[:, 1])
    m = bins.shape[-1]
    expanded = np.column_stack([np.repeat(cells[:, 0], m), bins.reshape(-1)])
    # code-map sets are disjoint within a row, so sorting never merges cells
    order = np.lexsort((expanded[:, 1], expanded[:, 0]))
    return PeakSet(cells, expanded[order], float(tau))


def detect(env, code_map: TxCodeMap, cfg: CfarConfig = CfarConfig()) -> PeakSet:
    values = _as_array(env)
    return expand_peaks(ca_cfar(values, cfg), code_map, cfg.tau, n_range=values.shape[0])


def density(peaks: PeakSet, config: RadarConfig) -> float:
    """Retained full-grid cells as a percentage of N_r * N_D."""
    return len(peaks.expanded) / (config.n_range * config.n_doppler) * 100.0
