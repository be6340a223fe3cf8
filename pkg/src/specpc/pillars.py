"""Polar BEV pillar binning of spectral point clouds (no learned encoder)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .mimo import SpectralPointCloud

# canvas channel order
COUNT, MAX_AMPLITUDE, MEAN_DOPPLER = 0, 1, 2


@dataclass(frozen=True)
class PillarGrid:
    """Range x azimuth grid; range in metres, azimuth in radians, half-open extents."""

    range_extent: tuple[float, float]
    azimuth_extent: tuple[float, float]
    n_range_cells: int = 256
    n_azimuth_cells: int = 448
    downsample: int = 2

    def __post_init__(self):
        for lo, hi in (self.range_extent, self.azimuth_extent):
            if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
                raise ConfigError(f"grid extent ({lo}, {hi}) must be finite and positive")
        if self.n_range_cells < 1 or self.n_azimuth_cells < 1 or self.downsample < 1:
            raise ConfigError("grid cell counts and downsample factor must be >= 1")
        if self.n_range_cells % self.downsample or self.n_azimuth_cells % self.downsample:
            raise ConfigError("downsample factor must divide both grid dimensions")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_range_cells, self.n_azimuth_cells)

    @property
    def cell_size(self) -> tuple[float, float]:
        (r0, r1), (a0, a1) = self.range_extent, self.azimuth_extent
        return ((r1 - r0) / self.n_range_cells, (a1 - a0) / self.n_azimuth_cells)


@dataclass(frozen=True, eq=False)
class PillarResult:
    cells: np.ndarray  # (K, 2) pillar index per point, -1 where rejected
    canvas: np.ndarray  # (3, n_range_cells, n_azimuth_cells)
    pooled: np.ndarray  # (3, n_range_cells / f, n_azimuth_cells / f)
    n_out_of_extent: int
    n_non_finite: int

    @property
    def n_rejected(self) -> int:
        return self.n_out_of_extent + self.n_non_finite


def _bin(x, lo, hi, n):
    idx = np.floor((x - lo) / (hi - lo) * n).astype(np.int64)
    # rounding can push x just below hi into bin n
    return np.minimum(idx, n - 1)


def pool_canvas(canvas: np.ndarray, factor: int) -> np.ndarray:
    """Downsample with count-sum, amplitude-max and count-weighted Doppler mean."""
    _, h, w = canvas.shape
    blocks = canvas.reshape(3, h // factor, factor, w // factor, factor)
    count = blocks[COUNT].sum(axis=(1, 3))
    amp = blocks[MAX_AMPLITUDE].max(axis=(1, 3))
    dop_sum = (blocks[MEAN_DOPPLER] * blocks[COUNT]).sum(axis=(1, 3))
    mean = np.divide(dop_sum, count, out=np.zeros_like(dop_sum), where=count > 0)
    return np.stack([count, amp, mean])


def pillarize(cloud: SpectralPointCloud, grid: PillarGrid) -> PillarResult:
    """Scatter points into polar pillars and build the dense BEV canvas.

    Range is taken at bin centres, ``r_bin * range_resolution``.
    """
    rng = cloud.range_bin * cloud.config.range_resolution
    az = cloud.azimuth
    finite = np.isfinite(rng) & np.isfinite(az) & np.isfinite(cloud.angle_amplitude)
    (r0, r1), (a0, a1) = grid.range_extent, grid.azimuth_extent
    inside = finite & (rng >= r0) & (rng < r1) & (az >= a0) & (az < a1)
    cells = np.full((len(cloud), 2), -1, dtype=np.int64)
    ir = _bin(rng[inside], r0, r1, grid.n_range_cells)
    ia = _bin(az[inside], a0, a1, grid.n_azimuth_cells)
    cells[inside] = np.column_stack([ir, ia])

    canvas = np.zeros((3,) + grid.shape)
    np.add.at(canvas[COUNT], (ir, ia), 1.0)
    np.maximum.at(canvas[MAX_AMPLITUDE], (ir, ia), cloud.angle_amplitude[inside])
    dop = np.zeros(grid.shape)
    np.add.at(dop, (ir, ia), cloud.doppler_bin[inside].astype(np.float64))
    count = canvas[COUNT]
    np.divide(dop, count, out=canvas[MEAN_DOPPLER], where=count > 0)

    return PillarResult(
        cells=cells,
        canvas=canvas,
        pooled=pool_canvas(canvas, grid.downsample),
        n_out_of_extent=int(np.count_nonzero(finite & ~inside)),
        n_non_finite=int(np.count_nonzero(~finite)),
    )
