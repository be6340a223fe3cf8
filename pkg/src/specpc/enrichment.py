"""RD neighbourhood enrichment and angle-spectrum sector descriptors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cfar import PeakSet, sort_cells
from .core import RdFrame, TxCodeMap
from .errors import ConfigError
from .mimo import BeamformingDictionary, analyse_cells, cloud_from_spectra


@dataclass(frozen=True)
class NeighborhoodConfig:
    n: int = 3

    def __post_init__(self):
        if self.n < 1 or self.n % 2 == 0:
            raise ConfigError(f"neighbourhood size must be odd and >= 1, got {self.n}")

    @property
    def half_width(self) -> int:
        return (self.n - 1) // 2


@dataclass(frozen=True)
class DescriptorConfig:
    n_az: int = 32
    n_el: int = 1

    def __post_init__(self):
        if self.n_az < 1 or self.n_el < 1:
            raise ConfigError("sector counts must be >= 1")


def expand_neighborhood(peaks, cfg: NeighborhoodConfig, grid: tuple[int, int]) -> np.ndarray:
    """Union of the n x n neighbourhoods of all peaks, clipped to ``grid``."""
    cells = sort_cells(peaks)
    h = cfg.half_width
    if h == 0 or len(cells) == 0:
        return cells
    offsets = np.arange(-h, h + 1)
    dr, dl = np.meshgrid(offsets, offsets, indexing="ij")
    cand = cells[:, None, :] + np.stack([dr.ravel(), dl.ravel()], axis=1)[None]
    cand = cand.reshape(-1, 2)
    n_r, n_l = grid
    keep = (cand[:, 0] >= 0) & (cand[:, 0] < n_r) & (cand[:, 1] >= 0) & (cand[:, 1] < n_l)
    return sort_cells(cand[keep])


def _sector_starts(n_bins: int, n_sectors: int) -> np.ndarray:
    # equal sectors of n_bins // n_sectors; the last one takes the remainder
    return np.arange(n_sectors) * (n_bins // n_sectors)


def angle_descriptors(spectra, grid_shape: tuple[int, int], cfg: DescriptorConfig) -> np.ndarray:
    """Sector-max pooling of each row of ``spectra`` reshaped to (N_az, N_el).

    Returns shape (K, n_az * n_el), flattened azimuth-major.
    """
    n_az, n_el = grid_shape
    if cfg.n_az > n_az or cfg.n_el > n_el:
        raise ConfigError(f"{cfg.n_az} x {cfg.n_el} sectors do not fit a {n_az} x {n_el} angle grid")
    spectra = np.asarray(spectra, dtype=np.float64)
    grid = spectra.reshape(-1, n_az, n_el)
    if len(grid) == 0:
        return np.zeros((0, cfg.n_az * cfg.n_el))
    pooled = np.maximum.reduceat(grid, _sector_starts(n_az, cfg.n_az), axis=1)
    pooled = np.maximum.reduceat(pooled, _sector_starts(n_el, cfg.n_el), axis=2)
    return pooled.reshape(len(grid), -1)


def angle_descriptor(s_grid, cfg: DescriptorConfig) -> np.ndarray:
    s_grid = np.asarray(s_grid, dtype=np.float64)
    if s_grid.ndim == 1:
        s_grid = s_grid[:, None]
    return angle_descriptors(s_grid[None], s_grid.shape, cfg)[0]


def enrich_cloud(
    frame: RdFrame,
    peaks,
    dictionary: BeamformingDictionary,
    code_map: TxCodeMap | None = None,
    ncfg: NeighborhoodConfig | None = None,
    dcfg: DescriptorConfig | None = None,
):
    """Spectral point cloud with neighbourhood points and/or angle descriptors.

    With ``ncfg`` every cell of the expanded consolidated set becomes a
    point with its own snapshot and AoA. With ``dcfg`` each point carries
    its pooled angle spectrum.
    """
    if ncfg is None and dcfg is None:
        raise ConfigError("enrich_cloud needs a neighbourhood and/or a descriptor configuration")
    if isinstance(peaks, PeakSet):
        tau, cells = peaks.tau, peaks.consolidated
    else:
        tau, cells = float("nan"), peaks
    if ncfg is not None:
        cells = expand_neighborhood(cells, ncfg, frame.config.consolidated_shape)
    cells, spectra, beam = analyse_cells(frame, cells, dictionary, code_map)
    descriptor = None
    if dcfg is not None:
        descriptor = angle_descriptors(spectra, (dictionary.n_az, dictionary.n_el), dcfg)
    return cloud_from_spectra(
        frame,
        cells,
        spectra,
        beam,
        dictionary,
        tau=tau,
        descriptor=descriptor,
        neighborhood_n=None if ncfg is None else ncfg.n,
        descriptor_shape=None if dcfg is None else (dcfg.n_az, dcfg.n_el),
    )
