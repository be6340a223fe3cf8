"""Sparse RD frames that keep only the cells of a peak set."""

from __future__ import annotations

import numpy as np

from .cfar import PeakSet
from .core import RdFrame
from .errors import ConfigError


def peak_mask(peaks: PeakSet, n_range: int, n_doppler: int) -> np.ndarray:
    mask = np.zeros((n_range, n_doppler), dtype=bool)
    cells = peaks.expanded
    if len(cells):
        if cells.min() < 0 or cells[:, 0].max() >= n_range or cells[:, 1].max() >= n_doppler:
            raise ConfigError("peak set does not fit the frame")
        mask[cells[:, 0], cells[:, 1]] = True
    return mask


def mask_rd(frame: RdFrame, peaks: PeakSet) -> RdFrame:
    """Zero every (r, d) cell outside S on all receiver channels."""
    cfg = frame.config
    mask = peak_mask(peaks, cfg.n_range, cfg.n_doppler)
    return frame.with_data(np.where(mask[None], frame.data, np.complex64(0)))
