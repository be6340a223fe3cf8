"""Sparse MIMO processing at CFAR peaks.

For each consolidated peak the complex samples of all receivers at the
peak's Tx-replica bins form a virtual-array snapshot. A beamforming
dictionary turns the snapshot into an angle spectrum whose strongest beam
gives the point's direction and amplitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .cfar import PeakSet, sort_cells
from .core import RadarConfig, RdFrame, TxCodeMap, default_code_map
from .errors import ConfigError

# snapshot stacking orders, also the tag byte in dictionary files
REPLICA_MAJOR = 0  # for each replica bin (ascending), all receivers
RECEIVER_MAJOR = 1  # for each receiver, all replica bins
STACKING_ORDERS = {REPLICA_MAJOR: "replica-major", RECEIVER_MAJOR: "receiver-major"}


@dataclass(frozen=True, eq=False)
class BeamformingDictionary:
    """Calibrated beamformer rows over an azimuth-major (N_az, N_el) grid.

    Row ``k = i_az * n_el + i_el`` steers towards ``directions[k]`` =
    (azimuth, elevation) in radians.
    """

    matrix: np.ndarray = field(repr=False)
    directions: np.ndarray = field(repr=False)
    n_az: int
    n_el: int
    order: int = REPLICA_MAJOR

    def __post_init__(self):
        matrix = np.ascontiguousarray(self.matrix, dtype=np.complex64)
        directions = np.ascontiguousarray(self.directions, dtype=np.float32).reshape(-1, 2)
        n_theta = self.n_az * self.n_el
        if self.n_az < 1 or self.n_el < 1:
            raise ConfigError("dictionary grid must have at least one direction")
        if matrix.ndim != 2 or matrix.shape[0] != n_theta:
            raise ConfigError(f"dictionary matrix {matrix.shape} does not have {n_theta} rows")
        if directions.shape[0] != n_theta:
            raise ConfigError(f"{directions.shape[0]} directions for {n_theta} rows")
        if not np.all(np.isfinite(matrix)) or not np.all(np.isfinite(directions)):
            raise ConfigError("dictionary contains non-finite entries")
        if len(np.unique(directions, axis=0)) != n_theta:
            raise ConfigError("dictionary directions are not unique")
        if self.order not in STACKING_ORDERS:
            raise ConfigError(f"unknown stacking order tag {self.order}")
        matrix.setflags(write=False)
        directions.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "directions", directions)

    @property
    def n_theta(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_virtual(self) -> int:
        return self.matrix.shape[1]

    @cached_property
    def _rows128(self) -> np.ndarray:
        # transposed once so that spectra = V @ rows128
        return np.ascontiguousarray(self.matrix.astype(np.complex128).T)

    def azimuth_grid(self) -> np.ndarray:
        return self.directions[:: self.n_el, 0].astype(np.float64)

    def azimuth_extent(self) -> tuple[float, float]:
        """Azimuth span with half a grid step of margin on each side."""
        az = self.azimuth_grid()
        step = float(np.min(np.diff(az))) if len(az) > 1 else 1.0
        return float(az[0] - step / 2), float(az[-1] + step / 2)


class SpectralPoint(NamedTuple):
    range_bin: int
    azimuth: float
    elevation: float
    doppler_bin: int
    angle_amplitude: float
    beam_index: int
    descriptor: np.ndarray | None = None

    @property
    def origin(self) -> tuple[int, int]:
        return (self.range_bin, self.doppler_bin)


@dataclass(frozen=True, eq=False)
class SpectralPointCloud:
    """Column-wise store of spectral points, sorted by origin cell (r, l).

    ``beam_index`` is -1 for clouds read back from files, which do not
    carry it. ``descriptor`` has shape (K, n_az * n_el) when angle
    enrichment was applied.
    """

    config: RadarConfig
    range_bin: np.ndarray
    doppler_bin: np.ndarray
    azimuth: np.ndarray
    elevation: np.ndarray
    angle_amplitude: np.ndarray
    beam_index: np.ndarray
    descriptor: np.ndarray | None = None
    tau: float = float("nan")
    neighborhood_n: int | None = None
    descriptor_shape: tuple[int, int] | None = None

    def __post_init__(self):
        n = len(self.range_bin)
        for name, dtype in (
            ("range_bin", np.int64),
            ("doppler_bin", np.int64),
            ("azimuth", np.float64),
            ("elevation", np.float64),
            ("angle_amplitude", np.float64),
            ("beam_index", np.int64),
        ):
            col = np.asarray(getattr(self, name), dtype=dtype).reshape(-1)
            if len(col) != n:
                raise ConfigError(f"column {name} has {len(col)} entries, expected {n}")
            object.__setattr__(self, name, col)
        if self.descriptor is not None:
            desc = np.asarray(self.descriptor, dtype=np.float64).reshape(n, -1)
            object.__setattr__(self, "descriptor", desc)

    def __len__(self):
        return len(self.range_bin)

    def __iter__(self):
        return iter(self.points)

    @property
    def origins(self) -> np.ndarray:
        return np.column_stack([self.range_bin, self.doppler_bin])

    @property
    def n_descriptor(self) -> int:
        return 0 if self.descriptor is None else self.descriptor.shape[1]

    @property
    def points(self) -> list[SpectralPoint]:
        desc = self.descriptor
        return [
            SpectralPoint(
                int(self.range_bin[j]),
                float(self.azimuth[j]),
                float(self.elevation[j]),
                int(self.doppler_bin[j]),
                float(self.angle_amplitude[j]),
                int(self.beam_index[j]),
                None if desc is None else desc[j],
            )
            for j in range(len(self))
        ]

    def sidecar(self) -> dict:
        n_az, n_el = self.descriptor_shape or (None, None)
        return {"neighborhood_n": self.neighborhood_n, "n_az": n_az, "n_el": n_el}


def gather_snapshots(frame: RdFrame, cells, code_map: TxCodeMap | None = None, order: int = REPLICA_MAJOR) -> np.ndarray:
    """Snapshots for many consolidated cells at once, shape (K, N_virt)."""
    cells = np.asarray(cells, dtype=np.int64).reshape(-1, 2)
    cfg = frame.config
    code_map = code_map or default_code_map(cfg)
    if len(cells) and (
        cells.min() < 0 or cells[:, 0].max() >= cfg.n_range or cells[:, 1].max() >= cfg.n_doppler_consolidated
    ):
        raise ConfigError("peak outside the consolidated grid")
    bins = code_map.lookup(cells[:, 0], cells[:, 1])
    block = frame.data[:, cells[:, 0, None], bins]  # (N_c, K, M)
    if order == REPLICA_MAJOR:
        block = block.transpose(1, 2, 0)
    elif order == RECEIVER_MAJOR:
        block = block.transpose(1, 0, 2)
    else:
        raise ConfigError(f"unknown stacking order {order}")
    return block.reshape(len(cells), cfg.n_virtual)


def snapshot(frame: RdFrame, peak, code_map: TxCodeMap | None = None, order: int = REPLICA_MAJOR) -> np.ndarray:
    """Virtual-array snapshot of length N_c * M at one consolidated peak."""
    return gather_snapshots(frame, [peak], code_map, order)[0]


def angle_spectra(snapshots, dictionary: BeamformingDictionary) -> np.ndarray:
    """|B v| for each row of ``snapshots``, shape (K, N_theta), float64."""
    v = np.asarray(snapshots)
    if v.ndim != 2 or v.shape[1] != dictionary.n_virtual:
        raise ConfigError(f"snapshots of shape {v.shape} do not match N_virt={dictionary.n_virtual}")
    return np.abs(v.astype(np.complex128) @ dictionary._rows128)


def angle_spectrum(v, dictionary: BeamformingDictionary) -> np.ndarray:
    v = np.asarray(v)
    if v.ndim != 1:
        raise ConfigError("angle_spectrum expects a single snapshot vector")
    return angle_spectra(v[None, :], dictionary)[0]


class AoaEstimate(NamedTuple):
    beam_index: int
    azimuth: float
    elevation: float
    amplitude: float


def estimate_aoa(s, dictionary: BeamformingDictionary) -> AoaEstimate:
    """Strongest beam; ties go to the lowest index."""
    s = np.asarray(s, dtype=np.float64)
    if s.size == 0:
        raise ConfigError("empty angle spectrum")
    if s.shape != (dictionary.n_theta,):
        raise ConfigError(f"spectrum length {s.size} does not match N_theta={dictionary.n_theta}")
    k = int(np.argmax(s))
    az, el = dictionary.directions[k]
    return AoaEstimate(k, float(az), float(el), float(s[k]))


def _check_inputs(frame: RdFrame, dictionary: BeamformingDictionary, code_map: TxCodeMap):
    if dictionary.n_virtual != frame.config.n_virtual:
        raise ConfigError(
            f"dictionary has N_virt={dictionary.n_virtual}, frame has "
            f"{frame.config.n_rx} x {frame.config.n_tx_signatures}"
        )
    if (
        code_map.n_doppler_consolidated != frame.config.n_doppler_consolidated
        or code_map.n_tx_signatures != frame.config.n_tx_signatures
    ):
        raise ConfigError("code map does not match frame configuration")


def analyse_cells(frame: RdFrame, cells, dictionary: BeamformingDictionary, code_map: TxCodeMap | None = None):
    """Angle spectra and dominant beams for the given cells.

    Returns ``(cells, spectra, beam)`` with cells sorted and de-duplicated.
    """
    code_map = code_map or default_code_map(frame.config)
    _check_inputs(frame, dictionary, code_map)
    cells = sort_cells(cells)
    spectra = angle_spectra(gather_snapshots(frame, cells, code_map, dictionary.order), dictionary)
    beam = np.argmax(spectra, axis=1) if len(cells) else np.zeros(0, np.int64)
    return cells, spectra, beam


def cloud_from_spectra(frame, cells, spectra, beam, dictionary, **meta) -> SpectralPointCloud:
    directions = dictionary.directions.astype(np.float64)
    return SpectralPointCloud(
        config=frame.config,
        range_bin=cells[:, 0],
        doppler_bin=cells[:, 1],
        azimuth=directions[beam, 0],
        elevation=directions[beam, 1],
        angle_amplitude=spectra[np.arange(len(cells)), beam] if len(cells) else np.zeros(0),
        beam_index=beam,
        **meta,
    )


def build_cloud(frame: RdFrame, peaks, dictionary: BeamformingDictionary, code_map: TxCodeMap | None = None) -> SpectralPointCloud:
    """One point (r, a, e, l, A) per consolidated peak."""
    if isinstance(peaks, PeakSet):
        tau, cells = peaks.tau, peaks.consolidated
    else:
        tau, cells = float("nan"), peaks
    cells, spectra, beam = analyse_cells(frame, cells, dictionary, code_map)
    return cloud_from_spectra(frame, cells, spectra, beam, dictionary, tau=tau)
