"""Radar configuration, RD frames, DDMA Tx code maps and the RD envelope."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class RadarConfig:
    """Dimensions of a per-receiver range-Doppler cube.

    ``n_doppler`` is the full Doppler axis, ``n_doppler_consolidated`` the
    axis after folding the ``n_tx_signatures`` DDMA replicas together.
    ``doppler_resolution`` is given per consolidated bin.
    """

    n_rx: int
    n_range: int
    n_doppler: int
    n_tx_signatures: int
    range_resolution: float = 1.0
    doppler_resolution: float = 1.0

    def __post_init__(self):
        for name in ("n_rx", "n_range", "n_doppler", "n_tx_signatures"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        for name in ("range_resolution", "doppler_resolution"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.n_doppler % self.n_tx_signatures:
            raise ConfigError(
                f"n_doppler={self.n_doppler} is not a multiple of "
                f"n_tx_signatures={self.n_tx_signatures}"
            )

    @property
    def n_doppler_consolidated(self) -> int:
        return self.n_doppler // self.n_tx_signatures

    @property
    def n_virtual(self) -> int:
        return self.n_rx * self.n_tx_signatures

    @property
    def consolidated_shape(self) -> tuple[int, int]:
        return (self.n_range, self.n_doppler_consolidated)

    def to_dict(self) -> dict:
        return {
            "n_rx": self.n_rx,
            "n_range": self.n_range,
            "n_doppler": self.n_doppler,
            "n_tx_signatures": self.n_tx_signatures,
            "range_resolution": self.range_resolution,
            "doppler_resolution": self.doppler_resolution,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RadarConfig":
        if "n_doppler" not in d and "n_doppler_consolidated" in d:
            d = dict(d, n_doppler=d["n_doppler_consolidated"] * d["n_tx_signatures"])
        d = {k: v for k, v in d.items() if k != "n_doppler_consolidated"}
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(f"bad radar config: {exc}") from None


class TxCodeMap:
    """Maps a consolidated cell (r, l) to its M full-axis Doppler bins.

    Subclasses implement :meth:`lookup`, which must accept broadcastable
    integer arrays and return an integer array with a trailing axis of
    length M holding the bins in ascending order.
    """

    n_range: int | None = None

    def __init__(self, n_doppler_consolidated: int, n_tx_signatures: int):
        self.n_doppler_consolidated = int(n_doppler_consolidated)
        self.n_tx_signatures = int(n_tx_signatures)

    @property
    def n_doppler(self) -> int:
        return self.n_doppler_consolidated * self.n_tx_signatures

    def lookup(self, r, l) -> np.ndarray:
        raise NotImplementedError

    def bins(self, r: int, l: int) -> np.ndarray:
        return self.lookup(np.asarray(r), np.asarray(l))

    def table(self, n_range: int) -> np.ndarray:
        """Full lookup table of shape (n_range, N_D*, M)."""
        r = np.arange(n_range)[:, None]
        l = np.arange(self.n_doppler_consolidated)[None, :]
        return self.lookup(r, l)

    def check(self, config: RadarConfig) -> None:
        """Raise ConfigError unless the map fits ``config`` and partitions each row."""
        if (
            self.n_doppler_consolidated != config.n_doppler_consolidated
            or self.n_tx_signatures != config.n_tx_signatures
        ):
            raise ConfigError(
                f"code map ({self.n_doppler_consolidated} x {self.n_tx_signatures}) "
                f"does not match config ({config.n_doppler_consolidated} x "
                f"{config.n_tx_signatures})"
            )
        if self.n_range is not None and self.n_range != config.n_range:
            raise ConfigError(f"code map covers {self.n_range} range rows, config has {config.n_range}")
        table = self.table(config.n_range)
        expected = np.arange(config.n_doppler)
        flat = np.sort(table.reshape(config.n_range, -1), axis=1)
        if not np.array_equal(flat, np.broadcast_to(expected, flat.shape)):
            raise ConfigError("code map does not partition the Doppler axis")


class InterleaveCodeMap(TxCodeMap):
    """Range-independent interleave: T(r, l) = {l + m * N_D* : m = 0..M-1}."""

    def lookup(self, r, l):
        l = np.asarray(l)
        offsets = np.arange(self.n_tx_signatures) * self.n_doppler_consolidated
        shape = np.broadcast_shapes(np.shape(r), l.shape)
        return np.broadcast_to(l, shape)[..., None] + offsets

    def __repr__(self):
        return f"InterleaveCodeMap({self.n_doppler_consolidated}, {self.n_tx_signatures})"


class TableCodeMap(TxCodeMap):
    """Calibrated layout given as an explicit (N_r, N_D*, M) bin table."""

    def __init__(self, table):
        table = np.sort(np.asarray(table, dtype=np.int64), axis=-1)
        if table.ndim != 3:
            raise ConfigError("code table must have shape (n_range, n_doppler_consolidated, M)")
        super().__init__(table.shape[1], table.shape[2])
        self.n_range = table.shape[0]
        self._table = table

    def lookup(self, r, l):
        return self._table[np.asarray(r), np.asarray(l)]

    def table(self, n_range):
        if n_range != self.n_range:
            raise ConfigError(f"code map covers {self.n_range} range rows, not {n_range}")
        return self._table


def default_code_map(config: RadarConfig) -> TxCodeMap:
    return InterleaveCodeMap(config.n_doppler_consolidated, config.n_tx_signatures)


@dataclass(frozen=True, eq=False)
class RdFrame:
    """Complex RD cube of shape (n_rx, n_range, n_doppler), complex64."""

    config: RadarConfig
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        cfg = self.config
        data = np.asarray(self.data)
        expected = (cfg.n_rx, cfg.n_range, cfg.n_doppler)
        if data.shape != expected:
            raise ConfigError(f"frame data has shape {data.shape}, config expects {expected}")
        if data.dtype != np.complex64:
            data = data.astype(np.complex64)
        if not np.all(np.isfinite(data)):
            raise ConfigError("frame contains non-finite samples")
        data = data.copy() if data is self.data else data
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def zeros(cls, config: RadarConfig) -> "RdFrame":
        return cls(config, np.zeros((config.n_rx, config.n_range, config.n_doppler), np.complex64))

    def with_data(self, data) -> "RdFrame":
        return RdFrame(self.config, data)


@dataclass(frozen=True, eq=False)
class Envelope:
    """Non-negative consolidated power map of shape (n_range, n_doppler_consolidated)."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ConfigError(f"envelope must be 2-D, got shape {values.shape}")
        if not (np.all(np.isfinite(values)) and np.all(values >= 0)):
            raise ConfigError("envelope entries must be finite and non-negative")
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def compute_envelope(frame: RdFrame, code_map: TxCodeMap | None = None) -> Envelope:
    """Sum power over receivers, then over each cell's Tx-replica bins.

    E(r, l) = sum_c sum_{d in T(r, l)} |R[c, r, d]|^2, accumulated in float64.
    """
    cfg = frame.config
    code_map = code_map or default_code_map(cfg)
    if (
        code_map.n_doppler_consolidated != cfg.n_doppler_consolidated
        or code_map.n_tx_signatures != cfg.n_tx_signatures
    ):
        raise ConfigError("code map does not match frame configuration")
    data = frame.data
    power = np.square(data.real, dtype=np.float64)
    power += np.square(data.imag, dtype=np.float64)
    power = power.sum(axis=0)
    if isinstance(code_map, InterleaveCodeMap):
        # bins l + m*N_D* -> reshape Doppler axis to (M, N_D*)
        folded = power.reshape(cfg.n_range, cfg.n_tx_signatures, cfg.n_doppler_consolidated)
        return Envelope(folded.sum(axis=1))
    table = code_map.table(cfg.n_range)
    rows = np.arange(cfg.n_range)[:, None, None]
    return Envelope(power[rows, table].sum(axis=-1))
