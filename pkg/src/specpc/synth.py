"""Synthetic DDMA scenes: steering dictionaries and noiseless/noisy RD frames.

Array geometry is an (N_virt, 3) array of virtual element positions in
wavelengths, listed in snapshot stacking order. Directions use x as the
horizontal aperture axis, y as vertical and z as boresight, so the unit
vector for (azimuth a, elevation e) is (cos e sin a, sin e, cos e cos a).
Per-Tx DDMA phase codes are identity: the code map alone places each
replica.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import RadarConfig, RdFrame, TxCodeMap, default_code_map
from .errors import ConfigError
from .mimo import REPLICA_MAJOR, RECEIVER_MAJOR, BeamformingDictionary


def uniform_linear_array(n: int, spacing: float = 0.5) -> np.ndarray:
    """Horizontal ULA centred on the origin."""
    x = (np.arange(n) - (n - 1) / 2) * spacing
    return np.column_stack([x, np.zeros(n), np.zeros(n)])


def _as_geometry(geometry) -> np.ndarray:
    g = np.asarray(geometry, dtype=np.float64)
    if g.ndim == 1:
        g = np.column_stack([g, np.zeros_like(g), np.zeros_like(g)])
    if g.ndim != 2 or g.shape[1] != 3 or len(g) == 0:
        raise ConfigError(f"geometry must be an (N_virt, 3) array, got shape {g.shape}")
    return g


def steering_vector(geometry, azimuth, elevation) -> np.ndarray:
    """exp(j 2 pi p . u) for each element; broadcasts over direction arrays."""
    g = _as_geometry(geometry)
    az = np.asarray(azimuth, dtype=np.float64)[..., None]
    el = np.asarray(elevation, dtype=np.float64)[..., None]
    phase = g[:, 0] * np.cos(el) * np.sin(az) + g[:, 1] * np.sin(el) + g[:, 2] * np.cos(el) * np.cos(az)
    return np.exp(2j * np.pi * phase)


def _axis(n: int, extent, name: str) -> np.ndarray:
    lo, hi = (float(v) for v in extent)
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi < lo or (n > 1 and hi == lo):
        raise ConfigError(f"degenerate {name} field of view {extent!r} for {n} bins")
    if n == 1:
        return np.array([(lo + hi) / 2])
    return np.linspace(lo, hi, n)


def build_dictionary(
    geometry,
    grid: tuple[int, int] = (64, 1),
    az_fov: tuple[float, float] = (-np.pi / 3, np.pi / 3),
    el_fov: tuple[float, float] = (0.0, 0.0),
    order: int = REPLICA_MAJOR,
) -> BeamformingDictionary:
    """Conjugate steering rows on a uniform (inclusive) angular grid."""
    n_az, n_el = grid
    if n_az < 1 or n_el < 1:
        raise ConfigError(f"bad dictionary grid {grid!r}")
    az = _axis(n_az, az_fov, "azimuth")
    el = _axis(n_el, el_fov, "elevation")
    dirs = np.stack(np.meshgrid(az, el, indexing="ij"), axis=-1).reshape(-1, 2)
    dirs = dirs.astype(np.float32)
    if len(np.unique(dirs, axis=0)) != len(dirs):
        raise ConfigError("angular grid is too fine for float32 direction labels")
    steer = steering_vector(geometry, dirs[:, 0], dirs[:, 1])
    return BeamformingDictionary(np.conj(steer).astype(np.complex64), dirs, n_az, n_el, order)


@dataclass(frozen=True)
class SyntheticTarget:
    range_bin: int
    doppler_bin: int  # consolidated index
    azimuth: float
    elevation: float = 0.0
    amplitude: complex = 1.0

    def __post_init__(self):
        if not abs(self.amplitude) > 0:
            raise ConfigError("target amplitude must be non-zero")
        object.__setattr__(self, "amplitude", complex(self.amplitude))


@dataclass(frozen=True, eq=False)
class Scene:
    targets: tuple[SyntheticTarget, ...]
    geometry: np.ndarray = field(repr=False)
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "geometry", _as_geometry(self.geometry))
        if not self.noise_sigma >= 0:
            raise ConfigError("noise_sigma must be non-negative")

    @property
    def n_virtual(self) -> int:
        return len(self.geometry)


def complex_gaussian(shape, seed: int) -> np.ndarray:
    """Standard circular complex Gaussians (E|z|^2 = 1) from a Philox stream.

    Each sample uses one pair of uniforms through the Box-Muller transform,
    drawn in C order of ``shape``.
    """
    gen = np.random.Generator(np.random.Philox(int(seed)))
    n = int(np.prod(shape))
    u = gen.random((n, 2))
    radius = np.sqrt(-np.log1p(-u[:, 0]))  # -2 ln(U) scaled by 1/2 for unit power
    z = radius * np.exp(2j * np.pi * u[:, 1])
    return z.reshape(shape)


def render_frame(
    scene: Scene,
    config: RadarConfig,
    code_map: TxCodeMap | None = None,
    order: int = REPLICA_MAJOR,
) -> RdFrame:
    """Deposit each target's steered amplitude at its replica bins, then add noise.

    Targets at the same cell add coherently, in list order.
    """
    code_map = code_map or default_code_map(config)
    if scene.n_virtual != config.n_virtual:
        raise ConfigError(
            f"geometry has {scene.n_virtual} elements, config needs "
            f"{config.n_rx} x {config.n_tx_signatures} = {config.n_virtual}"
        )
    n_c, m = config.n_rx, config.n_tx_signatures
    cube = np.zeros((n_c, config.n_range, config.n_doppler), dtype=np.complex128)
    for t in scene.targets:
        if not (0 <= t.range_bin < config.n_range and 0 <= t.doppler_bin < config.n_doppler_consolidated):
            raise ConfigError(f"target at ({t.range_bin}, {t.doppler_bin}) is outside the grid")
        v = t.amplitude * steering_vector(scene.geometry, t.azimuth, t.elevation)
        if order == REPLICA_MAJOR:
            block = v.reshape(m, n_c).T
        elif order == RECEIVER_MAJOR:
            block = v.reshape(n_c, m)
        else:
            raise ConfigError(f"unknown stacking order {order}")
        bins = code_map.bins(t.range_bin, t.doppler_bin)
        cube[:, t.range_bin, bins] += block
    if scene.noise_sigma > 0:
        cube += scene.noise_sigma * complex_gaussian(cube.shape, scene.seed)
    return RdFrame(config, cube.astype(np.complex64))


def noise_sigma_for_snr(amplitude: complex, snr_db: float) -> float:
    """Per-sample noise sigma giving |amplitude|^2 / sigma^2 = snr_db."""
    return abs(amplitude) / 10 ** (snr_db / 20)
