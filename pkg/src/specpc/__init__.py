"""Spectral point clouds from DDMA range-Doppler radar spectra."""

from .cfar import CfarConfig, PeakSet, ca_cfar, cfar_ratio, density, detect, expand_peaks
from .core import (
    Envelope,
    InterleaveCodeMap,
    RadarConfig,
    RdFrame,
    TableCodeMap,
    TxCodeMap,
    compute_envelope,
    default_code_map,
)
from .enrichment import (
    DescriptorConfig,
    NeighborhoodConfig,
    angle_descriptor,
    angle_descriptors,
    enrich_cloud,
    expand_neighborhood,
)
from .errors import ConfigError, DataRangeError, FormatError, SpcError
from .formats import load_cloud, load_dictionary, load_frame, save_cloud, save_dictionary, save_frame
from .metrics import auc_f1
from .mimo import (
    RECEIVER_MAJOR,
    REPLICA_MAJOR,
    BeamformingDictionary,
    SpectralPoint,
    SpectralPointCloud,
    angle_spectra,
    angle_spectrum,
    build_cloud,
    estimate_aoa,
    gather_snapshots,
    snapshot,
)
from .pillars import PillarGrid, pillarize
from .sparse_rd import mask_rd
from .sweep import SweepOptions, SweepReport, sweep
from .synth import Scene, SyntheticTarget, build_dictionary, render_frame, uniform_linear_array

__version__ = "0.1.0"
