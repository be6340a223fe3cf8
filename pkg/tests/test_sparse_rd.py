import numpy as np

from specpc import InterleaveCodeMap, RadarConfig, RdFrame, compute_envelope, expand_peaks, mask_rd
from specpc.cfar import PeakSet
from specpc.mimo import gather_snapshots

from .oracles import random_frame_data


def random_case(rng):
    cfg = RadarConfig(3, 16, 32, 4)
    frame = RdFrame(cfg, random_frame_data(rng, 3, 16, 32))
    cells = np.unique(np.column_stack([rng.integers(0, 16, 25), rng.integers(0, 8, 25)]), axis=0)
    return frame, expand_peaks(cells, InterleaveCodeMap(8, 4))


def test_empty_mask(rng):
    frame, _ = random_case(rng)
    empty = expand_peaks([], InterleaveCodeMap(8, 4))
    assert not mask_rd(frame, empty).data.any()


def test_full_mask(rng):
    frame, _ = random_case(rng)
    cells = np.array([(r, d) for r in range(16) for d in range(32)])
    full = PeakSet(np.zeros((0, 2), np.int64), cells)
    assert mask_rd(frame, full).data.tobytes() == frame.data.tobytes()


def test_envelope_recomputation(rng):
    frame, peaks = random_case(rng)
    masked = compute_envelope(mask_rd(frame, peaks)).values
    original = compute_envelope(frame).values
    kept = np.zeros((16, 8), bool)
    kept[peaks.consolidated[:, 0], peaks.consolidated[:, 1]] = True
    assert np.array_equal(masked[kept], original[kept])
    assert not masked[~kept].any()


def test_idempotent(rng):
    frame, peaks = random_case(rng)
    once = mask_rd(frame, peaks)
    assert mask_rd(once, peaks).data.tobytes() == once.data.tobytes()


def test_snapshots_preserved(rng):
    frame, peaks = random_case(rng)
    masked = mask_rd(frame, peaks)
    a = gather_snapshots(frame, peaks.consolidated)
    b = gather_snapshots(masked, peaks.consolidated)
    assert a.tobytes() == b.tobytes()


def test_config_unchanged(rng):
    frame, peaks = random_case(rng)
    assert mask_rd(frame, peaks).config == frame.config
