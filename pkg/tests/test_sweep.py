import numpy as np
import pytest

from specpc import (
    CfarConfig,
    ConfigError,
    InterleaveCodeMap,
    NeighborhoodConfig,
    RadarConfig,
    RdFrame,
    Scene,
    SweepOptions,
    SweepReport,
    SyntheticTarget,
    build_dictionary,
    compute_envelope,
    density,
    render_frame,
    sweep,
    uniform_linear_array,
)
from specpc.cfar import detect

from .oracles import random_frame_data


@pytest.fixture
def target_frame(small_config):
    d = build_dictionary(uniform_linear_array(8), (64, 1))
    t = SyntheticTarget(12, 4, float(d.directions[10, 0]), 0.0, 1.0)
    return render_frame(Scene([t], uniform_linear_array(8)), small_config), d


def test_huge_tau(target_frame):
    frame, _ = target_frame
    (entry,) = sweep([frame], [1e30]).entries
    assert entry.density_pct == 0 and entry.n_points == 0


def test_cross_module_density(small_config):
    # constant envelope plus one spike: at tau = 0.5 every cell passes
    data = np.ones((4, 32, 32), np.complex64)
    data[:, 5, [3, 19]] = 10
    frame = RdFrame(small_config, data)
    cmap = InterleaveCodeMap(16, 2)
    peaks = detect(compute_envelope(frame, cmap), cmap, CfarConfig(tau=0.5))
    (entry,) = sweep([frame], [0.5]).entries
    assert entry.n_points == len(peaks.consolidated)
    assert entry.density_pct == density(peaks, small_config)
    assert entry.density_pct == 2 * len(peaks.consolidated) / (32 * 32) * 100


def test_monotone(rng, small_config):
    frames = [RdFrame(small_config, random_frame_data(rng, 4, 32, 32)) for _ in range(3)]
    report = sweep(frames, [0.5, 1, 2, 4, 8])
    dens = [e.density_pct for e in report.entries]
    assert all(b <= a for a, b in zip(dens, dens[1:]))
    assert report.config["n_frames"] == 3


def test_enriched_counts_and_threads(rng, small_config):
    d = build_dictionary(uniform_linear_array(8), (64, 1))
    frames = [RdFrame(small_config, random_frame_data(rng, 4, 32, 32)) for _ in range(4)]
    opts = SweepOptions(dictionary=d, neighborhood=NeighborhoodConfig(3))
    a = sweep(frames, [1, 2, 4], opts)
    b = sweep(frames, [1, 2, 4], SweepOptions(dictionary=d, neighborhood=NeighborhoodConfig(3), workers=3))
    assert a.to_jsonl() == b.to_jsonl()
    for e in a.entries:
        assert e.n_points <= e.n_enriched_points <= 9 * e.n_points


def test_timing_does_not_change_data(rng, small_config):
    frames = [RdFrame(small_config, random_frame_data(rng, 4, 32, 32))]
    plain = sweep(frames, [1, 3])
    timed = sweep(frames, [1, 3], SweepOptions(timing=True))
    for p, t in zip(plain.entries, timed.entries):
        assert (p.tau, p.density_pct, p.n_points) == (t.tau, t.density_pct, t.n_points)
        assert set(t.timing_ms) == {"envelope", "cfar", "cloud", "enrich"}
        assert p.timing_ms is None


def test_usage_errors(target_frame):
    frame, _ = target_frame
    with pytest.raises(ConfigError):
        sweep([], [1])
    with pytest.raises(ConfigError):
        sweep([frame], [2, 1])


def test_report_roundtrip(rng, small_config, tmp_path):
    frames = [RdFrame(small_config, random_frame_data(rng, 4, 32, 32))]
    report = sweep(frames, [0.5, 2], SweepOptions(timing=True))
    path = tmp_path / "r.jsonl"
    report.save(path)
    back = SweepReport.load(path)
    assert back.to_jsonl() == path.read_text()
    first = path.read_text().splitlines()[0]
    assert '"schema": "spc-report/1"' in first
