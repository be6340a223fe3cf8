import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specpc import (
    ConfigError,
    DescriptorConfig,
    InterleaveCodeMap,
    NeighborhoodConfig,
    RdFrame,
    Scene,
    angle_descriptor,
    angle_spectra,
    build_cloud,
    build_dictionary,
    enrich_cloud,
    expand_neighborhood,
    expand_peaks,
    gather_snapshots,
    render_frame,
    uniform_linear_array,
)
from specpc.enrichment import angle_descriptors
from specpc.formats import cloud_to_csv
from specpc.synth import SyntheticTarget

from .oracles import random_frame_data


def as_set(cells):
    return {tuple(map(int, c)) for c in cells}


class TestNeighborhood:
    def test_config(self):
        assert NeighborhoodConfig(5).half_width == 2
        for bad in (0, 2, -1):
            with pytest.raises(ConfigError):
                NeighborhoodConfig(bad)

    def test_interior(self):
        got = as_set(expand_neighborhood([(5, 5)], NeighborhoodConfig(3), (16, 16)))
        assert got == {(r, l) for r in range(4, 7) for l in range(4, 7)}

    def test_corner(self):
        got = as_set(expand_neighborhood([(0, 0)], NeighborhoodConfig(3), (16, 16)))
        assert got == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_adjacent_union(self):
        got = as_set(expand_neighborhood([(5, 5), (5, 6)], NeighborhoodConfig(3), (16, 16)))
        expected = {(r, l) for r0, l0 in [(5, 5), (5, 6)] for r in range(r0 - 1, r0 + 2) for l in range(l0 - 1, l0 + 2)}
        assert got == expected and len(got) == 12

    def test_identity(self, rng):
        cells = np.unique(rng.integers(0, 16, (20, 2)), axis=0)
        assert np.array_equal(expand_neighborhood(cells, NeighborhoodConfig(1), (16, 16)), cells)

    @settings(max_examples=60, deadline=None)
    @given(
        cells=st.lists(st.tuples(st.integers(0, 19), st.integers(0, 9)), max_size=30),
        n=st.sampled_from([1, 3, 5]),
    )
    def test_superset_and_bound(self, cells, n):
        base = as_set(cells)
        got = as_set(expand_neighborhood(cells, NeighborhoodConfig(n), (20, 10)))
        assert base <= got
        assert len(got) <= n * n * len(base)
        assert all(0 <= r < 20 and 0 <= l < 10 for r, l in got)

    def test_bound_is_tight_for_disjoint_interior(self):
        cells = [(3, 3), (10, 3), (3, 10)]
        assert len(expand_neighborhood(cells, NeighborhoodConfig(3), (16, 16))) == 27


class TestDescriptor:
    def test_hand_pooled(self):
        s = np.array([1, 5, 2, 2, 9, 0, 3, 3.0])[:, None]
        assert angle_descriptor(s, DescriptorConfig(4, 1)).tolist() == [5, 2, 9, 3]

    def test_identity(self, rng):
        s = rng.random((8, 3))
        assert np.array_equal(angle_descriptor(s, DescriptorConfig(8, 3)), s.ravel())

    def test_remainder_goes_to_last_sector(self):
        s = np.array([1, 2, 3, 4, 5, 6, 7.0])
        # sectors of 7 // 3 = 2: [0,1], [2,3], [4,5,6]
        assert angle_descriptor(s, DescriptorConfig(3, 1)).tolist() == [2, 4, 7]

    def test_two_dimensional(self):
        s = np.arange(24.0).reshape(4, 6)
        d = angle_descriptor(s, DescriptorConfig(2, 3))
        expected = [s[u * 2 : u * 2 + 2, v * 2 : v * 2 + 2].max() for u in range(2) for v in range(3)]
        assert d.tolist() == expected

    def test_too_many_sectors(self):
        with pytest.raises(ConfigError):
            angle_descriptor(np.ones((4, 1)), DescriptorConfig(5, 1))

    @settings(max_examples=60, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        n_az=st.integers(1, 40),
        n_el=st.integers(1, 4),
        data=st.data(),
    )
    def test_global_max(self, seed, n_az, n_el, data):
        s = np.random.default_rng(seed).random((n_az, n_el))
        cfg = DescriptorConfig(data.draw(st.integers(1, n_az)), data.draw(st.integers(1, n_el)))
        assert angle_descriptor(s, cfg).max() == s.max()

    @pytest.mark.parametrize("fine", [32, 16, 8, 4, 2])
    def test_coarsening(self, rng, fine):
        s = rng.random((5, 64, 1))
        f = angle_descriptors(s, (64, 1), DescriptorConfig(fine, 1))
        c = angle_descriptors(s, (64, 1), DescriptorConfig(fine // 2, 1))
        assert np.array_equal(c, np.maximum(f[:, 0::2], f[:, 1::2]))


class TestEnrichCloud:
    @pytest.fixture
    def setup(self, rng, small_config):
        dictionary = build_dictionary(uniform_linear_array(8), (64, 1))
        frame = RdFrame(small_config, random_frame_data(rng, 4, 32, 32))
        cells = np.unique(np.column_stack([rng.integers(0, 32, 15), rng.integers(0, 16, 15)]), axis=0)
        peaks = expand_peaks(cells, InterleaveCodeMap(16, 2), tau=4.0)
        return frame, peaks, dictionary

    def test_needs_a_scheme(self, setup):
        frame, peaks, dictionary = setup
        with pytest.raises(ConfigError):
            enrich_cloud(frame, peaks, dictionary)

    def test_identity_neighborhood(self, setup):
        frame, peaks, dictionary = setup
        base = build_cloud(frame, peaks, dictionary)
        same = enrich_cloud(frame, peaks, dictionary, ncfg=NeighborhoodConfig(1))
        assert cloud_to_csv(same) == cloud_to_csv(base)
        assert same.beam_index.tobytes() == base.beam_index.tobytes()

    def test_descriptor_only(self, setup):
        frame, peaks, dictionary = setup
        base = build_cloud(frame, peaks, dictionary)
        cloud = enrich_cloud(frame, peaks, dictionary, dcfg=DescriptorConfig(32, 1))
        assert len(cloud) == len(base)
        assert cloud.descriptor.shape == (len(base), 32)
        assert np.array_equal(cloud.descriptor.max(axis=1), cloud.angle_amplitude)
        assert cloud.sidecar() == {"neighborhood_n": None, "n_az": 32, "n_el": 1}

    def test_full_resolution_descriptor_is_spectrum(self, setup):
        frame, peaks, dictionary = setup
        cloud = enrich_cloud(frame, peaks, dictionary, dcfg=DescriptorConfig(64, 1))
        spectra = angle_spectra(gather_snapshots(frame, peaks.consolidated), dictionary)
        assert cloud.descriptor.tobytes() == spectra.tobytes()

    def test_combined(self, setup):
        frame, peaks, dictionary = setup
        base = build_cloud(frame, peaks, dictionary)
        cloud = enrich_cloud(frame, peaks, dictionary, ncfg=NeighborhoodConfig(3), dcfg=DescriptorConfig(32, 1))
        assert as_set(base.origins) <= as_set(cloud.origins)
        assert np.array_equal(cloud.descriptor.max(axis=1), cloud.angle_amplitude)
        assert cloud.sidecar() == {"neighborhood_n": 3, "n_az": 32, "n_el": 1}

    def test_single_interior_peak(self, small_config):
        dictionary = build_dictionary(uniform_linear_array(8), (64, 1))
        az = float(dictionary.directions[30, 0])
        frame = render_frame(Scene([SyntheticTarget(10, 6, az, 0.0, 2.0)], uniform_linear_array(8)), small_config)
        peaks = expand_peaks([(10, 6)], InterleaveCodeMap(16, 2))
        cloud = enrich_cloud(frame, peaks, dictionary, ncfg=NeighborhoodConfig(3))
        assert len(cloud) == 9
        assert set(cloud.range_bin.tolist()) == {9, 10, 11}
        centre = [p for p in cloud.points if p.origin == (10, 6)][0]
        assert centre.beam_index == 30
        # neighbours hold no energy in a noiseless scene
        others = [p.angle_amplitude for p in cloud.points if p.origin != (10, 6)]
        assert max(others) == 0
