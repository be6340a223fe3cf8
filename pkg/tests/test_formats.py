import json

import numpy as np
import pytest

from specpc import (
    DescriptorConfig,
    FormatError,
    InterleaveCodeMap,
    NeighborhoodConfig,
    RadarConfig,
    RdFrame,
    build_dictionary,
    enrich_cloud,
    expand_peaks,
    load_cloud,
    save_cloud,
    uniform_linear_array,
)
from specpc.formats import cloud_from_binary, cloud_from_csv, cloud_to_binary, cloud_to_csv, sidecar_path

from .oracles import random_frame_data


@pytest.fixture
def cloud(rng, small_config):
    d = build_dictionary(uniform_linear_array(8), (64, 1))
    frame = RdFrame(small_config, random_frame_data(rng, 4, 32, 32))
    cells = np.unique(np.column_stack([rng.integers(0, 32, 10), rng.integers(0, 16, 10)]), axis=0)
    peaks = expand_peaks(cells, InterleaveCodeMap(16, 2), tau=3.0)
    return enrich_cloud(frame, peaks, d, ncfg=NeighborhoodConfig(3), dcfg=DescriptorConfig(8, 1))


def test_csv_header(cloud):
    header = cloud_to_csv(cloud).splitlines()[0]
    assert header == "r_bin,az_rad,el_rad,doppler_bin,angle_amp," + ",".join(f"desc_{i}" for i in range(8))


def test_csv_roundtrip(cloud, tmp_path):
    path = tmp_path / "pc.csv"
    save_cloud(cloud, path)
    back = load_cloud(path)
    assert back.config == cloud.config and back.tau == 3.0
    assert np.array_equal(back.azimuth, cloud.azimuth)
    assert np.array_equal(back.descriptor, cloud.descriptor)
    assert back.sidecar() == cloud.sidecar()
    first = path.read_bytes()
    save_cloud(back, path)
    assert path.read_bytes() == first
    side = json.loads(sidecar_path(path).read_text())
    assert (side["neighborhood_n"], side["n_az"], side["n_el"]) == (3, 8, 1)


def test_binary_twin(cloud, tmp_path):
    path = tmp_path / "pc.bin"
    save_cloud(cloud, path)
    buf = path.read_bytes()
    assert buf[:4] == b"SPCP"
    back = load_cloud(path)
    assert cloud_to_binary(back) == buf
    assert cloud_to_csv(back) == cloud_to_csv(cloud)


def test_plain_cloud_has_no_descriptor_columns(rng, small_config, tmp_path):
    from specpc import build_cloud

    d = build_dictionary(uniform_linear_array(8), (64, 1))
    frame = RdFrame(small_config, random_frame_data(rng, 4, 32, 32))
    c = build_cloud(frame, [(1, 2), (3, 4)], d)
    text = cloud_to_csv(c)
    assert text.splitlines()[0] == "r_bin,az_rad,el_rad,doppler_bin,angle_amp"
    back = cloud_from_csv(text, config=small_config)
    assert back.descriptor is None and len(back) == 2


def test_bad_inputs(cloud):
    with pytest.raises(FormatError):
        cloud_from_csv("x,y\n1,2\n", config=cloud.config)
    with pytest.raises(FormatError):
        cloud_from_csv(cloud_to_csv(cloud))  # no radar config anywhere
    with pytest.raises(FormatError, match="truncated"):
        cloud_from_binary(cloud_to_binary(cloud)[:-1], config=cloud.config)


def test_loaded_cloud_beam_unknown(cloud):
    back = cloud_from_csv(cloud_to_csv(cloud), config=RadarConfig(4, 32, 32, 2))
    assert (back.beam_index == -1).all()
