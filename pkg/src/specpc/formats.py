"""Binary and text file formats.

All binary formats are little-endian.

* RD frame (``SPC1``): magic, u32 n_rx, n_range, n_doppler, n_tx_signatures,
  f32 range_resolution, doppler_resolution, then complex64 samples in
  (c, r, d) C order.
* Dictionary (``SPCB``): magic, u32 n_az, n_el, n_virt, u8 stacking-order
  tag, (f32 az, f32 el) per row, then the complex64 matrix row by row.
* Point cloud: CSV ``r_bin,az_rad,el_rad,doppler_bin,angle_amp[,desc_i...]``
  with a JSON sidecar, and a binary twin (``SPCP``) with the same columns.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import struct
from pathlib import Path

import numpy as np

from .cfar import PeakSet
from .core import RadarConfig, RdFrame
from .errors import ConfigError, FormatError
from .mimo import BeamformingDictionary, SpectralPointCloud
from .synth import Scene, SyntheticTarget

FRAME_MAGIC = b"SPC1"
DICT_MAGIC = b"SPCB"
CLOUD_MAGIC = b"SPCP"

_FRAME_HEADER = struct.Struct("<4sIIIIff")
_DICT_HEADER = struct.Struct("<4sIIIB")
_CLOUD_HEADER = struct.Struct("<4sII")

# refuse headers describing more than 2**34 payload bytes
_MAX_PAYLOAD = 1 << 34


def _read_bytes(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _check_magic(buf: bytes, magic: bytes, header: struct.Struct, what: str):
    if len(buf) < 4 or buf[:4] != magic:
        raise FormatError(f"not a {what} file: bad magic {buf[:4]!r}", offset=0)
    if len(buf) < header.size:
        raise FormatError(f"truncated {what} header", offset=len(buf))
    return header.unpack_from(buf)


def _payload(buf: bytes, start: int, nbytes: int, what: str) -> memoryview:
    if nbytes > _MAX_PAYLOAD:
        raise FormatError(f"{what} dimensions overflow ({nbytes} payload bytes)", offset=4)
    end = start + nbytes
    if len(buf) < end:
        raise FormatError(f"truncated {what} payload: need {nbytes} bytes, have {len(buf) - start}", offset=len(buf))
    if len(buf) > end:
        raise FormatError(f"{len(buf) - end} trailing bytes after {what} payload", offset=end)
    return memoryview(buf)[start:end]


def _first_nonfinite(values: np.ndarray, start: int, itemsize: int) -> int:
    idx = int(np.flatnonzero(~np.isfinite(values.reshape(-1)))[0])
    return start + idx * itemsize


def frame_to_bytes(frame: RdFrame) -> bytes:
    cfg = frame.config
    header = _FRAME_HEADER.pack(
        FRAME_MAGIC,
        cfg.n_rx,
        cfg.n_range,
        cfg.n_doppler,
        cfg.n_tx_signatures,
        cfg.range_resolution,
        cfg.doppler_resolution,
    )
    return header + frame.data.astype("<c8", copy=False).tobytes()


def frame_from_bytes(buf: bytes) -> RdFrame:
    _, n_rx, n_range, n_doppler, n_tx, r_res, d_res = _check_magic(buf, FRAME_MAGIC, _FRAME_HEADER, "RD frame")
    try:
        cfg = RadarConfig(n_rx, n_range, n_doppler, n_tx, r_res, d_res)
    except ConfigError as exc:
        raise FormatError(f"invalid frame header: {exc}", offset=4) from None
    n = n_rx * n_range * n_doppler
    raw = _payload(buf, _FRAME_HEADER.size, n * 8, "RD frame")
    data = np.frombuffer(raw, dtype="<c8").reshape(n_rx, n_range, n_doppler)
    if not np.all(np.isfinite(data)):
        raise FormatError("non-finite sample in RD frame", offset=_first_nonfinite(data, _FRAME_HEADER.size, 8))
    return RdFrame(cfg, data.astype(np.complex64))


def save_frame(frame: RdFrame, path) -> None:
    Path(path).write_bytes(frame_to_bytes(frame))


def load_frame(path) -> RdFrame:
    return frame_from_bytes(_read_bytes(path))


def dictionary_to_bytes(d: BeamformingDictionary) -> bytes:
    header = _DICT_HEADER.pack(DICT_MAGIC, d.n_az, d.n_el, d.n_virtual, d.order)
    return header + d.directions.astype("<f4").tobytes() + d.matrix.astype("<c8").tobytes()


def dictionary_from_bytes(buf: bytes) -> BeamformingDictionary:
    _, n_az, n_el, n_virt, order = _check_magic(buf, DICT_MAGIC, _DICT_HEADER, "dictionary")
    n_theta = n_az * n_el
    if n_theta == 0 or n_virt == 0:
        raise FormatError("dictionary header declares an empty grid", offset=4)
    start = _DICT_HEADER.size
    raw = _payload(buf, start, n_theta * 8 + n_theta * n_virt * 8, "dictionary")
    dirs = np.frombuffer(raw[: n_theta * 8], dtype="<f4").reshape(n_theta, 2)
    matrix = np.frombuffer(raw[n_theta * 8 :], dtype="<c8").reshape(n_theta, n_virt)
    if not np.all(np.isfinite(dirs)):
        raise FormatError("non-finite direction in dictionary", offset=_first_nonfinite(dirs, start, 4))
    if not np.all(np.isfinite(matrix)):
        off = start + n_theta * 8
        raise FormatError("non-finite dictionary entry", offset=_first_nonfinite(matrix, off, 8))
    try:
        return BeamformingDictionary(matrix, dirs, n_az, n_el, order)
    except ConfigError as exc:
        raise FormatError(f"invalid dictionary: {exc}", offset=start) from None


def save_dictionary(d: BeamformingDictionary, path) -> None:
    Path(path).write_bytes(dictionary_to_bytes(d))


def load_dictionary(path) -> BeamformingDictionary:
    return dictionary_from_bytes(_read_bytes(path))


def _tau_to_json(tau):
    return None if math.isnan(tau) else tau


def peaks_to_json(peaks: PeakSet) -> str:
    doc = {
        "tau": _tau_to_json(peaks.tau),
        "consolidated": peaks.consolidated.tolist(),
        "expanded": peaks.expanded.tolist(),
    }
    return json.dumps(doc) + "\n"


def peaks_from_json(text: str) -> PeakSet:
    try:
        doc = json.loads(text)
        tau = float("nan") if doc.get("tau") is None else float(doc["tau"])
        cons = np.asarray(doc["consolidated"], dtype=np.int64).reshape(-1, 2)
        exp = np.asarray(doc["expanded"], dtype=np.int64).reshape(-1, 2)
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"bad peak set JSON: {exc}") from None
    return PeakSet(cons, exp, tau)


def save_peaks(peaks: PeakSet, path) -> None:
    Path(path).write_text(peaks_to_json(peaks))


def load_peaks(path) -> PeakSet:
    return peaks_from_json(Path(path).read_text())


CLOUD_COLUMNS = ["r_bin", "az_rad", "el_rad", "doppler_bin", "angle_amp"]


def _fmt(x) -> str:
    return repr(float(x))


def cloud_to_csv(cloud: SpectralPointCloud) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    n_desc = cloud.n_descriptor
    writer.writerow(CLOUD_COLUMNS + [f"desc_{i}" for i in range(n_desc)])
    for j in range(len(cloud)):
        row = [
            str(int(cloud.range_bin[j])),
            _fmt(cloud.azimuth[j]),
            _fmt(cloud.elevation[j]),
            str(int(cloud.doppler_bin[j])),
            _fmt(cloud.angle_amplitude[j]),
        ]
        if n_desc:
            row.extend(_fmt(x) for x in cloud.descriptor[j])
        writer.writerow(row)
    return out.getvalue()


def _cloud_from_columns(cols: dict, desc, meta: dict, config) -> SpectralPointCloud:
    if config is None:
        radar = meta.get("radar")
        if radar is None:
            raise FormatError("point cloud has no radar config; pass one explicitly")
        config = RadarConfig.from_dict(radar)
    n_az, n_el = meta.get("n_az"), meta.get("n_el")
    tau = meta.get("tau")
    return SpectralPointCloud(
        config=config,
        range_bin=cols["r_bin"],
        doppler_bin=cols["doppler_bin"],
        azimuth=cols["az_rad"],
        elevation=cols["el_rad"],
        angle_amplitude=cols["angle_amp"],
        beam_index=np.full(len(cols["r_bin"]), -1),
        descriptor=desc,
        tau=float("nan") if tau is None else float(tau),
        neighborhood_n=meta.get("neighborhood_n"),
        descriptor_shape=None if n_az is None else (int(n_az), int(n_el)),
    )


def cloud_from_csv(text: str, meta: dict | None = None, config: RadarConfig | None = None) -> SpectralPointCloud:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][: len(CLOUD_COLUMNS)] != CLOUD_COLUMNS:
        raise FormatError("point cloud CSV has an unexpected header", offset=0)
    header = rows[0]
    n_desc = len(header) - len(CLOUD_COLUMNS)
    if header[len(CLOUD_COLUMNS) :] != [f"desc_{i}" for i in range(n_desc)]:
        raise FormatError("point cloud CSV has malformed descriptor columns", offset=0)
    body = rows[1:]
    try:
        table = np.array([[float(x) for x in row] for row in body], dtype=np.float64).reshape(len(body), len(header))
    except ValueError as exc:
        raise FormatError(f"bad point cloud CSV row: {exc}") from None
    cols = {name: table[:, i] for i, name in enumerate(CLOUD_COLUMNS)}
    cols["r_bin"] = cols["r_bin"].astype(np.int64)
    cols["doppler_bin"] = cols["doppler_bin"].astype(np.int64)
    desc = table[:, len(CLOUD_COLUMNS) :] if n_desc else None
    return _cloud_from_columns(cols, desc, meta or {}, config)


def cloud_sidecar(cloud: SpectralPointCloud) -> dict:
    doc = cloud.sidecar()
    doc["tau"] = _tau_to_json(cloud.tau)
    doc["radar"] = cloud.config.to_dict()
    return doc


def _cloud_dtype(n_desc: int) -> np.dtype:
    fields = [
        ("r_bin", "<i4"),
        ("az_rad", "<f8"),
        ("el_rad", "<f8"),
        ("doppler_bin", "<i4"),
        ("angle_amp", "<f8"),
    ]
    if n_desc:
        fields.append(("desc", "<f8", (n_desc,)))
    return np.dtype(fields)


def cloud_to_binary(cloud: SpectralPointCloud) -> bytes:
    n_desc = cloud.n_descriptor
    rec = np.zeros(len(cloud), dtype=_cloud_dtype(n_desc))
    rec["r_bin"] = cloud.range_bin
    rec["az_rad"] = cloud.azimuth
    rec["el_rad"] = cloud.elevation
    rec["doppler_bin"] = cloud.doppler_bin
    rec["angle_amp"] = cloud.angle_amplitude
    if n_desc:
        rec["desc"] = cloud.descriptor
    return _CLOUD_HEADER.pack(CLOUD_MAGIC, len(cloud), n_desc) + rec.tobytes()


def cloud_from_binary(buf: bytes, meta: dict | None = None, config: RadarConfig | None = None) -> SpectralPointCloud:
    _, n, n_desc = _check_magic(buf, CLOUD_MAGIC, _CLOUD_HEADER, "point cloud")
    dtype = _cloud_dtype(n_desc)
    raw = _payload(buf, _CLOUD_HEADER.size, n * dtype.itemsize, "point cloud")
    rec = np.frombuffer(raw, dtype=dtype)
    cols = {name: rec[name] for name in CLOUD_COLUMNS}
    desc = rec["desc"].reshape(n, n_desc) if n_desc else None
    return _cloud_from_columns(cols, desc, meta or {}, config)


def sidecar_path(path) -> Path:
    return Path(os.fspath(path) + ".json")


def save_cloud(cloud: SpectralPointCloud, path, binary: bool | None = None) -> None:
    """Write CSV (or the binary twin for ``.bin``/``.spcp`` paths) plus ``<path>.json``."""
    path = Path(path)
    if binary is None:
        binary = path.suffix in (".bin", ".spcp")
    if binary:
        path.write_bytes(cloud_to_binary(cloud))
    else:
        path.write_text(cloud_to_csv(cloud))
    sidecar_path(path).write_text(json.dumps(cloud_sidecar(cloud), indent=2) + "\n")


def load_cloud(path, config: RadarConfig | None = None) -> SpectralPointCloud:
    path = Path(path)
    side = sidecar_path(path)
    meta = json.loads(side.read_text()) if side.exists() else {}
    buf = _read_bytes(path)
    if buf[:4] == CLOUD_MAGIC:
        return cloud_from_binary(buf, meta, config)
    return cloud_from_csv(buf.decode("utf-8"), meta, config)


def scene_to_json(scene: Scene) -> str:
    doc = {
        "targets": [
            {
                "r": t.range_bin,
                "l": t.doppler_bin,
                "az": t.azimuth,
                "el": t.elevation,
                "amp_re": t.amplitude.real,
                "amp_im": t.amplitude.imag,
            }
            for t in scene.targets
        ],
        "noise_sigma": scene.noise_sigma,
        "seed": scene.seed,
        "geometry": scene.geometry.tolist(),
    }
    return json.dumps(doc, indent=2) + "\n"


def scene_from_json(text: str) -> Scene:
    try:
        doc = json.loads(text)
        targets = [
            SyntheticTarget(
                int(t["r"]),
                int(t["l"]),
                float(t["az"]),
                float(t.get("el", 0.0)),
                complex(float(t["amp_re"]), float(t.get("amp_im", 0.0))),
            )
            for t in doc["targets"]
        ]
        return Scene(targets, doc["geometry"], float(doc.get("noise_sigma", 0.0)), int(doc.get("seed", 0)))
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"bad scene JSON: {exc}") from None


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(scene_to_json(scene))


def load_scene(path) -> Scene:
    return scene_from_json(Path(path).read_text())
