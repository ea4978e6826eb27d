"""Binary channel datasets and mixture-model checkpoints.

Dataset layout (all little endian)::

    b"WSLB1"
    uint64 m_sc, m_sn, m_r, m_t
    float64 delta_f, delta_t, f_c
    uint64 N, has_labels
    N * M complex values as interleaved float64 (re, im)
    N uint8 labels            (only if has_labels)

Each record is one vectorized channel in frequency, time, receive, transmit
order with the transmit index fastest.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import ChannelConfig
from .clustering import GmmModel

MAGIC = b"WSLB1"
_HEADER = struct.Struct("<4Q3d2Q")


class DatasetError(ValueError):
    pass


@dataclass
class Dataset:
    cfg: ChannelConfig
    h: np.ndarray
    labels: np.ndarray | None = None

    def __len__(self):
        return self.h.shape[0]


def encode_dataset(cfg: ChannelConfig, h, labels=None) -> bytes:
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[1] != cfg.size:
        raise DatasetError(f"records must have length {cfg.size}, got shape {h.shape}")
    if h.shape[0] == 0:
        raise DatasetError("empty dataset")
    if not np.all(np.isfinite(h)):
        raise DatasetError("records contain non-finite values")
    header = MAGIC + _HEADER.pack(cfg.m_sc, cfg.m_sn, cfg.m_r, cfg.m_t,
                                  cfg.delta_f, cfg.delta_t, cfg.f_c,
                                  h.shape[0], int(labels is not None))
    body = h.astype("<c16").tobytes()
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape != (h.shape[0],):
            raise DatasetError("need one label per record")
        if labels.min() < 0 or labels.max() > 255:
            raise DatasetError("labels must fit in an unsigned byte")
        body += labels.astype(np.uint8).tobytes()
    return header + body


def decode_dataset(data: bytes) -> Dataset:
    if not data.startswith(MAGIC):
        raise DatasetError("not a WSLB1 dataset")
    off = len(MAGIC)
    if len(data) < off + _HEADER.size:
        raise DatasetError("truncated header")
    m_sc, m_sn, m_r, m_t, df, dt, fc, n, has_labels = _HEADER.unpack_from(data, off)
    off += _HEADER.size
    cfg = ChannelConfig(m_sc, m_sn, m_r, m_t, df, dt, fc)
    size = n * cfg.size * 16
    expected = off + size + (n if has_labels else 0)
    if len(data) != expected:
        raise DatasetError(f"file has {len(data)} bytes, header implies {expected}")
    h = np.frombuffer(data, dtype="<c16", count=n * cfg.size, offset=off).reshape(n, cfg.size)
    labels = None
    if has_labels:
        labels = np.frombuffer(data, dtype=np.uint8, count=n, offset=off + size).copy()
    return Dataset(cfg, h.astype(np.complex128), labels)


def write_dataset(path, cfg: ChannelConfig, h, labels=None) -> str:
    """Write a dataset; returns the SHA-256 hex digest of the file."""
    blob = encode_dataset(cfg, h, labels)
    Path(path).write_bytes(blob)
    return hashlib.sha256(blob).hexdigest()


def read_dataset(path) -> Dataset:
    return decode_dataset(Path(path).read_bytes())


def save_gmm(model: GmmModel, prefix) -> tuple[Path, Path]:
    """Store covariances as a dataset of matrix rows plus a JSON header.

    The binary part holds ``K * M`` records (row ``i`` of covariance ``k`` is
    record ``k * M + i``); its domain sizes are the model's, padded with ones.
    """
    prefix = Path(prefix)
    dims = tuple(model.dims)
    if len(dims) > 4:
        raise DatasetError("checkpoints support at most four domains")
    padded = dims + (1,) * (4 - len(dims))
    cfg = ChannelConfig(*padded)
    bin_path = prefix.with_suffix(".wslb")
    json_path = prefix.with_suffix(".json")
    write_dataset(bin_path, cfg, model.covs.reshape(-1, model.dim))
    meta = {"n_components": model.n_components, "dims": list(dims),
            "weights": [float(w) for w in model.weights], "floor": model.floor,
            "log_likelihood": model.log_likelihood}
    json_path.write_text(json.dumps(meta, indent=2) + "\n")
    return bin_path, json_path


def load_gmm(prefix) -> GmmModel:
    prefix = Path(prefix)
    meta = json.loads(prefix.with_suffix(".json").read_text())
    ds = read_dataset(prefix.with_suffix(".wslb"))
    k = meta["n_components"]
    m = ds.cfg.size
    covs = ds.h.reshape(k, m, m)
    return GmmModel(weights=np.asarray(meta["weights"]), covs=covs, dims=tuple(meta["dims"]),
                    floor=meta["floor"], log_likelihood=meta["log_likelihood"])
