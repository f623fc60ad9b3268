"""Little-endian binary caches for features, correlation sequences and models.

Feature cache  ``ANDRF001 | u32 frames | u32 dim | f32[frames*dim] | u32 n | id``
Corr cache     ``ANDRC001 | u32 T | u32 496 | u32 L | f32[T*496] | u32 n | id``
Model artifact ``ANDRM001 | u32 kind | u32 n_dims | u32[n_dims] | u32 n_arrays |
               (u32 name_len, name, u32 ndim, u32[ndim] shape, f64[...])* |
               f64 C | u32 epochs | f64 lr | u64 seed``

Strings are length-prefixed UTF-8. The trailing id in the caches is the
recording id.
"""
from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from .corr_repr import CorrSequence, unflatten
from .dsp_features import FeatureSequence
from .errors import MalformedCache
from .models.lstm import PARAM_ORDER, LSTMModel
from .models.svm import LinearSVMModel

FEATURE_MAGIC = b"ANDRF001"
CORR_MAGIC = b"ANDRC001"
MODEL_MAGIC = b"ANDRM001"

KIND_SVM = 1
KIND_LSTM = 2


def _put_str(buf, s: str) -> None:
    b = s.encode("utf-8")
    buf.write(struct.pack("<I", len(b)))
    buf.write(b)


class _Reader:
    def __init__(self, data: bytes, what: str):
        self.data, self.pos, self.what = data, 0, what

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise MalformedCache(f"{self.what}: truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def str(self) -> str:
        return self.take(self.u32()).decode("utf-8")

    def array(self, dtype: str, count: int) -> np.ndarray:
        size = np.dtype(dtype).itemsize * count
        return np.frombuffer(self.take(size), dtype=dtype).copy()


def feature_cache_bytes(s: FeatureSequence) -> bytes:
    buf = io.BytesIO()
    buf.write(FEATURE_MAGIC)
    buf.write(struct.pack("<II", len(s.values), s.dim))
    buf.write(np.ascontiguousarray(s.values, dtype="<f4").tobytes())
    _put_str(buf, s.recording_id)
    return buf.getvalue()


def write_feature_cache(path, s: FeatureSequence) -> None:
    Path(path).write_bytes(feature_cache_bytes(s))


def read_feature_cache(path) -> FeatureSequence:
    r = _Reader(Path(path).read_bytes(), str(path))
    if r.take(8) != FEATURE_MAGIC:
        raise MalformedCache(f"{path}: bad feature-cache magic")
    n, dim = r.u32(), r.u32()
    if dim not in (16, 32):
        raise MalformedCache(f"{path}: dim {dim} not in (16, 32)")
    values = r.array("<f4", n * dim).reshape(n, dim).astype(np.float64)
    return FeatureSequence(values, r.str())


def write_corr_cache(path, cs: CorrSequence) -> None:
    flat = cs.flat()
    buf = io.BytesIO()
    buf.write(CORR_MAGIC)
    buf.write(struct.pack("<III", cs.T, flat.shape[1], cs.L))
    buf.write(np.ascontiguousarray(flat, dtype="<f4").tobytes())
    _put_str(buf, cs.recording_id)
    Path(path).write_bytes(buf.getvalue())


def read_corr_cache(path) -> CorrSequence:
    r = _Reader(Path(path).read_bytes(), str(path))
    if r.take(8) != CORR_MAGIC:
        raise MalformedCache(f"{path}: bad correlation-cache magic")
    T, dim, L = r.u32(), r.u32(), r.u32()
    flat = r.array("<f4", T * dim).reshape(T, dim).astype(np.float64)
    return CorrSequence(unflatten(flat), L, r.str())


def _put_array(buf, name: str, a: np.ndarray) -> None:
    _put_str(buf, name)
    a = np.asarray(a, dtype="<f8")
    buf.write(struct.pack("<I", a.ndim))
    buf.write(struct.pack(f"<{a.ndim}I", *a.shape))
    buf.write(np.ascontiguousarray(a).tobytes())


def _get_array(r: _Reader):
    name = r.str()
    shape = tuple(r.u32() for _ in range(r.u32()))
    return name, r.array("<f8", int(np.prod(shape))).reshape(shape)


def write_model(path, model, epochs: int = 0, lr: float = 0.0, seed: int = 0) -> None:
    buf = io.BytesIO()
    buf.write(MODEL_MAGIC)
    if isinstance(model, LinearSVMModel):
        dims = (model.dim,)
        arrays = [("weights", model.weights), ("bias", np.array([model.bias])),
                  ("mean", model.mean), ("scale", model.scale)]
        buf.write(struct.pack("<I", KIND_SVM))
        C = model.C
    elif isinstance(model, LSTMModel):
        dims = (model.input_dim, model.hidden_size, model.cell_input, int(model.projected))
        arrays = [(k, model.params[k]) for k in PARAM_ORDER if k in model.params]
        buf.write(struct.pack("<I", KIND_LSTM))
        C = 0.0
        seed = model.seed
    else:
        raise TypeError(f"cannot serialise {type(model).__name__}")
    buf.write(struct.pack("<I", len(dims)))
    buf.write(struct.pack(f"<{len(dims)}I", *dims))
    buf.write(struct.pack("<I", len(arrays)))
    for name, a in arrays:
        _put_array(buf, name, a)
    buf.write(struct.pack("<dIdQ", C, epochs, lr, seed))
    Path(path).write_bytes(buf.getvalue())


def read_model(path):
    """Returns ``(model, provenance)`` where provenance echoes C/epochs/lr/seed."""
    r = _Reader(Path(path).read_bytes(), str(path))
    if r.take(8) != MODEL_MAGIC:
        raise MalformedCache(f"{path}: bad model magic")
    kind = r.u32()
    dims = [r.u32() for _ in range(r.u32())]
    arrays = dict(_get_array(r) for _ in range(r.u32()))
    C, epochs, lr, seed = r.f64(), r.u32(), r.f64(), r.u64()
    prov = {"C": C, "epochs": epochs, "lr": lr, "seed": seed}
    if kind == KIND_SVM:
        model = LinearSVMModel(arrays["weights"], float(arrays["bias"][0]), C,
                               arrays["mean"], arrays["scale"])
    elif kind == KIND_LSTM:
        model = LSTMModel(arrays, dims[0], dims[1], bool(dims[3]), seed)
    else:
        raise MalformedCache(f"{path}: unknown model kind {kind}")
    return model, prov
