"""Sliding-window feature-correlation matrices in Fisher-z space."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp_features import FeatureSequence
from .errors import DataError, OddL, SequenceTooShort

FISHER_EPS = 1e-6
DEFAULT_GRID = (100, 200, 300, 400, 500)


@dataclass
class CorrSequence:
    """Stack of ``T`` symmetric z-matrices, one per half-overlapping window."""

    matrices: np.ndarray  # (T, D, D)
    L: int
    recording_id: str = ""

    @property
    def T(self) -> int:
        return len(self.matrices)

    def start_vector(self, k: int) -> int:
        """First frame covered by matrix ``k`` (0-based)."""
        return k * (self.L // 2)

    def flat(self) -> np.ndarray:
        """``(T, D(D-1)/2)`` strict lower triangles."""
        return lower_triangle(self.matrices)


def n_windows(n_frames: int, L: int) -> int:
    if n_frames < L:
        return 0
    return (n_frames - L) // (L // 2) + 1


def _check_L(L: int) -> None:
    if L < 2 or L % 2:
        raise OddL(f"L must be an even integer >= 2, got {L}")


def segment(values: np.ndarray, L: int) -> np.ndarray:
    """Windows of ``L`` frames starting every ``L/2`` frames.

    Returns a ``(T, L, D)`` read-only view; trailing frames that do not fill
    a whole window are dropped.
    """
    _check_L(L)
    values = np.asarray(values)
    if len(values) < L:
        raise SequenceTooShort(f"{len(values)} frames < L={L}")
    view = np.lib.stride_tricks.sliding_window_view(values, L, axis=0)
    return view[::L // 2].transpose(0, 2, 1)


def pearson_matrix(window: np.ndarray) -> np.ndarray:
    """Pearson correlations between the columns of one ``(L, D)`` block.

    Accepts a stack ``(..., L, D)`` as well. Constant columns correlate 0
    with everything else; the diagonal is 1.
    """
    x = np.asarray(window, dtype=np.float64)
    if x.shape[-2] < 2:
        raise DataError("correlation needs at least two frames")
    constant = np.ptp(x, axis=-2) == 0
    xc = x - x.mean(axis=-2, keepdims=True)
    xc = np.where(constant[..., None, :], 0.0, xc)
    norm = np.sqrt(np.sum(xc * xc, axis=-2))
    safe = np.where(norm > 0, norm, 1.0)
    xn = xc / safe[..., None, :]
    r = np.swapaxes(xn, -1, -2) @ xn
    r = 0.5 * (r + np.swapaxes(r, -1, -2))
    r = np.clip(r, -1.0, 1.0)
    d = r.shape[-1]
    r[..., np.arange(d), np.arange(d)] = 1.0
    return r


def fisher_z(r, eps: float = FISHER_EPS):
    return np.arctanh(np.clip(r, -(1.0 - eps), 1.0 - eps))


def tril_index(d: int):
    """Row-major strict-lower-triangle indices: (1,0), (2,0), (2,1), (3,0), ..."""
    return np.tril_indices(d, -1)


def lower_triangle(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    i, j = tril_index(m.shape[-1])
    return m[..., i, j]


def unflatten(flat: np.ndarray, d: int | None = None, diagonal: float = 0.0) -> np.ndarray:
    """Rebuild symmetric matrices from strict lower triangles."""
    flat = np.asarray(flat)
    if d is None:
        d = int(round((1 + np.sqrt(1 + 8 * flat.shape[-1])) / 2))
    if d * (d - 1) // 2 != flat.shape[-1]:
        raise DataError(f"{flat.shape[-1]} values do not form a strict triangle")
    out = np.full(flat.shape[:-1] + (d, d), diagonal, dtype=flat.dtype)
    i, j = tril_index(d)
    out[..., i, j] = flat
    out[..., j, i] = flat
    return out


def corr_sequence(s: FeatureSequence | np.ndarray, L: int) -> CorrSequence:
    values = s.values if isinstance(s, FeatureSequence) else np.asarray(s, dtype=np.float64)
    rid = s.recording_id if isinstance(s, FeatureSequence) else ""
    windows = segment(values, L)
    return CorrSequence(fisher_z(pearson_matrix(windows)), L, rid)


def average_matrix(cs: CorrSequence | np.ndarray) -> np.ndarray:
    """Element-wise mean of the flattened z-matrices (pooled in z-space)."""
    flat = cs.flat() if isinstance(cs, CorrSequence) else np.asarray(cs)
    if len(flat) == 0:
        raise DataError("no matrices to average")
    return flat.mean(axis=0)


def mean_feature_vector(s: FeatureSequence | np.ndarray) -> np.ndarray:
    values = s.values if isinstance(s, FeatureSequence) else np.asarray(s, dtype=np.float64)
    if len(values) == 0:
        raise DataError("empty feature sequence")
    return values.mean(axis=0)
