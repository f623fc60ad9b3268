"""Frame-level speech descriptors: energy, MFCC 1-12, F0, ZCR, voicing.

All extractors operate on 2-D frame arrays (frames x samples) so a whole
recording is processed in a handful of vectorised calls. Single frames can
be passed as 1-D arrays and come back as scalars / 1-D vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.fft import dct

from .audio_io import Waveform
from .errors import DataError, TooShort

WINDOW_MS = 25.0
HOP_MS = 10.0

PRE_EMPHASIS = 0.97
N_FFT = 512
N_MELS = 26
N_MFCC = 12
LOG_FLOOR = 1e-10

F0_MIN = 50.0
F0_MAX = 500.0
VOICING_THRESHOLD = 0.45
# a peak at a shorter lag wins if it reaches this fraction of the best peak;
# guards against picking a multiple of the true period
OCTAVE_TOLERANCE = 0.9

LLD_NAMES = (
    ["energy"] + [f"mfcc{i}" for i in range(1, N_MFCC + 1)] + ["f0", "zcr", "vp"]
)
FEATURE_NAMES = LLD_NAMES + [f"d_{n}" for n in LLD_NAMES]
N_LLD = len(LLD_NAMES)  # 16
N_FEATURES = len(FEATURE_NAMES)  # 32


@dataclass
class FeatureSequence:
    """Frames x features matrix for one recording (16 LLDs, or 32 with deltas)."""

    values: np.ndarray
    recording_id: str = ""
    frame_hop_ms: float = HOP_MS

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or len(self.values) == 0:
            raise DataError("feature sequence must be a non-empty 2-D array")

    def __len__(self):
        return len(self.values)

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def frame_length(rate: int, ms: float) -> int:
    return int(round(ms * rate / 1000.0))


def frame_count(n_samples: int, window: int, hop: int) -> int:
    if n_samples < window:
        return 0
    return (n_samples - window) // hop + 1


def frame_signal(w: Waveform, window_ms: float = WINDOW_MS, hop_ms: float = HOP_MS) -> np.ndarray:
    """Cut the waveform into overlapping frames.

    Returns a ``(n_frames, window)`` array; frame ``i`` starts at sample
    ``i * hop``. The array is a copy, so frames can be modified freely.
    """
    window = frame_length(w.sample_rate, window_ms)
    hop = frame_length(w.sample_rate, hop_ms)
    x = np.asarray(w.samples, dtype=np.float64)
    if len(x) < window:
        raise TooShort(f"{len(x)} samples is shorter than one {window}-sample window")
    return sliding_window_view(x, window)[::hop].copy()


def rms_energy(frames: np.ndarray):
    frames = np.asarray(frames, dtype=np.float64)
    return np.sqrt(np.mean(frames * frames, axis=-1))


def zcr(frames: np.ndarray, rate: int):
    """Strict sign changes per millisecond; zero samples never count."""
    frames = np.asarray(frames, dtype=np.float64)
    crossings = np.count_nonzero(frames[..., 1:] * frames[..., :-1] < 0, axis=-1)
    return crossings / (frames.shape[-1] * 1000.0 / rate)


def mel(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


def mel_filterbank(rate: int, n_fft: int = N_FFT, n_mels: int = N_MELS,
                   f_low: float = 0.0, f_high: float | None = None) -> np.ndarray:
    """Triangular filters, equally spaced on the mel scale, evaluated at bin centres."""
    f_high = rate / 2.0 if f_high is None else f_high
    edges = mel_to_hz(np.linspace(mel(f_low), mel(f_high), n_mels + 2))
    freqs = np.arange(n_fft // 2 + 1) * rate / n_fft
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs - lo) / (mid - lo)
    falling = (hi - freqs) / (hi - mid)
    return np.maximum(0.0, np.minimum(rising, falling))


def _n_fft(window: int) -> int:
    return max(N_FFT, 1 << (window - 1).bit_length())


def mfcc(frames: np.ndarray, rate: int) -> np.ndarray:
    """MFCC 1..12 (the 0th coefficient is dropped)."""
    frames = np.asarray(frames, dtype=np.float64)
    window = frames.shape[-1]
    n_fft = _n_fft(window)
    emph = frames.copy()
    emph[..., 1:] -= PRE_EMPHASIS * frames[..., :-1]
    emph *= np.hamming(window)
    power = np.abs(np.fft.rfft(emph, n_fft, axis=-1)) ** 2 / n_fft
    energies = power @ mel_filterbank(rate, n_fft).T
    log_mel = np.log(np.maximum(energies, LOG_FLOOR))
    return dct(log_mel, type=2, norm="ortho", axis=-1)[..., 1:N_MFCC + 1]


def normalized_autocorrelation(frames: np.ndarray, max_lag: int) -> np.ndarray:
    """Normalised cross-correlation of each frame with its own lagged copy.

    For lag ``t`` the overlapping parts ``x[:N-t]`` and ``x[t:]`` are
    correlated and divided by the geometric mean of their energies, so a
    periodic frame scores ~1 at its period regardless of the overlap length.
    Frames are mean-removed first. Returns ``(n_frames, max_lag + 1)``.
    """
    x = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    x = x - x.mean(axis=1, keepdims=True)
    n = x.shape[1]
    size = 1 << (2 * n - 1).bit_length()
    spec = np.fft.rfft(x, size, axis=1)
    acf = np.fft.irfft(spec * np.conj(spec), size, axis=1)[:, :max_lag + 1]
    sq = np.concatenate([np.zeros((len(x), 1)), np.cumsum(x * x, axis=1)], axis=1)
    lags = np.arange(max_lag + 1)
    head = sq[:, n - lags]  # energy of x[:n-lag]
    tail = sq[:, -1:] - sq[:, lags]  # energy of x[lag:]
    denom = np.sqrt(head * tail)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(denom > 0, acf / denom, 0.0)
    return np.clip(r, -1.0, 1.0)


def f0_and_voicing(frames: np.ndarray, rate: int, threshold: float = VOICING_THRESHOLD):
    """Autocorrelation pitch estimate and voicing probability per frame.

    The voicing probability is the height of the highest local maximum of
    the normalised autocorrelation over the 50-500 Hz lag band. F0 comes
    from the shortest-lag peak within ``OCTAVE_TOLERANCE`` of that height,
    refined by parabolic interpolation; it is 0 for frames whose voicing
    falls below ``threshold``.
    """
    single = np.ndim(frames) == 1
    x = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    lag_lo = int(np.ceil(rate / F0_MAX))
    lag_hi = int(np.floor(rate / F0_MIN))
    lag_hi = min(lag_hi, x.shape[1] - 2)
    r = normalized_autocorrelation(x, lag_hi + 1)
    mid = r[:, lag_lo:lag_hi + 1]
    left = r[:, lag_lo - 1:lag_hi]
    right = r[:, lag_lo + 1:lag_hi + 2]
    peaks = (mid > left) & (mid >= right) & (mid > 0)
    heights = np.where(peaks, mid, -np.inf)
    best = heights.max(axis=1)
    vp = np.where(np.isfinite(best), np.clip(best, 0.0, 1.0), 0.0)

    ok = peaks & (mid >= OCTAVE_TOLERANCE * best[:, None])
    idx = np.argmax(ok, axis=1)
    rows = np.arange(len(x))
    a, b, c = left[rows, idx], mid[rows, idx], right[rows, idx]
    curv = a - 2.0 * b + c
    with np.errstate(invalid="ignore", divide="ignore"):
        shift = np.where(curv < 0, 0.5 * (a - c) / curv, 0.0)
    lag = lag_lo + idx + np.clip(shift, -0.5, 0.5)
    f0 = np.clip(rate / lag, F0_MIN, F0_MAX)
    f0 = np.where((vp >= threshold) & (vp > 0), f0, 0.0)
    if single:
        return float(f0[0]), float(vp[0])
    return f0, vp


def extract_llds(w: Waveform, recording_id: str = "",
                 voicing_threshold: float = VOICING_THRESHOLD) -> FeatureSequence:
    """16 descriptors per frame: [energy, mfcc1..12, f0, zcr, vp]."""
    frames = frame_signal(w)
    rate = w.sample_rate
    f0, vp = f0_and_voicing(frames, rate, voicing_threshold)
    values = np.column_stack([
        rms_energy(frames),
        mfcc(frames, rate),
        f0,
        zcr(frames, rate),
        vp,
    ])
    return FeatureSequence(values, recording_id)


def append_deltas(s: FeatureSequence) -> FeatureSequence:
    """Append first differences; the first frame's delta is zero."""
    deltas = np.zeros_like(s.values)
    deltas[1:] = s.values[1:] - s.values[:-1]
    return FeatureSequence(np.hstack([s.values, deltas]), s.recording_id, s.frame_hop_ms)


def extract_features(w: Waveform, recording_id: str = "",
                     voicing_threshold: float = VOICING_THRESHOLD) -> FeatureSequence:
    return append_deltas(extract_llds(w, recording_id, voicing_threshold))
