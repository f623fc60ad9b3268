"""Seeded synthetic corpora whose two classes differ only in correlation dynamics.

The "stable" class (written to manifests as ``control``) draws every frame
from one fixed correlation structure. The "drifting" class (``depressed``)
starts from the same structure but its correlation factor is rotated by a
small random angle every ``drift_block`` frames. Per-dimension means and
variances are identical in both classes, so averaged feature vectors carry
no class information.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy import signal as sps
from scipy.linalg import expm

from .audio_io import CONTROL, DEPRESSED, CorpusManifest, RecordingEntry, Waveform, \
    compute_priors, validate_entries, write_manifest, write_wav
from .dsp_features import N_FEATURES, FeatureSequence
from .errors import InvalidParams
from .formats import write_feature_cache

STABLE = "stable"
DRIFTING = "drifting"
_CLASS_ALIASES = {STABLE: STABLE, CONTROL: STABLE, DRIFTING: DRIFTING, DEPRESSED: DRIFTING}

WAVE_RATE = 16000


@dataclass(frozen=True)
class SynthParams:
    n_per_class: int = 20
    duration_stable_s: float = 52.9
    duration_drifting_s: float = 47.4
    duration_spread_s: float = 5.0
    min_duration_s: float = 10.0
    n_factors: int = 4  # latent factors behind the shared correlation structure
    structure_seed: int = 1234
    drift_rate: float = 0.2  # radians per drift block
    drift_block: int = 50  # frames
    max_L: int = 500
    seed: int = 0

    def validate(self) -> None:
        if self.n_per_class < 1:
            raise InvalidParams("n_per_class must be >= 1")
        if self.drift_rate < 0:
            raise InvalidParams("drift_rate must be >= 0")
        if self.drift_block < 1:
            raise InvalidParams("drift_block must be >= 1")
        if self.duration_spread_s < 0 or self.n_factors < 1:
            raise InvalidParams("bad duration spread or factor count")
        if self.min_duration_s * 100 <= self.max_L:
            raise InvalidParams(
                f"min duration {self.min_duration_s}s does not cover L={self.max_L} frames")


def _klass(cls: str) -> str:
    try:
        return _CLASS_ALIASES[cls]
    except KeyError:
        raise InvalidParams(f"unknown synthetic class {cls!r}") from None


def base_structure(p: SynthParams, dim: int = N_FEATURES):
    """Shared (correlation factor, means, stds) derived from ``structure_seed``."""
    rng = np.random.default_rng(p.structure_seed)
    loadings = rng.normal(size=(dim, p.n_factors))
    cov = loadings @ loadings.T + np.diag(rng.uniform(0.3, 1.0, dim))
    d = np.sqrt(np.diag(cov))
    corr = cov / np.outer(d, d)
    w, v = np.linalg.eigh(corr)
    factor = v * np.sqrt(np.maximum(w, 0.0))
    means = rng.normal(0.0, 2.0, dim)
    stds = rng.uniform(0.5, 3.0, dim)
    return factor, means, stds


def _duration(rng, cls: str, p: SynthParams) -> float:
    mean = p.duration_stable_s if cls == STABLE else p.duration_drifting_s
    return max(p.min_duration_s, rng.normal(mean, p.duration_spread_s))


def _small_rotation(rng, dim: int, angle: float) -> np.ndarray:
    k = rng.standard_normal((dim, dim))
    k = k - k.T
    k *= angle / np.linalg.norm(k, 2)
    return expm(k)


def generate_feature_recording(cls: str, p: SynthParams, recording_id: str = "") -> FeatureSequence:
    """32-dim Gaussian frames, ~100 per second of ``duration``.

    The random stream depends on ``p.seed`` and the class only.
    """
    p.validate()
    cls = _klass(cls)
    rng = np.random.default_rng([p.seed, 0 if cls == STABLE else 1])
    factor, means, stds = base_structure(p)
    dim = len(means)
    n = int(round(_duration(rng, cls, p) * 100))
    drift = p.drift_rate if cls == DRIFTING else 0.0
    out = np.empty((n, dim))
    rot = np.eye(dim)
    for start in range(0, n, p.drift_block):
        a = rot @ factor
        unit = a / np.sqrt(np.sum(a * a, axis=1))[:, None]  # rows -> unit variance
        m = min(p.drift_block, n - start)
        out[start:start + m] = rng.standard_normal((m, dim)) @ unit.T
        if drift > 0:
            rot = rot @ _small_rotation(rng, dim, drift)
    # The sample mean of drifting frames has a flatter covariance than that of
    # stable frames, which a linear model on mean vectors can pick up. Replace
    # it with a draw from the stable-class distribution at a class-independent
    # reference length; a constant shift leaves every windowed correlation
    # unchanged.
    base = factor / np.sqrt(np.sum(factor * factor, axis=1))[:, None]
    n_ref = 50.0 * (p.duration_stable_s + p.duration_drifting_s)
    offset = rng.standard_normal(dim) @ base.T / np.sqrt(n_ref)
    out += offset - out.mean(axis=0)
    return FeatureSequence(means + stds * out, recording_id)


def _smooth_noise(rng, n_ctrl: int, cutoff: float = 0.02) -> np.ndarray:
    b, a = sps.butter(2, cutoff)
    z = sps.lfilter(b, a, rng.standard_normal(n_ctrl + 200))[200:]
    return (z - z.mean()) / (z.std() + 1e-12)


def generate_wave_recording(cls: str, p: SynthParams, recording_id: str = "") -> Waveform:
    """Harmonic source with an F0 ramp (100-250 Hz) plus shaped noise.

    Amplitude and pitch share a slow modulator. For the stable class the
    coupling weight is fixed; for the drifting class it performs a random
    walk (step ``drift_rate`` per ``drift_block`` control frames).
    """
    p.validate()
    cls = _klass(cls)
    rng = np.random.default_rng([p.seed, 2 if cls == STABLE else 3])
    duration = _duration(rng, cls, p)
    n = int(round(duration * WAVE_RATE))
    ctrl_rate = 100
    n_ctrl = int(np.ceil(duration * ctrl_rate)) + 2
    shared = _smooth_noise(rng, n_ctrl)
    own_a = _smooth_noise(rng, n_ctrl)
    own_p = _smooth_noise(rng, n_ctrl)
    if cls == STABLE:
        beta = np.full(n_ctrl, 0.8)
    else:
        steps = rng.normal(0.0, p.drift_rate * 4, n_ctrl // p.drift_block + 1)
        walk = 0.8 + np.cumsum(steps)
        beta = np.clip(np.repeat(walk, p.drift_block)[:n_ctrl], -0.95, 0.95)
    gamma = np.sqrt(1.0 - beta ** 2)
    amp_mod = beta * shared + gamma * own_a
    pitch_mod = 0.8 * shared + 0.6 * own_p

    t_ctrl = np.arange(n_ctrl) / ctrl_rate
    ramp_period = 3.0
    phase = (t_ctrl / ramp_period) % 1.0
    tri = 1.0 - np.abs(2.0 * phase - 1.0)
    f0_ctrl = np.clip(100.0 + 150.0 * tri + 8.0 * pitch_mod, 100.0, 250.0)
    amp_ctrl = np.clip(0.5 + 0.15 * amp_mod, 0.1, 0.9)

    t = np.arange(n) / WAVE_RATE
    f0 = np.interp(t, t_ctrl, f0_ctrl)
    amp = np.interp(t, t_ctrl, amp_ctrl)
    phi = 2.0 * np.pi * np.cumsum(f0) / WAVE_RATE
    voice = sum(np.sin(h * phi) / h for h in range(1, 9))
    b, a = sps.butter(2, 3000.0 / (WAVE_RATE / 2))
    noise = sps.lfilter(b, a, rng.standard_normal(n))
    x = amp * voice + 0.02 * noise
    x *= 0.8 / np.max(np.abs(x))
    # 16-bit grid, so a WAV round trip is lossless
    x = np.round(x * 32768.0) / 32768.0
    return Waveform(x, WAVE_RATE)


def corpus_entries(p: SynthParams, k: int = 5, mode: str = "features") -> list[RecordingEntry]:
    """One speaker per recording; recording ``i`` of each class goes to fold ``i % k``."""
    if k < 2 or p.n_per_class < k:
        raise InvalidParams(f"need k >= 2 and n_per_class >= k (got k={k})")
    ext = "andrf" if mode == "features" else "wav"
    sub = "features" if mode == "features" else "audio"
    entries = []
    n = 0
    for i in range(p.n_per_class):
        for label in (CONTROL, DEPRESSED):
            rid = f"syn{n:03d}"
            entries.append(RecordingEntry(rid, f"spk{n:03d}", label, i % k, f"{sub}/{rid}.{ext}"))
            n += 1
    return entries


def recording_params(p: SynthParams, index: int) -> SynthParams:
    """Per-recording parameters: an independent stream split from the corpus seed."""
    child = np.random.SeedSequence([p.seed, index]).generate_state(1, dtype=np.uint32)[0]
    return replace(p, seed=int(child))


def generate_recordings(p: SynthParams, k: int = 5, mode: str = "features"):
    """Yield ``(entry, FeatureSequence | Waveform)`` in manifest order."""
    make = generate_feature_recording if mode == "features" else generate_wave_recording
    for idx, e in enumerate(corpus_entries(p, k, mode)):
        yield e, make(e.label, recording_params(p, idx), e.id)


def generate_corpus(p: SynthParams, out_dir, k: int = 5, mode: str = "features") -> CorpusManifest:
    """Write ``manifest.csv`` plus feature caches or WAV files under ``out_dir``."""
    if mode not in ("features", "wave"):
        raise InvalidParams(f"mode must be 'features' or 'wave', got {mode!r}")
    p.validate()
    out_dir = Path(out_dir)
    (out_dir / ("features" if mode == "features" else "audio")).mkdir(parents=True, exist_ok=True)
    entries = []
    for e, data in generate_recordings(p, k, mode):
        if mode == "features":
            write_feature_cache(out_dir / e.audio_path, data)
        else:
            write_wav(out_dir / e.audio_path, data)
        entries.append(e)
    k_found = validate_entries(entries)
    write_manifest(out_dir / "manifest.csv", entries)
    return CorpusManifest(entries, k_found, compute_priors(entries), out_dir)
