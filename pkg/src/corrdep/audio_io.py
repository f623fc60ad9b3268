"""Audio decoding, resampling and corpus manifests."""
from __future__ import annotations

import csv
import struct
import wave
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .errors import (
    EmptyAudio,
    InvalidManifest,
    MalformedHeader,
    MissingAudio,
    RateTooLow,
    SpeakerFoldViolation,
    UnknownLabel,
    UnsupportedEncoding,
)

CONTROL = "control"
DEPRESSED = "depressed"
LABELS = (CONTROL, DEPRESSED)

CANONICAL_RATE = 16000
MIN_TARGET_RATE = 2000
TAPS_PER_PHASE = 64

MANIFEST_COLUMNS = ["id", "speaker_id", "label", "fold", "audio_path"]

_FMT_PCM = 0x0001
_FMT_FLOAT = 0x0003
_FMT_EXTENSIBLE = 0xFFFE


@dataclass
class Waveform:
    samples: np.ndarray
    sample_rate: int

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


def _parse_fmt(chunk: bytes):
    if len(chunk) < 16:
        raise MalformedHeader("fmt chunk shorter than 16 bytes")
    tag, channels, rate, _, block_align, bits = struct.unpack("<HHIIHH", chunk[:16])
    if tag == _FMT_EXTENSIBLE:
        if len(chunk) < 40:
            raise MalformedHeader("truncated WAVE_FORMAT_EXTENSIBLE header")
        # first two bytes of the SubFormat GUID carry the real format tag
        tag = struct.unpack("<H", chunk[24:26])[0]
    return tag, channels, rate, block_align, bits


def _decode(raw: bytes, tag: int, channels: int, bits: int) -> np.ndarray:
    if tag == _FMT_PCM:
        if bits == 8:
            x = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
        elif bits == 16:
            x = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
        elif bits == 24:
            b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
            v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
            v = np.where(v >= 1 << 23, v - (1 << 24), v)
            x = v.astype(np.float64) / float(1 << 23)
        elif bits == 32:
            x = np.frombuffer(raw, dtype="<i4").astype(np.float64) / float(1 << 31)
        else:
            raise UnsupportedEncoding(f"{bits}-bit integer PCM")
    elif tag == _FMT_FLOAT:
        if bits == 32:
            x = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        elif bits == 64:
            x = np.frombuffer(raw, dtype="<f8").astype(np.float64)
        else:
            raise UnsupportedEncoding(f"{bits}-bit float")
        x = np.clip(np.nan_to_num(x), -1.0, 1.0)
    else:
        raise UnsupportedEncoding(f"format tag 0x{tag:04x} is not linear PCM")
    return x.reshape(-1, channels)


def load_wav(path) -> Waveform:
    """Read a RIFF/WAVE file as mono float samples in [-1, 1].

    Integer PCM (8/16/24/32 bit) and IEEE float data are accepted; stereo is
    averaged down to one channel.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedHeader(f"{path}: not a RIFF/WAVE file")
    fmt = None
    raw = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        size = struct.unpack("<I", data[pos + 4:pos + 8])[0]
        body = data[pos + 8:pos + 8 + size]
        if cid == b"fmt ":
            fmt = _parse_fmt(body)
        elif cid == b"data":
            raw = body
        pos += 8 + size + (size & 1)
    if fmt is None or raw is None:
        raise MalformedHeader(f"{path}: missing fmt or data chunk")
    tag, channels, rate, block_align, bits = fmt
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"{channels} channels")
    if rate <= 0 or block_align != channels * ((bits + 7) // 8):
        raise MalformedHeader(f"{path}: inconsistent fmt chunk")
    n_frames = len(raw) // block_align
    if n_frames == 0:
        raise EmptyAudio(f"{path}: zero frames")
    x = _decode(raw[:n_frames * block_align], tag, channels, bits)
    return Waveform(x.mean(axis=1) if channels > 1 else x[:, 0].copy(), int(rate))


def write_wav(path, w: Waveform) -> None:
    """Write 16-bit mono PCM; the inverse of ``load_wav`` on the 16-bit grid."""
    q = np.clip(np.round(np.asarray(w.samples) * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(int(w.sample_rate))
        fh.writeframes(q.tobytes())


def resample(w: Waveform, target_rate: int) -> Waveform:
    """Polyphase windowed-sinc resampling.

    The lowpass prototype has ``TAPS_PER_PHASE`` taps per polyphase branch
    and cuts off at the lower of the two Nyquist frequencies.
    """
    target_rate = int(target_rate)
    if target_rate < MIN_TARGET_RATE:
        raise RateTooLow(f"target rate {target_rate} Hz < {MIN_TARGET_RATE} Hz")
    if target_rate == w.sample_rate:
        return w
    ratio = Fraction(target_rate, w.sample_rate)
    up, down = ratio.numerator, ratio.denominator
    n_taps = TAPS_PER_PHASE * max(up, down) + 1
    h = sps.firwin(n_taps, 1.0 / max(up, down), window=("kaiser", 8.0))
    y = sps.resample_poly(np.asarray(w.samples, dtype=np.float64), up, down, window=h)
    n_out = int(round(len(w.samples) * up / down))
    if len(y) < n_out:
        y = np.concatenate([y, np.zeros(n_out - len(y))])
    return Waveform(np.clip(y[:n_out], -1.0, 1.0), target_rate)


def load_audio(path, rate: int = CANONICAL_RATE) -> Waveform:
    return resample(load_wav(path), rate)


@dataclass(frozen=True)
class RecordingEntry:
    id: str
    speaker_id: str
    label: str
    fold: int
    audio_path: str

    @property
    def y(self) -> int:
        return int(self.label == DEPRESSED)


@dataclass
class CorpusManifest:
    entries: list[RecordingEntry]
    k: int
    priors: dict = field(default_factory=dict)
    root: Path = Path(".")

    @property
    def p_control(self) -> float:
        return self.priors[CONTROL]

    @property
    def p_depressed(self) -> float:
        return self.priors[DEPRESSED]

    def fold(self, f: int) -> list[RecordingEntry]:
        return [e for e in self.entries if e.fold == f]

    def resolve(self, entry: RecordingEntry) -> Path:
        p = Path(entry.audio_path)
        return p if p.is_absolute() else self.root / p


def compute_priors(entries) -> dict:
    n = len(entries)
    n_d = sum(e.label == DEPRESSED for e in entries)
    return {CONTROL: (n - n_d) / n, DEPRESSED: n_d / n}


def validate_entries(entries: list[RecordingEntry]) -> int:
    """Check the manifest invariants and return the fold count."""
    if not entries:
        raise InvalidManifest("manifest has no entries")
    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        raise InvalidManifest("duplicate recording ids")
    speaker_fold: dict[str, int] = {}
    for e in entries:
        if e.label not in LABELS:
            raise UnknownLabel(f"{e.id}: label {e.label!r}")
        prev = speaker_fold.setdefault(e.speaker_id, e.fold)
        if prev != e.fold:
            raise SpeakerFoldViolation(
                f"speaker {e.speaker_id} appears in folds {prev} and {e.fold}")
    folds = sorted({e.fold for e in entries})
    k = folds[-1] + 1
    if folds[0] < 0 or folds != list(range(k)):
        raise InvalidManifest(f"folds must be 0..k-1 without gaps, got {folds}")
    for f in range(k):
        labels = {e.label for e in entries if e.fold == f}
        if labels != set(LABELS):
            raise InvalidManifest(f"fold {f} lacks one of the two classes")
    return k


def load_manifest(path, check_audio: bool = True) -> CorpusManifest:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, quoting=csv.QUOTE_NONE))
    if not rows or [c.strip() for c in rows[0]] != MANIFEST_COLUMNS:
        raise InvalidManifest(f"{path}: header must be {','.join(MANIFEST_COLUMNS)}")
    entries = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(MANIFEST_COLUMNS):
            raise InvalidManifest(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
        rid, spk, label, fold, audio = (c.strip() for c in row)
        try:
            fold_i = int(fold)
        except ValueError:
            raise InvalidManifest(f"{path}:{lineno}: fold {fold!r} is not an integer") from None
        entries.append(RecordingEntry(rid, spk, label, fold_i, audio))
    k = validate_entries(entries)
    manifest = CorpusManifest(entries, k, compute_priors(entries), path.parent)
    if check_audio:
        for e in entries:
            if not manifest.resolve(e).exists():
                raise MissingAudio(f"{e.id}: {manifest.resolve(e)} not found")
    return manifest


def write_manifest(path, entries) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(MANIFEST_COLUMNS) + "\n")
        for e in entries:
            fh.write(f"{e.id},{e.speaker_id},{e.label},{e.fold},{e.audio_path}\n")
