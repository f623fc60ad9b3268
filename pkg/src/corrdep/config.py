"""Run configuration and the flat ``key = value`` config-file format."""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import UsageError


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    learning_rate: float = 0.0005
    decay: float = 0.99
    epsilon: float = 1e-8
    batch_size: int = 16
    seed: int = 0
    hidden_size: int = 32
    proj_dim: int = 32

    def __post_init__(self):
        if self.epochs <= 0:
            raise UsageError("epochs must be positive")
        if self.learning_rate <= 0:
            raise UsageError("learning_rate must be positive")
        if self.batch_size <= 0:
            raise UsageError("batch_size must be positive")


@dataclass(frozen=True)
class ExperimentConfig:
    train: TrainConfig = field(default_factory=TrainConfig)
    C: float = 1.0
    voicing_threshold: float = 0.45
    grid: tuple = (100, 200, 300, 400, 500)
    subseq_len: int = 128

    @property
    def seed(self) -> int:
        return self.train.seed


_TRAIN_KEYS = {f.name: f.type for f in fields(TrainConfig)}
_TOP_KEYS = {"C", "voicing_threshold", "grid", "subseq_len"}
_ALIASES = {"lr": "learning_rate"}


def _coerce(key: str, raw: str):
    if key == "grid":
        return tuple(int(v) for v in raw.replace(" ", "").split(",") if v)
    if key in ("epochs", "batch_size", "seed", "hidden_size", "proj_dim", "subseq_len"):
        return int(raw)
    return float(raw)


def parse_config_text(text: str) -> dict:
    out = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {n}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in _TRAIN_KEYS and key not in _TOP_KEYS:
            raise UsageError(f"config line {n}: unknown key {key!r}")
        try:
            out[key] = _coerce(key, raw)
        except ValueError:
            raise UsageError(f"config line {n}: bad value for {key}: {raw!r}") from None
    return out


def build_config(overrides: dict | None = None, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Apply flat overrides (config file first, then CLI flags) to the defaults."""
    cfg = base or ExperimentConfig()
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    train_kw = {k: v for k, v in overrides.items() if k in _TRAIN_KEYS}
    top_kw = {k: v for k, v in overrides.items() if k in _TOP_KEYS}
    return replace(cfg, train=replace(cfg.train, **train_kw), **top_kw)


def load_config(path) -> ExperimentConfig:
    return build_config(parse_config_text(Path(path).read_text(encoding="utf-8")))


def config_items(cfg: ExperimentConfig) -> dict:
    items = {f.name: getattr(cfg.train, f.name) for f in fields(TrainConfig)}
    items.update(C=cfg.C, voicing_threshold=cfg.voicing_threshold,
                 grid=",".join(map(str, cfg.grid)), subseq_len=cfg.subseq_len)
    return items
