"""Speaker-disjoint k-fold protocol, metrics, random baseline, L sweep and timing.

An approach is an object with three methods:

* ``represent(entry, features)`` - fold-independent per-recording input,
  computed once per recording;
* ``fit(reps, y, seed)`` - train on the training folds;
* ``predict(model, reps)`` - ``(labels, scores)`` with 1 = depressed.

The four configurations compared in the experiments are ``BL1`` (SVM on
the mean feature vector), ``Approach1`` (SVM on the mean correlation
matrix), ``BL2`` (LSTM on 128-frame subsequences + majority vote) and
``Approach2`` (LSTM with a 496->32 projection on the matrix sequence).
"""
from __future__ import annotations

import logging
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .audio_io import CONTROL, DEPRESSED, CorpusManifest, load_audio
from .config import ExperimentConfig
from .corr_repr import average_matrix, corr_sequence, mean_feature_vector
from .dsp_features import extract_features
from .errors import (DataError, FoldEmpty, InvalidPriors, LengthMismatch, OddL,
                     PerfectBaseline)
from .formats import read_feature_cache, write_feature_cache
from .models import lstm as lstm_mod
from .models.svm import fit_standardizer, svm_train
from .models.voting import majority_vote, split_subsequences

log = logging.getLogger(__name__)

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")
CLI_NAMES = {"bl1": "BL1", "app1": "Approach1", "bl2": "BL2", "app2": "Approach2"}


def _as_int_labels(labels) -> np.ndarray:
    out = []
    for v in labels:
        if isinstance(v, str):
            if v not in (CONTROL, DEPRESSED):
                raise DataError(f"unknown label {v!r}")
            out.append(int(v == DEPRESSED))
        else:
            out.append(int(v))
    return np.asarray(out, dtype=int)


@dataclass
class Metrics:
    """Percentages; depressed is the positive class."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    undefined: tuple = ()

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def as_dict(self) -> dict:
        return {m: getattr(self, m) for m in METRIC_NAMES}


def metrics_from_counts(tp: int, fp: int, tn: int, fn: int) -> Metrics:
    n = tp + fp + tn + fn
    undefined = []
    if tp + fp:
        precision = 100.0 * tp / (tp + fp)
    else:
        precision = 0.0
        undefined.append("precision")
    if tp + fn:
        recall = 100.0 * tp / (tp + fn)
    else:
        recall = 0.0
        undefined.append("recall")
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Metrics(100.0 * (tp + tn) / n, precision, recall, f1, tp, fp, tn, fn, tuple(undefined))


def compute_metrics(preds, truth) -> Metrics:
    p = _as_int_labels(preds)
    t = _as_int_labels(truth)
    if len(p) != len(t) or len(p) == 0:
        raise LengthMismatch(f"{len(p)} predictions vs {len(t)} labels")
    tp = int(np.sum((p == 1) & (t == 1)))
    fp = int(np.sum((p == 1) & (t == 0)))
    tn = int(np.sum((p == 0) & (t == 0)))
    fn = int(np.sum((p == 0) & (t == 1)))
    return metrics_from_counts(tp, fp, tn, fn)


def random_baseline(p_control: float, p_depressed: float) -> Metrics:
    """Guessing each class with its prior probability.

    Expected accuracy is ``p(c)^2 + p(d)^2``; precision, recall and F1 of
    the depressed class all equal ``p(d)``.
    """
    if min(p_control, p_depressed) < 0 or not math.isclose(p_control + p_depressed, 1.0, abs_tol=1e-9):
        raise InvalidPriors(f"priors ({p_control}, {p_depressed}) must be >= 0 and sum to 1")
    pd = 100.0 * p_depressed
    return Metrics(100.0 * (p_control ** 2 + p_depressed ** 2), pd, pd, pd)


def relative_error_reduction(base, improved) -> float:
    """Percentage of the baseline's error rate removed by the improved model."""
    a = base.accuracy if isinstance(base, Metrics) else float(base)
    b = improved.accuracy if isinstance(improved, Metrics) else float(improved)
    if not (0 < a <= 100 and 0 < b <= 100):
        raise DataError("accuracies must lie in (0, 100]")
    if a == 100:
        raise PerfectBaseline("baseline has zero error")
    return 100.0 * ((100.0 - a) - (100.0 - b)) / (100.0 - a)


@dataclass
class MetricsReport:
    approach: str
    L: int | None
    runs: list  # one pooled Metrics per repetition
    train_seconds: list = field(default_factory=list)  # per (rep, fold)
    fold_runs: list = field(default_factory=list)  # per rep: list of per-fold Metrics
    best_L: bool = False

    @property
    def R(self) -> int:
        return len(self.runs)

    def values(self, metric: str) -> np.ndarray:
        return np.array([getattr(m, metric) for m in self.runs], dtype=np.float64)

    def mean(self, metric: str) -> float:
        return float(self.values(metric).mean())

    def std(self, metric: str) -> float:
        v = self.values(metric)
        return float(v.std(ddof=1)) if len(v) > 1 else 0.0

    def sem(self, metric: str) -> float:
        return self.std(metric) / math.sqrt(self.R)


# --- approaches -----------------------------------------------------------

def _stack_standardizer(blocks):
    return fit_standardizer(np.concatenate(blocks, axis=0))


class SVMApproach:
    def __init__(self, name: str, L: int | None, C: float):
        self.name, self.L, self.C = name, L, C

    def represent(self, entry, features):
        if self.name == "BL1":
            return mean_feature_vector(features)
        return average_matrix(corr_sequence(features, self.L))

    def fit(self, reps, y, seed):
        return svm_train(np.vstack(reps), y, self.C)

    def predict(self, model, reps):
        scores = model.decision_function(np.vstack(reps))
        return (scores >= 0).astype(int), scores


class LSTMApproach:
    def __init__(self, name: str, L: int | None, cfg: ExperimentConfig):
        self.name, self.L, self.cfg = name, L, cfg

    @property
    def project(self) -> bool:
        return self.name == "Approach2"

    def represent(self, entry, features):
        if self.project:
            return corr_sequence(features, self.L).flat()
        return np.asarray(features, dtype=np.float64)

    def _inputs(self, rep, mean, scale):
        z = (rep - mean) / scale
        if self.project:
            return [z]
        return split_subsequences(z, self.cfg.subseq_len)

    def fit(self, reps, y, seed):
        mean, scale = _stack_standardizer(reps)
        seqs, labels = [], []
        for rep, lab in zip(reps, y):
            chunks = self._inputs(rep, mean, scale)
            seqs.extend(chunks)
            labels.extend([lab] * len(chunks))
        tcfg = replace(self.cfg.train, seed=seed)
        model = lstm_mod.lstm_train(tcfg, seqs, labels, project=self.project)
        return model, mean, scale

    def predict(self, fitted, reps):
        model, mean, scale = fitted
        labels, scores = [], []
        for rep in reps:
            probs = lstm_mod.predict_proba(model, self._inputs(rep, mean, scale))[:, 1]
            if self.project:
                labels.append(int(probs[0] >= 0.5))
                scores.append(float(probs[0]))
            else:
                votes = (probs >= 0.5).astype(int)
                labels.append(majority_vote(votes, probs))
                scores.append(float(probs.mean()))
        return np.array(labels), np.array(scores)


def make_approach(name: str, L: int | None = None, cfg: ExperimentConfig | None = None):
    cfg = cfg or ExperimentConfig()
    name = CLI_NAMES.get(name, name)
    if name in ("Approach1", "Approach2"):
        if L is None or L < 2 or L % 2:
            raise OddL(f"{name} needs an even L, got {L}")
    else:
        L = None
    if name in ("BL1", "Approach1"):
        return SVMApproach(name, L, cfg.C)
    if name in ("BL2", "Approach2"):
        return LSTMApproach(name, L, cfg)
    raise DataError(f"unknown approach {name!r}")


# --- data -------------------------------------------------------------------

def load_corpus_features(manifest: CorpusManifest, cache_dir=None,
                         voicing_threshold: float = 0.45) -> dict:
    """Feature matrices keyed by recording id.

    Entries whose path is an ``.andrf`` feature cache are read directly.
    Audio entries are decoded, resampled to 16 kHz and extracted, reusing
    ``cache_dir/<id>.andrf`` when present and writing it otherwise.
    """
    cache_dir = Path(cache_dir) if cache_dir else None
    out = {}
    for e in manifest.entries:
        path = manifest.resolve(e)
        cached = cache_dir / f"{e.id}.andrf" if cache_dir else None
        if path.suffix == ".andrf":
            fs = read_feature_cache(path)
        elif cached is not None and cached.exists():
            fs = read_feature_cache(cached)
        else:
            fs = extract_features(load_audio(path), e.id, voicing_threshold)
            if cached is not None:
                cache_dir.mkdir(parents=True, exist_ok=True)
                write_feature_cache(cached, fs)
        out[e.id] = fs.values
    return out


# --- protocol ---------------------------------------------------------------

def check_speaker_disjoint(train, test) -> None:
    overlap = {e.speaker_id for e in train} & {e.speaker_id for e in test}
    if overlap:
        raise DataError(f"speakers in both train and test: {sorted(overlap)}")


def _run_cell(approach, reps, train, test, seed):
    t0 = time.perf_counter()
    model = approach.fit([reps[e.id] for e in train], np.array([e.y for e in train]), seed)
    elapsed = time.perf_counter() - t0
    labels, _ = approach.predict(model, [reps[e.id] for e in test])
    return np.asarray(labels, dtype=int), elapsed


def run_protocol(approach, manifest: CorpusManifest, data: dict, R: int = 10,
                 seed_base: int = 0, jobs: int = 1, pooling: str = "pooled") -> MetricsReport:
    """Train on k-1 folds, test on the held-out fold, for every fold and repetition.

    Repetition ``r`` uses seed ``seed_base + r``. With ``pooling="pooled"``
    the test predictions of all folds form a single confusion table per
    repetition; ``"macro"`` averages per-fold metrics instead.
    """
    if pooling not in ("pooled", "macro"):
        raise DataError(f"pooling must be 'pooled' or 'macro', got {pooling!r}")
    reps = {e.id: approach.represent(e, data.get(e.id)) for e in manifest.entries}
    cells = []
    for r in range(R):
        for f in range(manifest.k):
            test = manifest.fold(f)
            train = [e for e in manifest.entries if e.fold != f]
            if not test or not train:
                raise FoldEmpty(f"fold {f} leaves an empty partition")
            check_speaker_disjoint(train, test)
            cells.append((r, f, train, test))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_cell, approach, reps, tr, te, seed_base + r)
                       for r, f, tr, te in cells]
            results = [fu.result() for fu in futures]
    else:
        results = [_run_cell(approach, reps, tr, te, seed_base + r) for r, f, tr, te in cells]

    runs, fold_runs, seconds = [], [], []
    for r in range(R):
        preds, truth, per_fold = [], [], []
        for (rr, f, tr, te), (labels, elapsed) in zip(cells, results):
            if rr != r:
                continue
            y = [e.y for e in te]
            preds.extend(labels)
            truth.extend(y)
            per_fold.append(compute_metrics(labels, y))
            seconds.append(elapsed)
        pooled = compute_metrics(preds, truth)
        if pooled.n != len(manifest.entries):
            raise DataError("pooled predictions do not cover the corpus")
        if pooling == "macro":
            avg = {m: float(np.mean([getattr(x, m) for x in per_fold])) for m in METRIC_NAMES}
            pooled = replace(pooled, **avg)
        runs.append(pooled)
        fold_runs.append(per_fold)
        log.info("%s L=%s rep %d: acc %.1f f1 %.1f", approach.name, approach.L, r,
                 pooled.accuracy, pooled.f1)
    return MetricsReport(approach.name, approach.L, runs, seconds, fold_runs)


def sweep_L(name: str, manifest: CorpusManifest, data: dict, grid, cfg: ExperimentConfig,
            R: int = 10, jobs: int = 1, pooling: str = "pooled") -> list[MetricsReport]:
    """One report per L; the L with the best mean accuracy is flagged."""
    grid = list(grid)
    if not grid:
        raise DataError("empty L grid")
    reports = [run_protocol(make_approach(name, L, cfg), manifest, data, R, cfg.seed, jobs, pooling)
               for L in grid]
    best = max(range(len(reports)), key=lambda i: reports[i].mean("accuracy"))
    reports[best].best_L = True
    return reports


def sweep_table(reports) -> list[tuple[int, float, float]]:
    """Plot-ready ``(L, mean F1, standard error of the mean)`` rows."""
    return [(r.L, r.mean("f1"), r.sem("f1")) for r in reports]


def hardware_descriptor() -> str:
    return (f"{platform.system()} {platform.machine()} "
            f"{platform.processor() or 'unknown-cpu'} cpus={os.cpu_count()} "
            f"python={platform.python_version()} numpy={np.__version__}")


@dataclass
class TimingReport:
    approach: str
    L: int | None
    fold_seconds: list
    hardware: str

    @property
    def mean_seconds(self) -> float:
        return float(np.mean(self.fold_seconds))


def timing_report(approach, manifest: CorpusManifest, data: dict, seed: int = 0,
                  folds=None) -> TimingReport:
    """Wall-clock training time per fold (single repetition, serial)."""
    reps = {e.id: approach.represent(e, data.get(e.id)) for e in manifest.entries}
    folds = range(manifest.k) if folds is None else folds
    seconds = []
    for f in folds:
        train = [e for e in manifest.entries if e.fold != f]
        t0 = time.perf_counter()
        approach.fit([reps[e.id] for e in train], np.array([e.y for e in train]), seed)
        seconds.append(time.perf_counter() - t0)
    return TimingReport(approach.name, approach.L, seconds, hardware_descriptor())


# --- report files -----------------------------------------------------------

def _fmt_L(L) -> str:
    return "NA" if L is None else str(L)


def report_rows(reports) -> list[str]:
    rows = ["approach\tL\tmetric\tmean\tstd"]
    for rep in reports:
        for m in METRIC_NAMES:
            rows.append(f"{rep.approach}\t{_fmt_L(rep.L)}\t{m}\t{rep.mean(m):.4f}\t{rep.std(m):.4f}")
    return rows


def write_report(path, reports) -> None:
    Path(path).write_text("\n".join(report_rows(reports)) + "\n", encoding="utf-8")


def write_runs(path, reports) -> None:
    """Raw per-repetition values, for significance tests done elsewhere."""
    lines = ["approach\tL\trep\taccuracy\tprecision\trecall\tf1\ttp\tfp\ttn\tfn"]
    for rep in reports:
        for r, m in enumerate(rep.runs):
            lines.append(f"{rep.approach}\t{_fmt_L(rep.L)}\t{r}\t{m.accuracy:.4f}\t{m.precision:.4f}"
                         f"\t{m.recall:.4f}\t{m.f1:.4f}\t{m.tp}\t{m.fp}\t{m.tn}\t{m.fn}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_sweep_plot_data(path, reports) -> None:
    lines = [f"{L}\t{mean:.4f}\t{sem:.4f}" for L, mean, sem in sweep_table(reports)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
