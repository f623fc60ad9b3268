"""Stability of correlation structure over time, compared between groups."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .audio_io import CONTROL, DEPRESSED
from .corr_repr import CorrSequence, corr_sequence
from .errors import EmptyGroup, LengthMismatch, TooFewMatrices, TooShort

log = logging.getLogger(__name__)


@dataclass
class StabilityScore:
    recording_id: str
    L: int
    mean_rho: float
    T_pairs: int
    label: str = ""


@dataclass
class GroupComparison:
    L: int
    control_mean: float
    depressed_mean: float
    t_statistic: float
    p_value: float
    p_adjusted: float
    n_control: int = 0
    n_depressed: int = 0


def spearman(u, v) -> float:
    """Rank correlation with average ranks for ties; 0 if either input is constant."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise LengthMismatch(f"lengths {u.shape} and {v.shape} differ")
    if len(u) < 2:
        raise TooShort("spearman needs at least two values")
    ru = stats.rankdata(u) - (len(u) + 1) / 2.0
    rv = stats.rankdata(v) - (len(v) + 1) / 2.0
    den = np.sqrt((ru @ ru) * (rv @ rv))
    if den == 0:
        return 0.0
    return float(np.clip((ru @ rv) / den, -1.0, 1.0))


def consecutive_stability(cs: CorrSequence, label: str = "") -> StabilityScore:
    flat = cs.flat()
    if len(flat) < 2:
        raise TooFewMatrices(f"{cs.recording_id}: {len(flat)} matrix, need 2")
    rhos = [spearman(flat[k], flat[k + 1]) for k in range(len(flat) - 1)]
    return StabilityScore(cs.recording_id, cs.L, float(np.mean(rhos)), len(rhos), label)


def stability_scores(manifest, data: dict, L: int) -> list[StabilityScore]:
    """Scores for every recording; those with fewer than two windows are skipped."""
    out = []
    for e in manifest.entries:
        try:
            cs = corr_sequence(data[e.id], L)
            cs.recording_id = e.id
            out.append(consecutive_stability(cs, e.label))
        except (TooFewMatrices, TooShort) as err:
            log.warning("excluded from marker analysis: %s", err)
    return out


def benjamini_hochberg(p) -> np.ndarray:
    """Step-up FDR adjustment, returned in the input order."""
    p = np.asarray(p, dtype=np.float64)
    m = len(p)
    order = np.argsort(p)
    scaled = p[order] * m / np.arange(1, m + 1)
    adj = np.minimum.accumulate(scaled[::-1])[::-1]
    out = np.empty(m)
    out[order] = np.minimum(adj, 1.0)
    return out


def welch_t(a, b):
    res = stats.ttest_ind(np.asarray(a, float), np.asarray(b, float), equal_var=False)
    t, p = float(res.statistic), float(res.pvalue)
    if not np.isfinite(t):  # both groups constant
        t, p = (0.0, 1.0) if np.mean(a) == np.mean(b) else (np.sign(np.mean(a) - np.mean(b)) * np.inf, 0.0)
    return t, p


def group_compare(scores_by_L: dict) -> list[GroupComparison]:
    """Welch t-test per L, BH-adjusted across the L values given.

    ``scores_by_L`` maps L to a list of StabilityScore carrying labels.
    """
    rows = []
    for L, scores in scores_by_L.items():
        c = [s.mean_rho for s in scores if s.label == CONTROL]
        d = [s.mean_rho for s in scores if s.label == DEPRESSED]
        if not c or not d:
            raise EmptyGroup(f"L={L}: {len(c)} control vs {len(d)} depressed scores")
        t, p = welch_t(c, d)
        rows.append(GroupComparison(L, float(np.mean(c)), float(np.mean(d)), t, p, p, len(c), len(d)))
    adj = benjamini_hochberg([r.p_value for r in rows])
    for r, a in zip(rows, adj):
        r.p_adjusted = float(max(a, r.p_value))
    return rows


def compare_groups(control, depressed, L: int | None = None) -> GroupComparison:
    """Single-L convenience wrapper over raw score lists."""
    scores = [StabilityScore("", L, x, 1, CONTROL) for x in control]
    scores += [StabilityScore("", L, x, 1, DEPRESSED) for x in depressed]
    return group_compare({L: scores})[0]


def bar_data(scores: list[StabilityScore]) -> list[StabilityScore]:
    """Per-recording scores sorted from highest to lowest."""
    return sorted(scores, key=lambda s: (-s.mean_rho, s.recording_id))


def write_marker_report(path, scores_by_L: dict, comparisons: list[GroupComparison]) -> None:
    lines = ["recording_id\tL\tmean_rho\tlabel"]
    for L, scores in scores_by_L.items():
        for s in bar_data(scores):
            lines.append(f"{s.recording_id}\t{L}\t{s.mean_rho:.6f}\t{s.label}")
    lines.append("")
    lines.append("L\tcontrol_mean\tdepressed_mean\tt\tp\tp_adj")
    for r in comparisons:
        lines.append(f"{r.L}\t{r.control_mean:.6f}\t{r.depressed_mean:.6f}\t{r.t_statistic:.4f}"
                     f"\t{r.p_value:.6g}\t{r.p_adjusted:.6g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
