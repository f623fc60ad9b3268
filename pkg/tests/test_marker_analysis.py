import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats
from statsmodels.stats.multitest import multipletests

from corrdep.audio_io import CONTROL, DEPRESSED
from corrdep.corr_repr import CorrSequence, unflatten
from corrdep.errors import EmptyGroup, TooFewMatrices
from corrdep.marker_analysis import (StabilityScore, bar_data, benjamini_hochberg,
                                     compare_groups, consecutive_stability, group_compare,
                                     spearman, stability_scores)


def _avg_ranks(x):
    ranks = []
    for v in x:
        below = sum(1 for w in x if w < v)
        equal = sum(1 for w in x if w == v)
        ranks.append(below + (equal + 1) / 2)
    return ranks


def spearman_bruteforce(u, v):
    ru, rv = _avg_ranks(list(u)), _avg_ranks(list(v))
    mu, mv = sum(ru) / len(ru), sum(rv) / len(rv)
    num = sum((a - mu) * (b - mv) for a, b in zip(ru, rv))
    den = math.sqrt(sum((a - mu) ** 2 for a in ru) * sum((b - mv) ** 2 for b in rv))
    return num / den if den else 0.0


def test_spearman_examples():
    u = np.array([3.0, 1.0, 4.0, 1.5, 9.0])
    assert spearman(u, u) == pytest.approx(1.0)
    assert spearman(u, -u) == pytest.approx(-1.0)
    assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)
    assert spearman_bruteforce([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)
    assert spearman([1, 2, 3], [5, 5, 5]) == 0.0


@given(arrays(float, 12, elements=st.integers(-3, 3).map(float)),
       arrays(float, 12, elements=st.floats(-10, 10)))
def test_spearman_matches_bruteforce_with_ties(u, v):
    assert spearman(u, v) == pytest.approx(spearman_bruteforce(u, v), abs=1e-12)


@given(arrays(float, 20, elements=st.integers(-500, 500).map(lambda k: k / 100), unique=True),
       arrays(float, 20, elements=st.integers(-500, 500).map(lambda k: k / 100), unique=True))
def test_spearman_monotone_invariance(u, v):
    base = spearman(u, v)
    assert spearman(np.exp(u), v) == pytest.approx(base, abs=1e-12)
    assert spearman(u, v ** 3 + v) == pytest.approx(base, abs=1e-12)
    assert spearman(np.arctanh(np.tanh(u / 10) * 0.99), v) == pytest.approx(base, abs=1e-12)


def test_stability_identical_and_reversed():
    flat = np.random.default_rng(0).standard_normal(496)
    same = CorrSequence(unflatten(np.stack([flat] * 4)), 100, "r")
    assert consecutive_stability(same).mean_rho == pytest.approx(1.0)
    rev = CorrSequence(unflatten(np.stack([flat, -flat])), 100, "r")
    s = consecutive_stability(rev)
    assert s.mean_rho == pytest.approx(-1.0) and s.T_pairs == 1


def test_stability_matches_naive_loop():
    flat = np.random.default_rng(1).standard_normal((6, 496))
    cs = CorrSequence(unflatten(flat), 100, "r")
    oracle = sum(spearman_bruteforce(flat[k], flat[k + 1]) for k in range(5)) / 5
    assert consecutive_stability(cs).mean_rho == pytest.approx(oracle, abs=1e-12)


def test_too_few_matrices(caplog, small_corpus):
    with pytest.raises(TooFewMatrices):
        consecutive_stability(CorrSequence(unflatten(np.zeros((1, 496))), 100))
    manifest, data = small_corpus
    scores = stability_scores(manifest, {k: v[:120] for k, v in data.items()}, 100)
    assert scores == [] and "excluded" in caplog.text


def _welch_oracle(a, b):
    a, b = np.asarray(a), np.asarray(b)
    va, vb = a.var(ddof=1) / len(a), b.var(ddof=1) / len(b)
    t = (a.mean() - b.mean()) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va ** 2 / (len(a) - 1) + vb ** 2 / (len(b) - 1))
    return t, 2 * stats.t.sf(abs(t), df)


def test_group_compare_identical():
    x = list(np.random.default_rng(2).normal(0.7, 0.05, 30))
    r = compare_groups(x, x, 100)
    assert r.t_statistic == pytest.approx(0.0, abs=1e-12) and r.p_value == pytest.approx(1.0)


def test_group_compare_seeded_means():
    rng = np.random.default_rng(3)
    c = 0.75 + rng.normal(0, 0.01, 50)
    d = 0.71 + rng.normal(0, 0.01, 50)
    r = compare_groups(c, d, 100)
    assert r.control_mean > r.depressed_mean
    assert r.p_value < 0.001
    t, p = _welch_oracle(c, d)
    assert r.t_statistic == pytest.approx(t, rel=1e-10)
    assert r.p_value == pytest.approx(p, rel=1e-6)
    assert r.p_adjusted == r.p_value  # single L


def test_bh_against_statsmodels():
    rng = np.random.default_rng(4)
    for m in (1, 2, 5, 13):
        p = rng.uniform(0, 0.2, m)
        np.testing.assert_allclose(benjamini_hochberg(p), multipletests(p, method="fdr_bh")[1],
                                   rtol=1e-12)


@given(arrays(float, st.integers(1, 30), elements=st.floats(0, 1)))
def test_bh_monotone(p):
    adj = benjamini_hochberg(p)
    order = np.argsort(p, kind="stable")
    assert np.all(np.diff(adj[order]) >= -1e-15)
    assert np.all(adj >= p - 1e-15) and np.all(adj <= 1)


def test_group_compare_multi_L_and_empty():
    rng = np.random.default_rng(5)
    by_L = {}
    for L, gap in ((100, 0.05), (300, 0.01), (500, 0.0)):
        by_L[L] = [StabilityScore(f"c{i}", L, 0.8 + gap + rng.normal(0, 0.02), 3, CONTROL) for i in range(10)]
        by_L[L] += [StabilityScore(f"d{i}", L, 0.8 + rng.normal(0, 0.02), 3, DEPRESSED) for i in range(10)]
    rows = group_compare(by_L)
    assert [r.L for r in rows] == [100, 300, 500]
    assert all(r.p_adjusted >= r.p_value for r in rows)
    with pytest.raises(EmptyGroup):
        group_compare({100: by_L[100][:10]})


def test_bar_data_sorted():
    s = [StabilityScore("a", 100, 0.2, 1), StabilityScore("b", 100, 0.9, 1), StabilityScore("c", 100, 0.5, 1)]
    assert [x.recording_id for x in bar_data(s)] == ["b", "c", "a"]
