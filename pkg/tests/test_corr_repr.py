import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from corrdep.corr_repr import (CorrSequence, average_matrix, corr_sequence, fisher_z,
                               lower_triangle, mean_feature_vector, n_windows,
                               pearson_matrix, segment, unflatten)
from corrdep.dsp_features import FeatureSequence
from corrdep.errors import OddL, SequenceTooShort


def _window_starts(n, L):
    starts, s = [], 0
    while s + L <= n:
        starts.append(s)
        s += L // 2
    return starts


def test_segment_counts():
    x = np.arange(1000 * 3, dtype=float).reshape(1000, 3)
    w = segment(x, 100)
    assert w.shape == (19, 100, 3)
    assert [int(b[0, 0] // 3) for b in w] == list(range(0, 901, 50))
    assert _window_starts(1000, 100) == list(range(0, 901, 50))
    assert segment(x[:100], 100).shape[0] == 1
    with pytest.raises(SequenceTooShort):
        segment(x[:99], 100)
    with pytest.raises(OddL):
        segment(x, 101)


def test_window_count_matches_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        L = 2 * int(rng.integers(1, 300))
        n = int(rng.integers(L, 6000))
        assert n_windows(n, L) == len(_window_starts(n, L))


def test_window_content_follows_indexing():
    x = np.random.default_rng(1).standard_normal((730, 4))
    L = 200
    for n, block in enumerate(segment(x, L), start=1):
        start = (n - 1) * L // 2
        np.testing.assert_array_equal(block, x[start:start + L])


def test_pearson_cases():
    rng = np.random.default_rng(2)
    a = rng.standard_normal(50)
    block = np.column_stack([a, 2 * a + 3, -a, np.full(50, 4.0), rng.standard_normal(50)])
    r = pearson_matrix(block)
    assert r[0, 1] == pytest.approx(1.0, abs=1e-12)
    assert r[0, 2] == pytest.approx(-1.0, abs=1e-12)
    assert np.all(r[3, [0, 1, 2, 4]] == 0.0) and r[3, 3] == 1.0
    np.testing.assert_allclose(r[0, 4], np.corrcoef(a, block[:, 4])[0, 1], atol=1e-12)


def test_pearson_matches_numpy_corrcoef():
    x = np.random.default_rng(3).standard_normal((100, 32))
    np.testing.assert_allclose(pearson_matrix(x), np.corrcoef(x, rowvar=False), atol=1e-12)


@given(arrays(float, (20, 6), elements=st.floats(-1e3, 1e3)))
def test_pearson_symmetric_bounded(x):
    r = pearson_matrix(x)
    assert np.array_equal(r, r.T)
    assert np.all(np.abs(r) <= 1.0)
    assert np.all(np.diag(r) == 1.0)


def test_pearson_affine_invariance():
    rng = np.random.default_rng(4)
    for _ in range(20):
        x = rng.standard_normal((60, 8))
        slope = rng.uniform(0.1, 10, 8)
        shift = rng.uniform(-50, 50, 8)
        np.testing.assert_allclose(pearson_matrix(x * slope + shift), pearson_matrix(x), atol=1e-12)


def test_fisher_values():
    assert fisher_z(0.0) == 0.0
    assert fisher_z(0.9) == pytest.approx(float(mpmath.atanh(mpmath.mpf(0.9))), abs=1e-14)
    assert fisher_z(0.9) == pytest.approx(1.47221948958322, abs=1e-12)
    top = float(mpmath.atanh(mpmath.mpf(1 - 1e-6)))
    assert fisher_z(1.0) == pytest.approx(top, abs=1e-12)
    assert fisher_z(1.0) == pytest.approx(7.2543, abs=1e-4)
    assert np.isfinite(fisher_z(-1.0))


@given(st.floats(-1 + 1e-6, 1 - 1e-6), st.floats(-1 + 1e-6, 1 - 1e-6))
def test_fisher_monotone_and_odd(a, b):
    assert fisher_z(-a) == -fisher_z(a)
    if a < b:
        assert fisher_z(a) < fisher_z(b)


def test_lower_triangle_order():
    m = np.zeros((32, 32))
    for i in range(32):
        for j in range(i):
            m[i, j] = m[j, i] = i * 100 + j
    flat = lower_triangle(m)
    assert len(flat) == 496
    assert list(flat[:3]) == [100, 200, 201]
    assert np.all(lower_triangle(fisher_z(np.eye(32))) == 0)


@given(arrays(float, 496, elements=st.floats(-8, 8)))
def test_flatten_roundtrip(flat):
    m = unflatten(flat)
    assert m.shape == (32, 32) and np.array_equal(m, m.T)
    assert np.array_equal(lower_triangle(m), flat)


def test_corr_sequence_noise():
    values = np.random.default_rng(5).standard_normal((1000, 32))
    cs = corr_sequence(FeatureSequence(values), 100)
    assert cs.T == 19
    off = cs.flat()
    # atanh(r) ~ N(0, 1/sqrt(L-3)): |z| < 0.35 is ~3.4 sd
    assert np.mean(np.abs(off) < 0.35) >= 0.99
    assert np.all(np.isfinite(cs.matrices))
    assert np.array_equal(cs.matrices, np.swapaxes(cs.matrices, 1, 2))


def test_corr_sequence_single_and_periodic():
    x = np.random.default_rng(6).standard_normal((100, 32))
    assert corr_sequence(x, 100).T == 1
    period = np.random.default_rng(7).standard_normal((50, 32))
    cs = corr_sequence(np.tile(period, (6, 1)), 100)
    assert cs.T == 5
    assert cs.matrices[0].tobytes() == cs.matrices[2].tobytes()
    assert cs.start_vector(2) == 100


@given(st.integers(2, 3000), st.integers(1, 250))
def test_sequence_length_reduction(n, half):
    L = 2 * half
    if n >= L:
        assert n_windows(n, L) <= 2 * n / L


def test_average_matrix():
    rng = np.random.default_rng(8)
    one = CorrSequence(unflatten(rng.standard_normal((1, 496))), 100)
    np.testing.assert_array_equal(average_matrix(one), one.flat()[0])
    v = rng.standard_normal(496)
    assert np.all(average_matrix(np.stack([v, -v])) == 0)
    flat = rng.standard_normal((3, 496))
    oracle = [math.fsum(flat[:, j]) / 3 for j in range(496)]
    np.testing.assert_allclose(average_matrix(flat), oracle, atol=1e-12, rtol=0)


def test_mean_feature_vector():
    v = np.random.default_rng(9).standard_normal(32)
    np.testing.assert_array_equal(mean_feature_vector(np.tile(v, (4, 1))), v)
    np.testing.assert_allclose(mean_feature_vector(np.stack([0 * v, 2 * v])), v)
    x = np.random.default_rng(10).standard_normal((500, 32))
    oracle = [math.fsum(x[:, j]) / 500 for j in range(32)]
    np.testing.assert_allclose(mean_feature_vector(x), oracle, atol=1e-12, rtol=0)
