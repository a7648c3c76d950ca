import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nondecomp.data import InvalidInput
from nondecomp.metrics import best_f1, raw_f1, raw_measure, raw_pauc, raw_prbep, raw_prec_at_k
from nondecomp.oracle import pairwise_auc

FOUR_X = np.array([[3.0], [2.0], [1.0], [0.0]])
FOUR_Y = np.array([1, -1, 1, -1])


def test_prec_at_k():
    X = np.array([[2.0], [1.0], [-1.0], [-2.0]])
    y = np.array([1, 1, -1, -1])
    assert raw_prec_at_k(X, y, [1.0], 0.5).value == 1.0
    assert raw_prec_at_k(X, y, [-1.0], 0.5).value == 0.0
    assert raw_prec_at_k(FOUR_X, FOUR_Y, [1.0], 0.5).value == 0.5
    with pytest.raises(InvalidInput):
        raw_prec_at_k(np.zeros((0, 1)), [], [1.0], 0.5)


def test_prbep():
    assert raw_prbep(FOUR_X, FOUR_Y, [1.0]).value == 0.5
    assert raw_prbep(FOUR_X, np.array([1, 1, -1, -1]), [1.0]).value == 1.0
    with pytest.raises(InvalidInput):
        raw_prbep(FOUR_X, -np.ones(4, int), [1.0])


def test_pauc_examples():
    neg = [[0.5], [-1.0]]
    y = np.array([1, -1, -1])
    assert raw_pauc(np.array([[1.0], *neg]), y, [1.0], 1.0).value == 1.0
    assert raw_pauc(np.array([[0.6], *neg]), y, [1.0], 1.0).value == 1.0
    assert raw_pauc(np.array([[0.4], *neg]), y, [1.0], 1.0).value == 0.5
    assert raw_pauc(np.array([[0.4], *neg]), y, [0.0], 0.3).value == 1.0
    assert raw_pauc(FOUR_X, np.array([1, 1, -1, -1]), [1.0], 0.1).value == 1.0
    with pytest.raises(InvalidInput):
        raw_pauc(FOUR_X, np.ones(4, int), [1.0], 0.5)


def test_f1():
    X = np.array([[1.0], [-1.0], [0.5]])
    assert raw_f1(X, [1, -1, 1], [1.0]).value == 1.0
    assert raw_f1(X, [1, -1, 1], [-10.0], threshold=100).value == 0.0
    assert raw_f1(X, [1, -1, -1], [1.0]).value == pytest.approx(2 / 3)
    res, thr = best_f1(X, np.array([1, -1, -1]), [1.0])
    assert res.value == 1.0 and thr == 1.0
    with pytest.raises(InvalidInput):
        raw_f1(X, [-1, -1, -1], [1.0])


def test_dispatch():
    assert raw_measure("prbep", FOUR_X, FOUR_Y, [1.0]).measure_name == "prbep"
    assert raw_measure("pauc", FOUR_X, FOUR_Y, [1.0], beta=1.0).support == (2, 2)
    with pytest.raises(InvalidInput):
        raw_measure("auc", FOUR_X, FOUR_Y, [1.0])


def _data(seed, t=12, d=3):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((t, d))
    y = rng.choice([-1, 1], size=t)
    y[0], y[1] = 1, -1
    return X, y, rng.standard_normal(d)


@settings(max_examples=60)
@given(st.integers(0, 2**31), st.floats(1e-3, 1e3), st.floats(0.05, 1.0))
def test_raw_measures_scale_invariant(seed, c, frac):
    X, y, w = _data(seed)
    for kind in ("preck", "prbep", "pauc", "fmeasure"):
        k = min(frac, 0.95)
        a = raw_measure(kind, X, y, w, k=k, beta=frac).value
        b = raw_measure(kind, X, y, c * w, k=k, beta=frac).value
        if kind == "fmeasure":
            assert a == b
        else:
            assert a == pytest.approx(b)


@settings(max_examples=60)
@given(st.integers(0, 2**31))
def test_raw_pauc_beta_one_is_auc(seed):
    X, y, w = _data(seed)
    assert raw_pauc(X, y, w, 1.0).value == pairwise_auc(X, y, w)


@settings(max_examples=60)
@given(st.integers(0, 2**31), st.floats(0.05, 0.95))
def test_prec_at_k_monotone_under_swaps(seed, k):
    rng = np.random.default_rng(seed)
    t = 15
    y = rng.choice([-1, 1], size=t)
    s = rng.permutation(t).astype(float)
    X = s[:, None]
    before = raw_prec_at_k(X, y, [1.0], k).value
    order = np.argsort(-s)
    top_negs = [i for i in order if y[i] == -1]
    low_pos = [i for i in order[::-1] if y[i] == 1]
    if top_negs and low_pos and s[top_negs[0]] > s[low_pos[0]]:
        i, j = top_negs[0], low_pos[0]
        s2 = s.copy()
        s2[i], s2[j] = s[j], s[i]
        assert raw_prec_at_k(s2[:, None], y, [1.0], k).value >= before
