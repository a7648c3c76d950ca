"""Brute-force reference evaluators used to check the fast surrogates.

Nothing here sorts its way to an answer: structural surrogates are
maximised by enumerating labellings, and the top-beta negatives for pAUC
are found by counting, for every negative, how many others outrank it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, InvalidInput
from .losses import FMEASURE, PAUC, PRBEP, PREC_AT_K, MeasureSpec, ceil_count, loss_value, satisfies

MAX_ENUMERATION = 20


class SizeLimitExceeded(ValueError):
    pass


@dataclass
class OracleReport:
    oracle_value: float
    fast_value: float
    max_abs_gap: float
    trials: int


@dataclass
class ConvergenceReport:
    """Sup-over-grid gaps between full-data and subsample losses for one sample size."""

    s: int
    trials: int
    gaps: np.ndarray = field(repr=False)

    @property
    def median_gap(self) -> float:
        return float(np.median(self.gaps))

    def quantile_gap(self, q: float = 0.9) -> float:
        return float(np.quantile(self.gaps, q))


def _f1(ybar: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row-wise F1 of candidate labellings (rows of ``ybar``) against ``y``."""
    pred = ybar == 1
    true = y == 1
    tp = (pred & true).sum(axis=1).astype(float)
    fp = (pred & ~true).sum(axis=1)
    fn = (~pred & true).sum(axis=1)
    out = np.zeros(ybar.shape[0])
    ok = tp > 0
    out[ok] = 2 * tp[ok] / (2 * tp[ok] + fp[ok] + fn[ok])
    return out


def _all_labellings(t: int, chunk: int = 1 << 16):
    codes = np.arange(1 << t, dtype=np.int64)
    bits = np.arange(t, dtype=np.int64)
    for start in range(0, codes.size, chunk):
        block = codes[start : start + chunk]
        yield np.where((block[:, None] >> bits) & 1, 1, -1)


def _labellings_with_positives(t: int, m: int, chunk: int = 1 << 14):
    combos = itertools.combinations(range(t), m)
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            return
        ybar = -np.ones((len(block), t), dtype=np.int64)
        if m:
            rows = np.repeat(np.arange(len(block)), m)
            ybar[rows, np.asarray(block).ravel()] = 1
        yield ybar


def brute_force_structural(X, y, w, measure: MeasureSpec) -> float:
    """Exact maximum of ``sum_i (ybar_i - y_i) w.x_i - P(ybar, y)`` by enumeration.

    Prec@k and PRBEP restrict ``ybar`` to labellings with ``ceil(k t)``
    (resp. ``t_pos``) positives and use ``P = sum_i y_i ybar_i``.  The
    F-measure searches all of {-1, +1}^t with ``P = F1 - 1``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    w = np.asarray(w, dtype=float)
    t = y.shape[0]
    if t > MAX_ENUMERATION:
        raise SizeLimitExceeded(f"enumeration over t={t} points exceeds cap {MAX_ENUMERATION}")
    if t == 0:
        raise InvalidInput("empty point sequence")
    s = X @ w
    best = -np.inf
    if measure.kind in (PREC_AT_K, PRBEP):
        m = ceil_count(measure.k, t) if measure.kind == PREC_AT_K else int(np.sum(y == 1))
        if measure.kind == PRBEP and m == 0:
            raise InvalidInput("PRBEP needs at least one positive")
        for ybar in _labellings_with_positives(t, m):
            obj = (ybar - y) @ s - ybar @ y
            best = max(best, float(obj.max()))
        if measure.normalize:
            best /= t
    elif measure.kind == FMEASURE:
        if not np.any(y == 1):
            raise InvalidInput("F-measure needs at least one positive")
        for ybar in _all_labellings(t):
            obj = (ybar - y) @ s + 1.0 - _f1(ybar, y)
            best = max(best, float(obj.max()))
    else:
        raise InvalidInput("use brute_force_pauc for the pAUC surrogate")
    return best


def brute_force_top_beta(X, y, w, beta: float) -> np.ndarray:
    """Top ``ceil(beta t_neg)`` negatives by explicit rank counting, as sorted row indices.

    Negative ``j`` is outranked by negative ``l`` when ``s_l > s_j``, or
    when the scores tie and ``l < j``.
    """
    y = np.asarray(y)
    s = np.asarray(X, dtype=float) @ np.asarray(w, dtype=float)
    neg = [j for j in range(y.shape[0]) if y[j] == -1]
    m = min(ceil_count(beta, len(neg)), len(neg))
    chosen = []
    for j in neg:
        above = sum(1 for l in neg if s[l] > s[j] or (s[l] == s[j] and l < j))
        if above < m:
            chosen.append(j)
    return np.asarray(chosen, dtype=np.int64)


def brute_force_pauc(X, y, w, beta: float, normalize: bool = False) -> float:
    y = np.asarray(y)
    if not (np.any(y == 1) and np.any(y == -1)):
        raise InvalidInput("pAUC needs at least one positive and one negative")
    s = np.asarray(X, dtype=float) @ np.asarray(w, dtype=float)
    chosen = set(brute_force_top_beta(X, y, w, beta).tolist())
    total = 0.0
    for i in range(y.shape[0]):
        if y[i] != 1:
            continue
        for j in range(y.shape[0]):
            if j in chosen:
                total += max(0.0, 1.0 - (s[i] - s[j]))
    if normalize:
        total /= len(chosen) * int(np.sum(y == 1))
    return total


def pairwise_hinge_auc(X, y, w) -> float:
    """Unnormalised hinge surrogate summed over every positive-negative pair."""
    y = np.asarray(y)
    s = np.asarray(X, dtype=float) @ np.asarray(w, dtype=float)
    diff = s[y == 1][:, None] - s[y == -1][None, :]
    return float(np.maximum(0.0, 1.0 - diff).sum())


def pairwise_auc(X, y, w) -> float:
    """Fraction of positive-negative pairs with ``s_pos >= s_neg``."""
    y = np.asarray(y)
    s = np.asarray(X, dtype=float) @ np.asarray(w, dtype=float)
    pos, neg = s[y == 1], s[y == -1]
    hits = int(np.count_nonzero(pos[:, None] >= neg[None, :]))
    return hits / (neg.size * pos.size)


def compare(fast_values, oracle_values) -> OracleReport:
    fast = np.asarray(fast_values, dtype=float)
    ref = np.asarray(oracle_values, dtype=float)
    gaps = np.abs(fast - ref)
    worst = int(np.argmax(gaps))
    return OracleReport(float(ref[worst]), float(fast[worst]), float(gaps[worst]), int(gaps.size))


def empirical_uniform_convergence(
    d: Dataset,
    measure: MeasureSpec,
    s: int,
    trials: int,
    w_grid,
    seed: int = 0,
) -> ConvergenceReport:
    """Sup over ``w_grid`` of |normalised loss on all of ``d`` - loss on an s-subsample|.

    Subsamples are drawn uniformly without replacement; draws that miss a
    class the measure needs are redrawn.
    """
    n = len(d)
    if s > n:
        raise InvalidInput(f"sample size {s} exceeds dataset size {n}")
    w_grid = [np.asarray(w, dtype=float) for w in w_grid]
    if not w_grid:
        raise InvalidInput("empty model grid")
    measure = measure.with_normalize(True)
    full = np.array([loss_value(measure, d.X, d.y, w) for w in w_grid])
    rng = np.random.default_rng(seed)
    gaps = np.empty(trials)
    for trial in range(trials):
        for _ in range(1000):
            idx = np.sort(rng.choice(n, size=s, replace=False))
            if satisfies(measure, d.y[idx]):
                break
        else:
            raise InvalidInput(f"could not draw a valid sample of size {s}")
        Xs, ys = d.X[idx], d.y[idx]
        sample = np.array([loss_value(measure, Xs, ys, w) for w in w_grid])
        gaps[trial] = np.max(np.abs(full - sample))
    return ConvergenceReport(s, trials, gaps)
