"""Raw (non-surrogate) performance measures, all reported on a [0, 1] scale."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import InvalidInput, scores
from .losses import ceil_count, f1_from_counts, rank_desc


@dataclass(frozen=True)
class EvalResult:
    measure_name: str
    value: float
    support: tuple  # (t_pos, t_neg)


def _support(y) -> tuple:
    y = np.asarray(y)
    return int(np.sum(y == 1)), int(np.sum(y == -1))


def _precision_at(X, y, w, m: int, name: str) -> EvalResult:
    s = scores(w, np.asarray(X, dtype=float))
    top = rank_desc(s)[:m]
    hits = int(np.count_nonzero(np.asarray(y)[top] == 1))
    return EvalResult(name, hits / m, _support(y))


def raw_prec_at_k(X, y, w, k: float) -> EvalResult:
    y = np.asarray(y)
    if y.size == 0:
        raise InvalidInput("empty dataset")
    m = ceil_count(k, y.size)
    if m < 1:
        raise InvalidInput(f"ceil(k t) must be at least 1 (k={k}, t={y.size})")
    return _precision_at(X, y, w, min(m, y.size), "prec@k")


def raw_prbep(X, y, w) -> EvalResult:
    """Precision when exactly as many points are predicted positive as there are positives.

    At that cut-off precision and recall coincide.
    """
    y = np.asarray(y)
    t_pos = int(np.sum(y == 1))
    if t_pos == 0:
        raise InvalidInput("PRBEP needs at least one positive")
    return _precision_at(X, y, w, t_pos, "prbep")


def raw_pauc(X, y, w, beta: float) -> EvalResult:
    """Fraction of (positive, top-beta negative) pairs ranked correctly; ties count as correct."""
    y = np.asarray(y)
    pos = np.flatnonzero(y == 1)
    neg = np.flatnonzero(y == -1)
    if pos.size == 0 or neg.size == 0:
        raise InvalidInput("pAUC needs at least one positive and one negative")
    s = scores(w, np.asarray(X, dtype=float))
    m = min(ceil_count(beta, neg.size), neg.size)
    top = s[neg][rank_desc(s[neg])[:m]]
    pos_sorted = np.sort(s[pos])
    # positives with score >= b_j, per selected negative
    hits = int(np.sum(pos.size - np.searchsorted(pos_sorted, top, side="left")))
    return EvalResult("pauc", hits / (m * pos.size), _support(y))


def raw_f1(X, y, w, threshold: float = 0.0) -> EvalResult:
    y = np.asarray(y)
    if not np.any(y == 1):
        raise InvalidInput("F1 needs at least one positive")
    pred = scores(w, np.asarray(X, dtype=float)) - threshold >= 0
    true = y == 1
    tp = int(np.sum(pred & true))
    fp = int(np.sum(pred & ~true))
    fn = int(np.sum(~pred & true))
    return EvalResult("f1", float(f1_from_counts(tp, fp, fn)), _support(y))


def best_f1(X, y, w):
    """Best F1 over all thresholds; returns ``(EvalResult, threshold)``."""
    y = np.asarray(y)
    if not np.any(y == 1):
        raise InvalidInput("F1 needs at least one positive")
    s = scores(w, np.asarray(X, dtype=float))
    order = np.argsort(-s, kind="stable")
    s_sorted, true_sorted = s[order], (y[order] == 1)
    # a threshold at s_sorted[i] predicts every point with score >= it
    last = np.r_[np.flatnonzero(np.diff(s_sorted) != 0), s.size - 1]
    tp = np.cumsum(true_sorted)[last]
    fp = (last + 1) - tp
    fn = true_sorted.sum() - tp
    f1 = f1_from_counts(tp, fp, fn)
    best = int(np.argmax(f1))
    return EvalResult("f1", float(f1[best]), _support(y)), float(s_sorted[last[best]])


def raw_measure(kind: str, X, y, w, k: float | None = None, beta: float | None = None) -> EvalResult:
    if kind == "preck":
        return raw_prec_at_k(X, y, w, k)
    if kind == "prbep":
        return raw_prbep(X, y, w)
    if kind == "pauc":
        return raw_pauc(X, y, w, beta)
    if kind == "fmeasure":
        return raw_f1(X, y, w)
    raise InvalidInput(f"unknown measure {kind!r}")
