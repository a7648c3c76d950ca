"""Structural SVM surrogates for non-decomposable measures.

Every evaluator takes a dense design matrix ``X`` (one row per point), a
label vector ``y`` with entries in {-1, +1} and a model ``w``, and returns
a :class:`LossEval` holding the surrogate value, one subgradient and the
maximising assignment.  Ties in any ranking are broken by ascending row
index, so all results are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .data import InvalidInput, scores

PREC_AT_K = "preck"
PRBEP = "prbep"
PAUC = "pauc"
FMEASURE = "fmeasure"
KINDS = (PREC_AT_K, PRBEP, PAUC, FMEASURE)


@dataclass(frozen=True)
class MeasureSpec:
    """Which surrogate to evaluate and how to scale it.

    ``k`` is only used by Prec@k and ``beta`` only by pAUC.  With
    ``normalize`` set, pAUC is divided by ``ceil(beta*t_neg) * t_pos`` and
    Prec@k / PRBEP by the number of points ``t``.
    """

    kind: str
    k: float | None = None
    beta: float | None = None
    normalize: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInput(f"unknown measure {self.kind!r}; expected one of {KINDS}")
        if self.kind == PREC_AT_K and not (self.k is not None and 0 < self.k < 1):
            raise InvalidInput(f"Prec@k requires 0 < k < 1, got k={self.k}")
        if self.kind == PAUC and not (self.beta is not None and 0 < self.beta <= 1):
            raise InvalidInput(f"pAUC requires 0 < beta <= 1, got beta={self.beta}")

    @classmethod
    def prec_at_k(cls, k: float, normalize: bool = False) -> "MeasureSpec":
        return cls(PREC_AT_K, k=k, normalize=normalize)

    @classmethod
    def prbep(cls, normalize: bool = False) -> "MeasureSpec":
        return cls(PRBEP, normalize=normalize)

    @classmethod
    def pauc(cls, beta: float, normalize: bool = True) -> "MeasureSpec":
        return cls(PAUC, beta=beta, normalize=normalize)

    @classmethod
    def fmeasure(cls) -> "MeasureSpec":
        return cls(FMEASURE)

    def with_normalize(self, normalize: bool) -> "MeasureSpec":
        return MeasureSpec(self.kind, self.k, self.beta, normalize)


@dataclass
class LossEval:
    value: float
    subgradient: np.ndarray
    witness: Any


@dataclass
class TopBetaSelection:
    selected: np.ndarray  # row indices, highest score first
    threshold_rank: int


def ceil_count(frac: float, total: int) -> int:
    """``ceil(frac * total)`` robust to representation error in ``frac``.

    ``k = t_pos / t`` round-trips to something like ``2000.0000000000002``
    after multiplying back by ``t``; treat that as the integer it denotes.
    """
    prod = frac * total
    nearest = round(prod)
    if abs(prod - nearest) <= 1e-9 * max(1.0, abs(prod)):
        return int(nearest)
    return int(math.ceil(prod))


def rank_desc(values: np.ndarray) -> np.ndarray:
    """Indices sorting ``values`` descending, ties by ascending index."""
    values = np.asarray(values)
    return np.lexsort((np.arange(values.size), -values))


def _check_xy(X, y, w):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise InvalidInput(f"X has shape {X.shape} but y has {y.shape[0]} labels")
    if X.shape[0] == 0:
        raise InvalidInput("empty point sequence")
    return X, y, np.asarray(w, dtype=float)


def _top_cardinality(X, y, w, m: int) -> LossEval:
    s = scores(w, X)
    z = s - y
    order = rank_desc(z)
    top = order[:m]
    ybar = -np.ones(y.shape[0], dtype=np.int64)
    ybar[top] = 1
    value = 2.0 * z[top].sum() - z.sum() - float(y @ s)
    grad = (ybar - y) @ X
    return LossEval(float(value), grad, ybar)


def eval_prec_at_k(X, y, w, k: float, normalize: bool = False) -> LossEval:
    """Prec@k surrogate: ``2 * (sum of the ceil(k t) largest z_i) - sum z_i - sum y_i s_i``.

    Here ``s_i = w.x_i`` and ``z_i = s_i - y_i``; the witness is the
    maximising labelling with exactly ``ceil(k t)`` entries set to +1.
    """
    X, y, w = _check_xy(X, y, w)
    if not 0 < k < 1:
        raise InvalidInput(f"Prec@k requires 0 < k < 1, got {k}")
    t = y.shape[0]
    m = ceil_count(k, t)
    out = _top_cardinality(X, y, w, m)
    if normalize:
        out.value /= t
        out.subgradient = out.subgradient / t
    return out


def eval_prbep(X, y, w, normalize: bool = False) -> LossEval:
    X, y, w = _check_xy(X, y, w)
    t_pos = int(np.count_nonzero(y == 1))
    if t_pos == 0:
        raise InvalidInput("PRBEP surrogate needs at least one positive")
    out = _top_cardinality(X, y, w, t_pos)
    if normalize:
        t = y.shape[0]
        out.value /= t
        out.subgradient = out.subgradient / t
    return out


def select_top_beta_negatives(X, y, w, beta: float) -> TopBetaSelection:
    X, y, w = _check_xy(X, y, w)
    neg = np.flatnonzero(y == -1)
    if neg.size == 0:
        raise InvalidInput("no negatives to select from")
    m = min(ceil_count(beta, neg.size), neg.size)
    s = scores(w, X[neg])
    chosen = neg[rank_desc(s)[:m]]
    return TopBetaSelection(chosen, m)


def _pauc_hinge(a: np.ndarray, b: np.ndarray):
    """Sum of max(0, 1 - (a_i - b_j)) over all pairs, plus active-pair counts.

    Runs in O((p + q) log(p + q)) via sorting and prefix sums.  A pair is
    active when ``a_i < 1 + b_j``; pairs exactly at the kink contribute 0
    to both the value and the counts.
    """
    a_sorted = np.sort(a)
    prefix = np.concatenate(([0.0], np.cumsum(a_sorted)))
    shifted = 1.0 + b
    per_neg = np.searchsorted(a_sorted, shifted, side="left")
    value = float(np.sum(per_neg * shifted - prefix[per_neg]))
    shifted_sorted = np.sort(shifted)
    per_pos = b.size - np.searchsorted(shifted_sorted, a, side="right")
    return value, per_pos, per_neg


def eval_pauc(X, y, w, beta: float, normalize: bool = True) -> LossEval:
    """Partial-AUC hinge surrogate over positives and the top-beta negatives.

    The subgradient follows Danskin's theorem: fix the selected negatives,
    then sum ``-(x_i - x_j)`` over every active (positive, negative) pair.
    """
    X, y, w = _check_xy(X, y, w)
    pos = np.flatnonzero(y == 1)
    if pos.size == 0 or not np.any(y == -1):
        raise InvalidInput("pAUC surrogate needs at least one positive and one negative")
    sel = select_top_beta_negatives(X, y, w, beta)
    s = scores(w, X)
    value, per_pos, per_neg = _pauc_hinge(s[pos], s[sel.selected])
    coef = np.zeros(y.shape[0])
    coef[pos] = -per_pos
    coef[sel.selected] = per_neg
    grad = coef @ X
    if normalize:
        scale = sel.threshold_rank * pos.size
        value /= scale
        grad = grad / scale
    return LossEval(value, grad, sel)


def f1_from_counts(tp, fp, fn):
    """F1 = 2TP / (2TP + FP + FN), defined as 0 when there are no true positives."""
    tp = np.asarray(tp, dtype=float)
    denom = 2 * tp + fp + fn
    with np.errstate(divide="ignore", invalid="ignore"):
        f1 = np.where(tp > 0, 2 * tp / np.where(denom > 0, denom, 1), 0.0)
    return f1


def eval_fmeasure(X, y, w, strict: bool = True) -> LossEval:
    """F-measure surrogate ``max_ybar sum_i (ybar_i - y_i) s_i + 1 - F1(ybar, y)``.

    For a fixed number ``a`` of positives and ``b`` of negatives labelled
    +1, the best labelling picks the highest-scoring ones, so the argmax
    is a search over the ``(t_pos + 1) x (t_neg + 1)`` grid of counts.
    With ``strict=False`` a sequence without positives is accepted (F1 is
    then 0 for every labelling).
    """
    X, y, w = _check_xy(X, y, w)
    pos = np.flatnonzero(y == 1)
    neg = np.flatnonzero(y == -1)
    if pos.size == 0 and strict:
        raise InvalidInput("F-measure surrogate needs at least one positive")
    s = scores(w, X)
    pos_rank = pos[rank_desc(s[pos])]
    neg_rank = neg[rank_desc(s[neg])]
    p, q = pos_rank.size, neg_rank.size

    pos_cum = np.concatenate(([0.0], np.cumsum(s[pos_rank])))
    neg_cum = np.concatenate(([0.0], np.cumsum(s[neg_rank])))
    # flipping a positive to -1 costs 2 s_i; flipping a negative to +1 gains 2 s_j
    pos_part = -2.0 * (pos_cum[-1] - pos_cum)
    neg_part = 2.0 * neg_cum
    b = np.arange(q + 1)

    best, best_a, best_b = -np.inf, 0, 0
    chunk = max(1, 4_000_000 // (q + 1))
    for start in range(0, p + 1, chunk):
        a = np.arange(start, min(p + 1, start + chunk))[:, None]
        grid = pos_part[a] + neg_part[None, :] + 1.0 - f1_from_counts(a, b[None, :], p - a)
        flat = int(np.argmax(grid))
        r, c = divmod(flat, q + 1)
        if grid[r, c] > best:
            best, best_a, best_b = float(grid[r, c]), start + r, c

    ybar = -np.ones(y.shape[0], dtype=np.int64)
    ybar[pos_rank[:best_a]] = 1
    ybar[neg_rank[:best_b]] = 1
    grad = (ybar - y) @ X
    return LossEval(best, grad, ybar)


def satisfies(measure: MeasureSpec, y) -> bool:
    """Whether a label vector meets the measure's class-count preconditions."""
    y = np.asarray(y)
    if y.size == 0:
        return False
    has_pos = bool(np.any(y == 1))
    if measure.kind == PREC_AT_K:
        return True
    if measure.kind == PAUC:
        return has_pos and bool(np.any(y == -1))
    return has_pos


def evaluate(measure: MeasureSpec, X, y, w) -> LossEval:
    if measure.kind == PREC_AT_K:
        return eval_prec_at_k(X, y, w, measure.k, measure.normalize)
    if measure.kind == PRBEP:
        return eval_prbep(X, y, w, measure.normalize)
    if measure.kind == PAUC:
        return eval_pauc(X, y, w, measure.beta, measure.normalize)
    return eval_fmeasure(X, y, w)


def loss_value(measure: MeasureSpec, X, y, w) -> float:
    return evaluate(measure, X, y, w).value
