"""Online learning with non-decomposable losses.

The penalty charged for a new batch is the growth of the prefix loss,
``L_t(w) = loss(x_1..x_t, w) - loss(x_1..x_{t-1}, w)``, so the penalties
for a fixed ``w`` telescope to the loss of the whole stream.  Models are
produced by follow-the-regularized-leader, with each leader problem
solved by projected subgradient descent.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, FeasibleSet, InvalidInput, StreamOrder, project
from .losses import (
    FMEASURE,
    PAUC,
    PRBEP,
    LossEval,
    MeasureSpec,
    _top_cardinality,
    eval_fmeasure,
    evaluate,
)

log = logging.getLogger(__name__)


def prefix_loss(measure: MeasureSpec, X, y, w) -> LossEval:
    """Surrogate loss extended to every finite prefix of a stream.

    The empty prefix costs 0.  pAUC without both classes is an empty
    double sum and also costs 0; PRBEP with no positives uses cardinality
    0 and the F-measure takes F1 = 0, both straight from their formulas.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    w = np.asarray(w, dtype=float)
    if y.shape[0] == 0:
        return LossEval(0.0, np.zeros_like(w), None)
    has_pos = bool(np.any(y == 1))
    if measure.kind == PAUC and not (has_pos and np.any(y == -1)):
        return LossEval(0.0, np.zeros_like(w), None)
    if measure.kind == PRBEP and not has_pos:
        out = _top_cardinality(X, y, w, 0)
        if measure.normalize:
            out.value /= y.shape[0]
            out.subgradient = out.subgradient / y.shape[0]
        return out
    if measure.kind == FMEASURE and not has_pos:
        return eval_fmeasure(X, y, w, strict=False)
    return evaluate(measure, X, y, w)


def instantaneous_penalty(prefix_X, prefix_y, batch_X, batch_y, w, measure: MeasureSpec) -> float:
    batch_y = np.asarray(batch_y)
    if batch_y.shape[0] == 0:
        raise InvalidInput("batch must be nonempty")
    prefix_X = np.asarray(prefix_X, dtype=float).reshape(-1, np.asarray(batch_X).shape[1])
    X = np.vstack([prefix_X, batch_X])
    y = np.concatenate([np.asarray(prefix_y, dtype=np.int64), batch_y])
    return prefix_loss(measure, X, y, w).value - prefix_loss(measure, prefix_X, prefix_y, w).value


@dataclass(frozen=True)
class FtrlConfig:
    eta: float
    measure: MeasureSpec
    inner_iters: int = 200
    batch_size_s: int = 1

    def __post_init__(self):
        if not self.eta > 0:
            raise InvalidInput(f"eta must be positive, got {self.eta}")
        if self.inner_iters < 1:
            raise InvalidInput("inner_iters must be at least 1")
        if self.batch_size_s < 1:
            raise InvalidInput("batch_size_s must be at least 1")


@dataclass
class PenaltyLedger:
    """Running record of the penalties an online learner has been charged."""

    penalties: list = field(default_factory=list)
    cumulative_penalty: float = 0.0

    def charge(self, prefix_before: float, prefix_after: float) -> float:
        pen = prefix_after - prefix_before
        self.penalties.append(pen)
        self.cumulative_penalty += pen
        return pen


@dataclass
class RegretReport:
    """Average penalty against an estimate of the best fixed model's loss.

    ``batch_opt_loss`` comes from an approximate minimiser, so it can only
    overstate the true minimum; ``regret_upper`` is therefore an
    underestimate of the true regret.
    """

    avg_penalty: float
    batch_opt_loss: float
    regret_upper: float
    T: int
    batch_opt_model: np.ndarray = field(repr=False, default=None)


@dataclass
class FtrlRun:
    models: list
    averaged_model: np.ndarray
    report: RegretReport
    ledger: PenaltyLedger


def minimize_loss(
    measure: MeasureSpec,
    X,
    y,
    W: FeasibleSet,
    iters: int,
    eta: float = 0.0,
    init=None,
):
    """Projected subgradient descent on ``loss(w) + eta/2 ||w||^2``.

    With ``eta > 0`` the step at iteration ``i`` is ``1/(eta i)``; with
    ``eta == 0`` it is ``radius / (||g|| sqrt(i))``.  Returns the best
    iterate seen (the start included) and its objective value.
    """
    X = np.asarray(X, dtype=float)
    w = np.zeros(X.shape[1]) if init is None else project(np.array(init, dtype=float), W)
    best_w, best_obj = w, np.inf
    for i in range(1, iters + 1):
        ev = prefix_loss(measure, X, y, w)
        obj = ev.value + 0.5 * eta * float(w @ w)
        if obj < best_obj:
            best_w, best_obj = w, obj
        g = ev.subgradient + eta * w
        if eta > 0:
            step = 1.0 / (eta * i)
        else:
            gnorm = float(np.linalg.norm(g))
            if gnorm == 0.0:
                break
            step = W.radius / (gnorm * np.sqrt(i))
        w = project(w - step * g, W)
    ev = prefix_loss(measure, X, y, w)
    obj = ev.value + 0.5 * eta * float(w @ w)
    if obj < best_obj:
        best_w, best_obj = w, obj
    return best_w, float(best_obj)


def ftrl_step(X_hist, y_hist, config: FtrlConfig, W: FeasibleSet):
    """Leader for the history: argmin over W of ``loss(history, w) + eta/2 ||w||^2``.

    Returns ``(w, achieved_objective)``; an empty history gives the origin.
    """
    X_hist = np.asarray(X_hist, dtype=float)
    if X_hist.shape[0] == 0:
        return np.zeros(X_hist.shape[1]), 0.0
    return minimize_loss(config.measure, X_hist, y_hist, W, config.inner_iters, eta=config.eta)


def stability_ratio(prefix_X, prefix_y, new_X, new_y, w, w2, measure: MeasureSpec) -> float:
    """``|L_t(w) - L_t(w2)| / ||w - w2||`` for the penalty of adding ``new`` to ``prefix``."""
    w = np.asarray(w, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    dist = float(np.linalg.norm(w - w2))
    if dist == 0.0:
        return 0.0
    new_X = np.atleast_2d(np.asarray(new_X, dtype=float))
    new_y = np.atleast_1d(np.asarray(new_y, dtype=np.int64))
    a = instantaneous_penalty(prefix_X, prefix_y, new_X, new_y, w, measure)
    b = instantaneous_penalty(prefix_X, prefix_y, new_X, new_y, w2, measure)
    return abs(a - b) / dist


def stability_check_preck(prefix_X, prefix_y, new_x, new_y, w, w2, k: float) -> float:
    return stability_ratio(prefix_X, prefix_y, new_x, new_y, w, w2, MeasureSpec.prec_at_k(k))


def stability_check_prbep(prefix_X, prefix_y, new_x, new_y, w, w2) -> float:
    return stability_ratio(prefix_X, prefix_y, new_x, new_y, w, w2, MeasureSpec.prbep())


def regret_scale(measure: MeasureSpec, y, beta_default: float = 1.0) -> float:
    """Divisor turning summed penalties into an average.

    ``T`` for every measure, except unnormalised pAUC which uses
    ``beta * T_pos * T_neg``.
    """
    y = np.asarray(y)
    if measure.kind == PAUC and not measure.normalize:
        return measure.beta * int(np.sum(y == 1)) * int(np.sum(y == -1))
    return float(y.shape[0])


def run_ftrl(
    d: Dataset,
    order: StreamOrder,
    config: FtrlConfig,
    W: FeasibleSet,
    batch_opt_iters: int | None = None,
) -> FtrlRun:
    """Play FTRL over the ordered stream in batches of ``config.batch_size_s``.

    At each round the current leader is charged the penalty of the next
    batch, then the leader is recomputed on the grown history.  The final
    partial batch, if any, is processed as is.
    """
    perm = np.asarray(order.permutation)
    X, y = d.X[perm], d.y[perm]
    T = y.shape[0]
    s = config.batch_size_s
    measure = config.measure
    ledger = PenaltyLedger()
    w = np.zeros(d.dimension)
    models = []
    for start in range(0, T, s):
        stop = min(T, start + s)
        models.append(w)
        before = prefix_loss(measure, X[:start], y[:start], w).value
        after = prefix_loss(measure, X[:stop], y[:stop], w).value
        ledger.charge(before, after)
        if stop < T:
            w, _ = ftrl_step(X[:stop], y[:stop], config, W)
    averaged = np.mean(models, axis=0)

    iters = batch_opt_iters if batch_opt_iters is not None else 10 * config.inner_iters
    # the minimum over W is no larger than the loss at any model we already have
    best_w, best_val = None, np.inf
    for cand in (np.zeros(d.dimension), models[-1], averaged):
        val = prefix_loss(measure, X, y, cand).value
        if val < best_val:
            best_w, best_val = cand, val
    opt_w, opt_val = minimize_loss(measure, X, y, W, iters, eta=0.0, init=best_w)
    if opt_val > best_val:
        opt_w, opt_val = best_w, best_val

    scale = regret_scale(measure, y)
    avg_pen = ledger.cumulative_penalty / scale
    batch_opt = opt_val / scale
    report = RegretReport(avg_pen, batch_opt, avg_pen - batch_opt, T, opt_w)
    log.debug("ftrl T=%d avg_penalty=%.6g batch_opt=%.6g", T, avg_pen, batch_opt)
    return FtrlRun(models, averaged, report, ledger)
