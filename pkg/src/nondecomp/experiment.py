"""Time-versus-accuracy experiment runs over the four solvers."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, FeasibleSet, InvalidInput, shuffle
from .losses import PAUC, PREC_AT_K, MeasureSpec, loss_value
from .metrics import raw_measure
from .online import FtrlConfig, ftrl_step
from .solvers import SgdConfig, TraceRow, run_1pmb, run_2pmb, run_psg

SOLVERS = ("1pmb", "2pmb", "psg", "ftrl")


@dataclass(frozen=True)
class ExperimentConfig:
    measure: MeasureSpec = field(default_factory=lambda: MeasureSpec.pauc(0.1))
    eta: float = 1.0
    buffer_size: int = 500
    passes: int = 5
    radius: float = 100.0
    seed: int = 0
    rare_label: int = 1
    ftrl_inner_iters: int = 200


@dataclass
class ExperimentTrace:
    rows: list
    model: np.ndarray


def report_measure(measure: MeasureSpec) -> MeasureSpec:
    """Per-point scale used for the ``train_surrogate`` column."""
    if measure.kind == "fmeasure":
        return measure
    return measure.with_normalize(True)


def make_monitor(train: Dataset, test: Dataset, measure: MeasureSpec):
    train_measure = report_measure(measure)

    def monitor(w):
        train_val = loss_value(train_measure, train.X, train.y, w)
        test_val = raw_measure(measure.kind, test.X, test.y, w, k=measure.k, beta=measure.beta).value
        return train_val, test_val

    return monitor


def _run_ftrl_traced(train: Dataset, config: ExperimentConfig, monitor) -> ExperimentTrace:
    """FTRL with one trace row per batch; the snapshot model is the running average."""
    fc = FtrlConfig(config.eta, config.measure, config.ftrl_inner_iters, config.buffer_size)
    W = FeasibleSet(config.radius)
    order = np.asarray(shuffle(train, config.seed).permutation)
    X, y = train.X[order], train.y[order]
    w = np.zeros(train.dimension)
    total = np.zeros(train.dimension)
    elapsed = 0.0
    rows = [TraceRow(0, 0, *monitor(w))]
    step = 0
    for start in range(0, y.size, fc.batch_size_s):
        t0 = time.perf_counter()
        stop = min(y.size, start + fc.batch_size_s)
        total += w
        step += 1
        w, _ = ftrl_step(X[:stop], y[:stop], fc, W)
        elapsed += time.perf_counter() - t0
        rows.append(TraceRow(int(elapsed * 1000), step, *monitor(total / step)))
    return ExperimentTrace(rows, total / max(step, 1))


def run_experiment(train: Dataset, test: Dataset, solver: str, config: ExperimentConfig) -> ExperimentTrace:
    """Train with ``solver`` and snapshot (time, epoch, train surrogate, test measure).

    Snapshots are taken at the running averaged model after every epoch
    (every batch for FTRL), plus one row for the initial zero model.  The
    wall clock counts solver time only, not snapshot evaluation.
    """
    if solver not in SOLVERS:
        raise InvalidInput(f"unknown solver {solver!r}; expected one of {SOLVERS}")
    monitor = make_monitor(train, test, config.measure)
    if solver == "ftrl":
        return _run_ftrl_traced(train, config, monitor)
    sgd = SgdConfig(config.eta, config.buffer_size, config.measure, config.passes, config.seed, config.rare_label)
    W = FeasibleSet(config.radius)
    try:
        if solver == "psg":
            out = run_psg(train, sgd, W, monitor)
        else:
            run = run_1pmb if solver == "1pmb" else run_2pmb
            out = run(train, shuffle(train, config.seed), sgd, W, monitor)
    except InvalidInput as exc:
        raise InvalidInput(f"{solver} on {len(train)} training points: {exc}") from exc
    return ExperimentTrace(out.trace, out.averaged_model)


def default_measure(kind: str, k: float | None = None, beta: float | None = None, train: Dataset | None = None) -> MeasureSpec:
    """Measure with the experiment defaults: beta = 0.1, k = training positive rate."""
    if kind == PAUC:
        return MeasureSpec.pauc(0.1 if beta is None else beta)
    if kind == PREC_AT_K:
        if k is None:
            if train is None:
                raise InvalidInput("Prec@k needs --k or a training set to take the positive rate from")
            k = train.n_pos / len(train)
        return MeasureSpec.prec_at_k(k)
    if kind == "prbep":
        return MeasureSpec.prbep()
    if kind == "fmeasure":
        return MeasureSpec.fmeasure()
    raise InvalidInput(f"unknown loss {kind!r}")
