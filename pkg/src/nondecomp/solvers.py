"""Mini-batch stochastic solvers (one-pass and two-pass) and the full-batch PSG baseline.

All three take projected subgradient steps ``w <- Proj(w - eta/sqrt(e) g)``
where ``g`` is a subgradient of the surrogate evaluated on the current
epoch's points, and return the average of the post-update iterates.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .data import Dataset, FeasibleSet, InvalidInput, StreamOrder, project
from .losses import MeasureSpec, evaluate, satisfies

# monitor(averaged_model) -> (train_surrogate, test_measure)
Monitor = Callable[[np.ndarray], tuple]


@dataclass(frozen=True)
class SgdConfig:
    eta_scale: float
    buffer_size_s: int
    measure: MeasureSpec
    passes: int = 5
    seed: int = 0
    rare_label: int = 1

    def __post_init__(self):
        if not self.eta_scale > 0:
            raise InvalidInput(f"eta_scale must be positive, got {self.eta_scale}")
        if self.buffer_size_s < 1:
            raise InvalidInput("buffer_size_s must be at least 1")
        if self.passes < 1:
            raise InvalidInput("passes must be at least 1")
        if self.rare_label not in (-1, 1):
            raise InvalidInput("rare_label must be -1 or +1")


@dataclass
class TraceRow:
    wall_clock_ms: int
    epoch: int
    train_surrogate: float
    test_measure: float


@dataclass
class SolverOutput:
    averaged_model: np.ndarray
    final_model: np.ndarray
    trace: list = field(default_factory=list)
    epochs: int = 0
    epoch_seconds: list = field(default_factory=list)
    rare_buffer: Optional[np.ndarray] = None


@dataclass
class ReservoirBuffer:
    capacity: int
    items: list = field(default_factory=list)
    seen: int = 0


def reservoir_offer(buf: ReservoirBuffer, item, rng: np.random.Generator) -> ReservoirBuffer:
    """Offer one stream item: keep the first ``capacity`` items, then replace a
    uniformly chosen slot with probability ``capacity / seen``."""
    buf.seen += 1
    if len(buf.items) < buf.capacity:
        buf.items.append(item)
    else:
        slot = int(rng.integers(buf.seen))
        if slot < buf.capacity:
            buf.items[slot] = item
    return buf


def _pass_order(n: int, order: StreamOrder, seed: int, p: int) -> np.ndarray:
    if p == 0:
        return np.asarray(order.permutation)
    rng = np.random.default_rng(np.random.SeedSequence([seed, p]))
    return rng.permutation(n)


class _Stepper:
    """Shared bookkeeping: step schedule, running average, timing and trace."""

    def __init__(self, dim: int, config: SgdConfig, W: FeasibleSet, monitor: Optional[Monitor]):
        self.config = config
        self.W = W
        self.monitor = monitor
        self.w = np.zeros(dim)
        self.total = np.zeros(dim)
        self.epoch = 0
        self.trace: list[TraceRow] = []
        self.epoch_seconds: list[float] = []
        self.elapsed = 0.0
        self._t0 = time.perf_counter()
        self._record(self.w)

    def _record(self, averaged):
        self.elapsed += time.perf_counter() - self._t0
        train, test = self.monitor(averaged) if self.monitor else (math.nan, math.nan)
        self.trace.append(TraceRow(int(self.elapsed * 1000), self.epoch, train, test))
        self._t0 = time.perf_counter()

    def step(self, X, y):
        start = time.perf_counter()
        self.epoch += 1
        if satisfies(self.config.measure, y):
            g = evaluate(self.config.measure, X, y, self.w).subgradient
            eta = self.config.eta_scale / math.sqrt(self.epoch)
            self.w = project(self.w - eta * g, self.W)
        self.total += self.w
        self.epoch_seconds.append(time.perf_counter() - start)
        self._record(self.total / self.epoch)

    def output(self) -> SolverOutput:
        avg = self.total / self.epoch if self.epoch else self.w.copy()
        return SolverOutput(avg, self.w.copy(), self.trace, self.epoch, self.epoch_seconds)


def run_1pmb(
    d: Dataset,
    order: StreamOrder,
    config: SgdConfig,
    W: FeasibleSet,
    monitor: Optional[Monitor] = None,
) -> SolverOutput:
    """Single pass with mini-batches.

    The ``passes`` copies of the stream (the first in ``order``, later ones
    reshuffled) are concatenated and cut into epochs of ``buffer_size_s``
    points, giving ``ceil(n * passes / s)`` epochs.  Within an epoch points
    are evaluated in original index order.
    """
    n = len(d)
    if n == 0:
        raise InvalidInput("empty dataset")
    stream = np.concatenate([_pass_order(n, order, config.seed, p) for p in range(config.passes)])
    s = config.buffer_size_s
    st = _Stepper(d.dimension, config, W, monitor)
    for start in range(0, stream.size, s):
        idx = np.sort(stream[start : start + s])
        st.step(d.X[idx], d.y[idx])
    return st.output()


def run_2pmb(
    d: Dataset,
    order: StreamOrder,
    config: SgdConfig,
    W: FeasibleSet,
    monitor: Optional[Monitor] = None,
) -> SolverOutput:
    """Two passes with mini-batches.

    Pass one reservoir-samples up to ``s`` points of the rare class; pass
    two streams the other class in epochs of ``s`` and evaluates the
    surrogate on each epoch together with the fixed rare-class buffer.
    """
    perm = np.asarray(order.permutation)
    rare = config.rare_label
    if not (np.any(d.y == 1) and np.any(d.y == -1)):
        raise InvalidInput("two-pass method needs both positives and negatives")
    s = config.buffer_size_s
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0x2B]))
    buf = ReservoirBuffer(s)
    for i in perm:
        if d.y[i] == rare:
            reservoir_offer(buf, int(i), rng)
    rare_idx = np.asarray(buf.items, dtype=np.int64)

    common = np.concatenate(
        [q[d.y[q] != rare] for q in (_pass_order(len(d), order, config.seed, p) for p in range(config.passes))]
    )
    st = _Stepper(d.dimension, config, W, monitor)
    for start in range(0, common.size, s):
        idx = np.sort(np.concatenate([rare_idx, common[start : start + s]]))
        st.step(d.X[idx], d.y[idx])
    out = st.output()
    out.rare_buffer = rare_idx
    return out


def run_psg(
    d: Dataset,
    config: SgdConfig,
    W: FeasibleSet,
    monitor: Optional[Monitor] = None,
) -> SolverOutput:
    """Full-batch projected subgradient baseline; runs ``config.passes`` iterations."""
    if not satisfies(config.measure, d.y):
        raise InvalidInput(f"dataset does not meet the {config.measure.kind} preconditions")
    st = _Stepper(d.dimension, config, W, monitor)
    for _ in range(config.passes):
        st.step(d.X, d.y)
    return st.output()
