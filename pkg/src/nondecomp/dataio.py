"""LIBSVM reading/writing, synthetic data, train/test splits, model and trace files."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

from .data import Dataset, InvalidInput, LabeledPoint
from .solvers import TraceRow

TRACE_HEADER = ["wall_clock_ms", "epoch", "train_surrogate", "test_measure"]


class ParseError(ValueError):
    def __init__(self, line_no: int, msg: str):
        super().__init__(f"line {line_no}: {msg}")
        self.line_no = line_no


def parse_libsvm(lines: Iterable[str], normalize: bool = True) -> Dataset:
    """Read ``<label> <idx>:<val> ...`` lines into a dataset.

    Labels greater than zero map to +1, everything else to -1.  Indices
    must be 1-based and strictly ascending within a line.  Blank lines and
    ``#`` comments are skipped.
    """
    points = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = 1 if float(tokens[0]) > 0 else -1
        except ValueError:
            raise ParseError(line_no, f"bad label {tokens[0]!r}") from None
        feats: dict[int, float] = {}
        prev = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise ParseError(line_no, f"malformed token {tok!r}")
            try:
                idx, val = int(idx_s), float(val_s)
            except ValueError:
                raise ParseError(line_no, f"malformed token {tok!r}") from None
            if idx < 1:
                raise ParseError(line_no, f"feature index {idx} is not positive")
            if idx == prev:
                raise ParseError(line_no, f"duplicate index {idx}")
            if idx < prev:
                raise ParseError(line_no, f"index {idx} after {prev} is not ascending")
            prev = idx
            if val != 0.0:
                feats[idx] = val
        points.append(LabeledPoint(feats, label))
    d = Dataset.from_points(points)
    return d.normalized() if normalize else d


def read_libsvm(path, normalize: bool = True) -> Dataset:
    with open(path) as fh:
        return parse_libsvm(fh, normalize=normalize)


def write_libsvm(d: Dataset, fh: TextIO) -> None:
    for p in d.points:
        feats = " ".join(f"{i}:{v!r}" for i, v in sorted(p.features.items()))
        fh.write(f"{p.label:+d} {feats}".rstrip() + "\n")


@dataclass(frozen=True)
class SynthSpec:
    n: int
    dim: int
    pos_fraction: float
    separation: float = 2.0
    noise: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.pos_fraction < 1:
            raise InvalidInput("pos_fraction must lie in (0, 1)")
        if self.n * self.pos_fraction < 1:
            raise InvalidInput("expected positive count n * pos_fraction must be at least 1")
        if self.dim < 1:
            raise InvalidInput("dim must be at least 1")
        if self.separation < 0 or self.noise < 0:
            raise InvalidInput("separation and noise must be non-negative")


def gen_synthetic(spec: SynthSpec) -> Dataset:
    """Two isotropic Gaussian clouds ``separation`` apart along a random unit direction.

    The positive count is ``round(n * pos_fraction)``; labels are shuffled,
    and the result is scaled so that the largest point norm is 1.
    """
    rng = np.random.default_rng(spec.seed)
    n_pos = max(1, int(round(spec.n * spec.pos_fraction)))
    y = -np.ones(spec.n, dtype=np.int64)
    y[:n_pos] = 1
    rng.shuffle(y)
    u = rng.standard_normal(spec.dim)
    u /= np.linalg.norm(u)
    X = spec.noise * rng.standard_normal((spec.n, spec.dim))
    X += 0.5 * spec.separation * y[:, None] * u[None, :]
    return Dataset.from_arrays(X, y).normalized()


def stratified_split(d: Dataset, train_fraction: float, seed: int):
    """Deterministic per-class split; returns ``(train, test)``."""
    if not 0 < train_fraction < 1:
        raise InvalidInput("train fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for label in (1, -1):
        idx = np.flatnonzero(d.y == label)
        idx = idx[rng.permutation(idx.size)]
        cut = int(round(train_fraction * idx.size))
        train_idx.append(idx[:cut])
        test_idx.append(idx[cut:])
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    return d.subset(train), d.subset(test)


def save_model(w: np.ndarray, fh: TextIO) -> None:
    w = np.asarray(w, dtype=float)
    fh.write(f"{w.size}\n")
    fh.write(" ".join(f"{v:.17g}" for v in w) + "\n")


def load_model(fh: TextIO) -> np.ndarray:
    lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ParseError(1, "empty model file")
    try:
        dim = int(lines[0])
        coords = np.array([float(v) for v in lines[1].split()]) if len(lines) > 1 else np.zeros(0)
    except ValueError as exc:
        raise ParseError(2, str(exc)) from None
    if coords.size != dim:
        raise ParseError(2, f"expected {dim} coordinates, found {coords.size}")
    return coords


def write_trace(rows: Iterable[TraceRow], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for r in rows:
        writer.writerow([r.wall_clock_ms, r.epoch, repr(float(r.train_surrogate)), repr(float(r.test_measure))])


def read_trace(fh: TextIO) -> list[TraceRow]:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header != TRACE_HEADER:
        raise ParseError(1, f"unexpected trace header {header}")
    return [TraceRow(int(a), int(b), float(c), float(d)) for a, b, c, d in reader]
