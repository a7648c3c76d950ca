"""Core data types: labeled points, datasets, stream orders and the feasible set."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


class DimensionMismatch(ValueError):
    pass


class InvalidInput(ValueError):
    """Raised when data violates a measure's or solver's preconditions."""


@dataclass(frozen=True)
class LabeledPoint:
    features: Mapping[int, float]
    label: int

    def __post_init__(self):
        if self.label not in (-1, 1):
            raise InvalidInput(f"label must be -1 or +1, got {self.label!r}")
        for idx in self.features:
            if int(idx) < 1:
                raise InvalidInput(f"feature indices are 1-based, got {idx}")

    @property
    def max_index(self) -> int:
        return max(self.features, default=0)

    def norm(self) -> float:
        return float(np.sqrt(sum(v * v for v in self.features.values())))

    def to_dense(self, dim: int) -> np.ndarray:
        x = np.zeros(dim)
        for idx, val in self.features.items():
            if idx > dim:
                raise DimensionMismatch(f"feature index {idx} exceeds dimension {dim}")
            x[idx - 1] = val
        return x


@dataclass(frozen=True, eq=False)
class Dataset:
    """An ordered, immutable collection of labeled points.

    Points are kept sparse; ``X`` and ``y`` expose a dense view used by
    the numerical code (rows follow the original point order).
    """

    points: tuple[LabeledPoint, ...]
    dimension: int
    X: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)

    @classmethod
    def from_points(cls, points: Iterable[LabeledPoint], dimension: int | None = None) -> "Dataset":
        points = tuple(points)
        max_idx = max((p.max_index for p in points), default=0)
        dim = max_idx if dimension is None else int(dimension)
        if dim < max_idx:
            raise DimensionMismatch(f"dimension {dim} < largest feature index {max_idx}")
        X = np.zeros((len(points), dim))
        for r, p in enumerate(points):
            for idx, val in p.features.items():
                X[r, idx - 1] = val
        y = np.fromiter((p.label for p in points), dtype=np.int64, count=len(points))
        return cls._frozen(points, dim, X, y)

    @classmethod
    def from_arrays(cls, X: np.ndarray, y: Sequence[int]) -> "Dataset":
        X = np.array(np.atleast_2d(X), dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if X.shape[0] != y.shape[0]:
            raise DimensionMismatch(f"{X.shape[0]} rows but {y.shape[0]} labels")
        points = []
        for row, label in zip(X, y):
            nz = np.flatnonzero(row)
            points.append(LabeledPoint(dict(zip((nz + 1).tolist(), row[nz].tolist())), int(label)))
        return cls._frozen(tuple(points), X.shape[1], X, y.copy())

    @classmethod
    def _frozen(cls, points, dim, X, y) -> "Dataset":
        X.setflags(write=False)
        y.setflags(write=False)
        return cls(points, dim, X, y)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n_pos(self) -> int:
        return int(np.count_nonzero(self.y == 1))

    @property
    def n_neg(self) -> int:
        return int(np.count_nonzero(self.y == -1))

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset._frozen(
            tuple(self.points[i] for i in idx), self.dimension, self.X[idx].copy(), self.y[idx].copy()
        )

    def normalized(self) -> "Dataset":
        """Scale every point by the dataset's largest L2 norm so that max ||x|| <= 1."""
        if len(self) == 0:
            return self
        scale = float(np.max(np.linalg.norm(self.X, axis=1)))
        if scale == 0.0:
            return self
        points = tuple(
            LabeledPoint({k: v / scale for k, v in p.features.items()}, p.label)
            for p in self.points
        )
        return Dataset._frozen(points, self.dimension, self.X / scale, self.y.copy())


@dataclass(frozen=True)
class FeasibleSet:
    """L2 ball of the given radius centred at the origin."""

    radius: float = 100.0

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidInput(f"radius must be positive, got {self.radius}")


@dataclass(frozen=True, eq=False)
class StreamOrder:
    permutation: np.ndarray
    seed: int

    def __post_init__(self):
        perm = np.asarray(self.permutation)
        n = perm.size
        if n and not np.array_equal(np.sort(perm), np.arange(n)):
            raise InvalidInput("permutation is not a bijection on 0..n-1")

    def __len__(self) -> int:
        return int(np.asarray(self.permutation).size)


def score(w: np.ndarray, x: LabeledPoint) -> float:
    w = np.asarray(w, dtype=float)
    total = 0.0
    for idx, val in x.features.items():
        if idx > w.shape[0]:
            raise DimensionMismatch(f"feature index {idx} exceeds model dimension {w.shape[0]}")
        total += w[idx - 1] * val
    return float(total)


def scores(w: np.ndarray, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X)
    w = np.asarray(w, dtype=float)
    if X.ndim != 2 or X.shape[1] != w.shape[0]:
        raise DimensionMismatch(f"data has shape {X.shape}, model has dimension {w.shape[0]}")
    return X @ w


def project(w: np.ndarray, W: FeasibleSet) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    norm = float(np.linalg.norm(w))
    if norm <= W.radius:
        return w
    return w * (W.radius / norm)


def shuffle(d: Dataset | int, seed: int) -> StreamOrder:
    """Deterministic uniformly random permutation of the dataset indices."""
    n = d if isinstance(d, int) else len(d)
    rng = np.random.default_rng(seed)
    return StreamOrder(rng.permutation(n), seed)


def identity_order(d: Dataset | int) -> StreamOrder:
    n = d if isinstance(d, int) else len(d)
    return StreamOrder(np.arange(n), 0)
