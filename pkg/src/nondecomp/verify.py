"""Randomised checks of the fast surrogates against oracles and known inequalities.

Each check draws small random instances, compares a computed statistic
against its bound and reports the number of violations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import (
    FMEASURE,
    PAUC,
    PRBEP,
    PREC_AT_K,
    MeasureSpec,
    eval_pauc,
    evaluate,
)
from .metrics import raw_pauc
from .online import instantaneous_penalty, prefix_loss, stability_ratio
from .oracle import (
    brute_force_pauc,
    brute_force_structural,
    brute_force_top_beta,
    pairwise_auc,
    pairwise_hinge_auc,
)


@dataclass
class CheckResult:
    name: str
    trials: int
    violations: int
    worst: float  # largest observed statistic
    bound: float

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: trials={self.trials} violations={self.violations} "
            f"worst={self.worst:.3g} bound={self.bound:.3g}"
        )


def random_points(rng, t: int, d: int, tied: bool = False) -> np.ndarray:
    """``t`` points in the unit ball; ``tied`` snaps coordinates to a coarse grid."""
    if tied:
        X = rng.integers(-2, 3, size=(t, d)) / 2.0
        norms = np.linalg.norm(X, axis=1)
        return X / np.maximum(norms, 1.0)[:, None]
    X = rng.standard_normal((t, d))
    norms = np.maximum(np.linalg.norm(X, axis=1), 1e-300)
    return X * (rng.uniform(0.0, 1.0, size=t) / norms)[:, None]


def random_labels(rng, t: int, need_pos: bool = True, need_neg: bool = False) -> np.ndarray:
    y = rng.choice([-1, 1], size=t)
    slots = rng.permutation(t)
    if need_pos:
        y[slots[0]] = 1
    if need_neg:
        y[slots[-1]] = -1
    return y


def random_model(rng, d: int, max_norm: float, tied: bool = False) -> np.ndarray:
    if tied:
        return rng.integers(-2, 3, size=d).astype(float)
    w = rng.standard_normal(d)
    return w / np.linalg.norm(w) * rng.uniform(0, max_norm)


def random_measure(rng, kind: str) -> MeasureSpec:
    if kind == PREC_AT_K:
        return MeasureSpec.prec_at_k(float(rng.uniform(0.05, 0.95)))
    if kind == PRBEP:
        return MeasureSpec.prbep()
    if kind == PAUC:
        return MeasureSpec.pauc(float(rng.choice([rng.uniform(0.05, 1.0), 1.0])), normalize=bool(rng.integers(2)))
    return MeasureSpec.fmeasure()


def check_structural_oracle(trials: int, seed: int, kinds=(PREC_AT_K, PRBEP, FMEASURE)) -> list[CheckResult]:
    out = []
    for kind in kinds:
        rng = np.random.default_rng([seed, 1, len(kind)])
        worst, bad = 0.0, 0
        for trial in range(trials):
            t, d = int(rng.integers(1, 13)), int(rng.integers(1, 6))
            tied = trial % 4 == 0
            X = random_points(rng, t, d, tied)
            y = random_labels(rng, t, need_pos=kind != PREC_AT_K)
            w = random_model(rng, d, 5.0, tied)
            m = random_measure(rng, kind)
            gap = abs(evaluate(m, X, y, w).value - brute_force_structural(X, y, w, m))
            worst = max(worst, gap)
            bad += gap > 1e-9
        out.append(CheckResult(f"oracle-{kind}", trials, bad, worst, 1e-9))
    return out


def check_pauc_oracle(trials: int, seed: int) -> CheckResult:
    rng = np.random.default_rng([seed, 2])
    worst, bad = 0.0, 0
    for trial in range(trials):
        t, d = int(rng.integers(2, 51)), int(rng.integers(1, 6))
        tied = trial % 4 == 0
        X = random_points(rng, t, d, tied)
        y = random_labels(rng, t, need_pos=True, need_neg=True)
        w = random_model(rng, d, 5.0, tied)
        beta = float(rng.uniform(0.01, 1.0))
        fast = eval_pauc(X, y, w, beta, normalize=True)
        same_sel = np.array_equal(np.sort(fast.witness.selected), brute_force_top_beta(X, y, w, beta))
        gap = abs(fast.value - brute_force_pauc(X, y, w, beta, normalize=True))
        worst = max(worst, gap)
        bad += (gap > 1e-12) or not same_sel
    return CheckResult("oracle-pauc", trials, bad, worst, 1e-12)


def sorted_rank_gaps(X, c, w, w2, cap: float | None = None) -> np.ndarray:
    """Per-rank |g(z_(k)) - g(z'_(k))| for ``z = Xw - c`` sorted descending."""
    z = np.sort(X @ w - c)[::-1]
    z2 = np.sort(X @ w2 - c)[::-1]
    if cap is not None:
        z, z2 = np.minimum(z, cap), np.minimum(z2, cap)
    return np.abs(z - z2)


def check_rank_perturbation(trials: int, seed: int) -> CheckResult:
    rng = np.random.default_rng([seed, 3])
    worst, bad = 0.0, 0
    for _ in range(trials):
        t, d = int(rng.integers(1, 51)), int(rng.integers(1, 11))
        X = random_points(rng, t, d)
        w, w2 = random_model(rng, d, 10.0), random_model(rng, d, 10.0)
        c = rng.uniform(-2, 2, size=t)
        dist = float(np.linalg.norm(w - w2))
        for cap in (None, float(rng.uniform(-2, 2))):
            gaps = sorted_rank_gaps(X, c, w, w2, cap)
            ratio = float(gaps.max()) / dist if dist > 0 else 0.0
            worst = max(worst, ratio)
            bad += bool(np.any(gaps > 3 * dist + 1e-12))
    return CheckResult("rank-perturbation", trials, bad, worst, 3.0)


def check_stability(trials: int, seed: int, kind: str = PREC_AT_K) -> CheckResult:
    rng = np.random.default_rng([seed, 4, len(kind)])
    worst, bad = 0.0, 0
    for trial in range(trials):
        t, d = int(rng.integers(1, 51)), int(rng.integers(1, 11))
        tied = trial % 5 == 0
        X = random_points(rng, t, d, tied)
        y = random_labels(rng, t, need_pos=kind == PRBEP)
        w, w2 = random_model(rng, d, 10.0, tied), random_model(rng, d, 10.0)
        if trial % 3 == 0:
            w2 = w + rng.standard_normal(d) * 1e-3
        m = random_measure(rng, kind)
        ratio = stability_ratio(X[:-1], y[:-1], X[-1:], y[-1:], w, w2, m)
        worst = max(worst, ratio)
        bad += ratio > 8.0 + 1e-9
    return CheckResult(f"stability-{kind}", trials, bad, worst, 8.0)


def check_subgradients(trials: int, seed: int) -> list[CheckResult]:
    out = []
    for kind in (PREC_AT_K, PRBEP, PAUC, FMEASURE):
        rng = np.random.default_rng([seed, 5, len(kind)])
        worst, bad = 0.0, 0
        for trial in range(trials):
            t, d = int(rng.integers(2, 31)), int(rng.integers(1, 6))
            tied = trial % 4 == 0
            X = random_points(rng, t, d, tied)
            y = random_labels(rng, t, need_pos=kind != PREC_AT_K, need_neg=kind == PAUC)
            m = random_measure(rng, kind)
            w = random_model(rng, d, 5.0, tied)
            w2 = random_model(rng, d, 5.0) if trial % 2 else w + rng.standard_normal(d) * 0.05
            ev = evaluate(m, X, y, w)
            slack = ev.value + ev.subgradient @ (w2 - w) - evaluate(m, X, y, w2).value
            worst = max(worst, slack)
            bad += slack > 1e-8
        out.append(CheckResult(f"subgradient-{kind}", trials, bad, worst, 1e-8))
    return out


def check_telescoping(trials: int, seed: int) -> list[CheckResult]:
    out = []
    for kind in (PREC_AT_K, PRBEP, PAUC, FMEASURE):
        rng = np.random.default_rng([seed, 6, len(kind)])
        worst, bad = 0.0, 0
        for _ in range(trials):
            t, d = int(rng.integers(1, 41)), int(rng.integers(1, 6))
            X = random_points(rng, t, d)
            y = random_labels(rng, t, need_pos=False)
            w = random_model(rng, d, 5.0)
            m = random_measure(rng, kind)
            cuts = np.sort(rng.choice(np.arange(1, t), size=int(rng.integers(0, t)), replace=False)) if t > 1 else []
            bounds = [0, *map(int, cuts), t]
            total = sum(
                instantaneous_penalty(X[:a], y[:a], X[a:b], y[a:b], w, m) for a, b in zip(bounds, bounds[1:])
            )
            gap = abs(total - prefix_loss(m, X, y, w).value)
            worst = max(worst, gap)
            bad += gap > 1e-9
        out.append(CheckResult(f"telescoping-{kind}", trials, bad, worst, 1e-9))
    return out


def check_beta_one(trials: int, seed: int) -> CheckResult:
    rng = np.random.default_rng([seed, 7])
    bad, worst = 0, 0.0
    for trial in range(trials):
        t, d = int(rng.integers(2, 51)), int(rng.integers(1, 6))
        tied = trial % 4 == 0
        X = random_points(rng, t, d, tied)
        y = random_labels(rng, t, need_pos=True, need_neg=True)
        w = random_model(rng, d, 5.0, tied)
        raw_ok = raw_pauc(X, y, w, 1.0).value == pairwise_auc(X, y, w)
        ref = pairwise_hinge_auc(X, y, w)
        gap = abs(eval_pauc(X, y, w, 1.0, normalize=False).value - ref) / max(1.0, abs(ref))
        worst = max(worst, gap)
        bad += (not raw_ok) or gap > 1e-12
    return CheckResult("beta-one", trials, bad, worst, 1e-12)


def run_all(trials: int = 200, seed: int = 0) -> list[CheckResult]:
    results = []
    results += check_structural_oracle(trials, seed)
    results.append(check_pauc_oracle(trials, seed))
    results.append(check_rank_perturbation(trials, seed))
    results.append(check_stability(trials, seed, PREC_AT_K))
    results.append(check_stability(trials, seed, PRBEP))
    results += check_subgradients(trials, seed)
    results += check_telescoping(trials, seed)
    results.append(check_beta_one(trials, seed))
    return results

