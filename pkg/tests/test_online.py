import numpy as np
import pytest

from nondecomp.data import Dataset, FeasibleSet, InvalidInput, identity_order, shuffle
from nondecomp.dataio import SynthSpec, gen_synthetic
from nondecomp.losses import MeasureSpec, loss_value
from nondecomp.online import (
    FtrlConfig,
    PenaltyLedger,
    ftrl_step,
    instantaneous_penalty,
    minimize_loss,
    prefix_loss,
    regret_scale,
    run_ftrl,
    stability_check_prbep,
    stability_check_preck,
    stability_ratio,
)
from nondecomp.oracle import brute_force_structural

W = FeasibleSet(100.0)


def test_penalty_example():
    m = MeasureSpec.prec_at_k(0.5)
    both = brute_force_structural([[1.0], [0.5]], [1, -1], [1.0], m)
    prefix = brute_force_structural([[1.0]], [1], [1.0], m)
    assert (both, prefix) == (pytest.approx(1.0), pytest.approx(-1.0))
    pen = instantaneous_penalty([[1.0]], [1], [[0.5]], [-1], [1.0], m)
    assert pen == pytest.approx(2.0)


def test_penalty_empty_prefix():
    m = MeasureSpec.pauc(0.5)
    X = np.array([[1.0], [0.5], [-1.0]])
    y = np.array([1, -1, -1])
    pen = instantaneous_penalty(np.zeros((0, 1)), [], X, y, [0.3], m)
    assert pen == loss_value(m, X, y, [0.3])
    with pytest.raises(InvalidInput):
        instantaneous_penalty(X, y, np.zeros((0, 1)), [], [0.3], m)


@pytest.mark.parametrize("measure", [MeasureSpec.prec_at_k(0.3), MeasureSpec.prbep(), MeasureSpec.pauc(0.3), MeasureSpec.fmeasure()])
def test_telescoping(measure):
    rng = np.random.default_rng(5)
    X = rng.uniform(-1, 1, size=(30, 3)) / 2
    y = np.where(rng.random(30) < 0.3, 1, -1)
    w = rng.standard_normal(3)
    cuts = [0, 1, 4, 5, 17, 29, 30]
    total = sum(instantaneous_penalty(X[:a], y[:a], X[a:b], y[a:b], w, measure) for a, b in zip(cuts, cuts[1:]))
    assert total == pytest.approx(prefix_loss(measure, X, y, w).value, abs=1e-9)


def test_prefix_loss_conventions():
    w = np.array([1.0])
    assert prefix_loss(MeasureSpec.pauc(0.5), np.zeros((0, 1)), [], w).value == 0.0
    assert prefix_loss(MeasureSpec.pauc(0.5), [[1.0]], [1], w).value == 0.0
    # PRBEP with no positives: cardinality 0 gives -sum(z) - sum(y s) = -sum(s + 1) + sum(s) = -t
    assert prefix_loss(MeasureSpec.prbep(), [[0.5], [0.2]], [-1, -1], w).value == pytest.approx(-2.0)
    # F1 is 0 for every labelling, so the best labelling is all -1 when scores are negative
    assert prefix_loss(MeasureSpec.fmeasure(), [[-0.5]], [-1], w).value == pytest.approx(1.0)


def test_ledger():
    led = PenaltyLedger()
    led.charge(0.0, 2.0)
    led.charge(2.0, 1.5)
    assert led.penalties == [2.0, -0.5]
    assert led.cumulative_penalty == 1.5


def test_ftrl_step_empty_history():
    w, obj = ftrl_step(np.zeros((0, 4)), [], FtrlConfig(1.0, MeasureSpec.prbep()), W)
    np.testing.assert_array_equal(w, np.zeros(4))
    assert obj == 0.0


def test_ftrl_step_huge_eta_shrinks_to_origin():
    d = gen_synthetic(SynthSpec(60, 4, 0.3, seed=1))
    for m in (MeasureSpec.prec_at_k(0.3), MeasureSpec.pauc(0.5), MeasureSpec.fmeasure()):
        w, _ = ftrl_step(d.X, d.y, FtrlConfig(1e9, m), W)
        assert np.linalg.norm(w) <= 1e-3


def test_ftrl_step_one_dimensional_grid_oracle():
    X = np.array([[1.0], [-1.0]])
    y = np.array([1, -1])
    m = MeasureSpec.pauc(1.0)
    grid = np.arange(-5, 5, 1e-4)
    obj = np.maximum(0.0, 1 - 2 * grid) + grid**2 / 2
    w_star = grid[np.argmin(obj)]
    assert w_star == pytest.approx(0.5, abs=1e-4)
    w, achieved = ftrl_step(X, y, FtrlConfig(1.0, m, inner_iters=200), W)
    assert abs(w[0] - w_star) <= 1e-2
    assert achieved == pytest.approx(loss_value(m, X, y, w) + 0.5 * w[0] ** 2)


def test_ftrl_step_no_worse_than_origin():
    d = gen_synthetic(SynthSpec(80, 3, 0.25, seed=4))
    for m in (MeasureSpec.prec_at_k(0.25), MeasureSpec.prbep(), MeasureSpec.pauc(0.2), MeasureSpec.fmeasure()):
        _, obj = ftrl_step(d.X, d.y, FtrlConfig(0.5, m, inner_iters=50), W)
        assert obj <= loss_value(m, d.X, d.y, np.zeros(3)) + 1e-12


def test_minimize_loss_respects_radius():
    d = gen_synthetic(SynthSpec(50, 2, 0.5, separation=6, seed=0))
    w, _ = minimize_loss(MeasureSpec.prec_at_k(0.5), d.X, d.y, FeasibleSet(0.5), 100)
    assert np.linalg.norm(w) <= 0.5 + 1e-12


def test_stability_examples():
    rng = np.random.default_rng(2)
    X = rng.uniform(-0.5, 0.5, size=(10, 3))
    y = np.where(rng.random(10) < 0.5, 1, -1)
    y[0] = 1
    w = rng.standard_normal(3)
    assert stability_check_preck(X[:-1], y[:-1], X[-1], y[-1], w, w, 0.3) == 0.0
    for _ in range(50):
        w2 = rng.standard_normal(3) * 5
        assert stability_check_preck(X[:-1], y[:-1], X[-1], y[-1], w, w2, 0.3) <= 8
        assert stability_check_prbep(X[:-1], y[:-1], X[-1], y[-1], w, w2) <= 8
    assert stability_ratio(X[:-1], y[:-1], X[-1:], y[-1:], w, w + 1, MeasureSpec.prbep()) <= 8


def test_regret_scale():
    y = np.array([1, 1, -1, -1, -1])
    assert regret_scale(MeasureSpec.prec_at_k(0.4), y) == 5
    assert regret_scale(MeasureSpec.pauc(0.5, normalize=False), y) == pytest.approx(3.0)


def test_run_ftrl_single_batch():
    d = gen_synthetic(SynthSpec(20, 3, 0.3, seed=3))
    m = MeasureSpec.prec_at_k(0.3)
    run = run_ftrl(d, identity_order(d), FtrlConfig(1.0, m, inner_iters=20, batch_size_s=20), W)
    assert len(run.ledger.penalties) == 1
    assert run.ledger.penalties[0] == pytest.approx(loss_value(m, d.X, d.y, np.zeros(3)))
    np.testing.assert_array_equal(run.models[0], np.zeros(3))


def test_run_ftrl_partial_last_batch_and_average():
    d = gen_synthetic(SynthSpec(23, 2, 0.3, seed=8))
    cfg = FtrlConfig(2.0, MeasureSpec.prbep(), inner_iters=20, batch_size_s=5)
    run = run_ftrl(d, shuffle(d, 1), cfg, W)
    assert len(run.models) == 5
    np.testing.assert_allclose(run.averaged_model, np.mean(run.models, axis=0))
    assert run.report.T == 23
    assert run.report.regret_upper >= -1e-6


@pytest.mark.parametrize("measure", [MeasureSpec.prec_at_k(0.2), MeasureSpec.pauc(0.3), MeasureSpec.fmeasure()])
def test_regret_nonnegative(measure):
    d = gen_synthetic(SynthSpec(60, 3, 0.2, seed=6))
    run = run_ftrl(d, shuffle(d, 0), FtrlConfig(1.0, measure, inner_iters=30, batch_size_s=4), W)
    assert run.report.regret_upper >= -1e-6
    rep = run.report
    assert rep.regret_upper == pytest.approx(rep.avg_penalty - rep.batch_opt_loss)


def test_constant_stream_regret_decreases():
    n = 2000
    X = np.tile([[0.6, 0.8]], (n, 1))
    y = np.tile([1, -1], n // 2)
    d = Dataset.from_arrays(X, y)
    cfg = FtrlConfig(1.0, MeasureSpec.prec_at_k(0.5), inner_iters=30, batch_size_s=10)
    short = run_ftrl(d.subset(np.arange(250)), identity_order(250), cfg, W).report
    long = run_ftrl(d, identity_order(d), cfg, W).report
    assert long.regret_upper <= short.regret_upper + 1e-9


def test_config_validation():
    with pytest.raises(InvalidInput):
        FtrlConfig(0.0, MeasureSpec.prbep())
    with pytest.raises(InvalidInput):
        FtrlConfig(1.0, MeasureSpec.prbep(), batch_size_s=0)
