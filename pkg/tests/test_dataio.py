import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nondecomp.data import InvalidInput, scores
from nondecomp.dataio import (
    TRACE_HEADER,
    ParseError,
    SynthSpec,
    gen_synthetic,
    load_model,
    parse_libsvm,
    read_trace,
    save_model,
    stratified_split,
    write_libsvm,
    write_trace,
)
from nondecomp.data import FeasibleSet
from nondecomp.losses import MeasureSpec
from nondecomp.metrics import raw_pauc
from nondecomp.solvers import SgdConfig, TraceRow, run_psg


def test_parse_examples():
    d = parse_libsvm(["-1 3:0.5 7:1.2"], normalize=False)
    assert d.points[0].label == -1
    assert d.points[0].features == {3: 0.5, 7: 1.2}
    assert d.dimension == 7
    assert parse_libsvm(["0 1:1"]).y.tolist() == [-1]
    assert parse_libsvm(["+1 1:1", "", "# comment", "2 2:1"]).y.tolist() == [1, 1]


@pytest.mark.parametrize(
    "lines, line_no, text",
    [
        (["+1 2:1 2:2"], 1, "duplicate"),
        (["+1 1:1", "-1 3:1 2:1"], 2, "ascending"),
        (["+1 1:1", "-1 1:1", "x 1:2"], 3, "label"),
        (["+1 1=2"], 1, "malformed"),
        (["+1 a:2"], 1, "malformed"),
        (["+1 0:2"], 1, "positive"),
    ],
)
def test_parse_errors(lines, line_no, text):
    with pytest.raises(ParseError) as exc:
        parse_libsvm(lines)
    assert exc.value.line_no == line_no
    assert text in str(exc.value)
    assert f"line {line_no}" in str(exc.value)


def test_parse_normalizes():
    d = parse_libsvm(["+1 1:3 2:4", "-1 1:1"])
    assert np.max(np.linalg.norm(d.X, axis=1)) == pytest.approx(1.0)


def test_libsvm_round_trip():
    d = gen_synthetic(SynthSpec(30, 4, 0.3, seed=2))
    buf = io.StringIO()
    write_libsvm(d, buf)
    back = parse_libsvm(buf.getvalue().splitlines(), normalize=False)
    np.testing.assert_array_equal(back.X, d.X)
    np.testing.assert_array_equal(back.y, d.y)


def test_synthetic_determinism_and_counts():
    spec = SynthSpec(500, 5, 0.1, seed=4)
    a, b = gen_synthetic(spec), gen_synthetic(spec)
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.y, b.y)
    assert a.n_pos == 50
    assert np.max(np.linalg.norm(a.X, axis=1)) == pytest.approx(1.0)
    c = gen_synthetic(SynthSpec(500, 5, 0.1, seed=5))
    assert not np.array_equal(a.X, c.X)


def test_synthetic_validation():
    with pytest.raises(InvalidInput):
        SynthSpec(10, 2, 1.0)
    with pytest.raises(InvalidInput):
        SynthSpec(10, 2, 0.01)
    with pytest.raises(InvalidInput):
        SynthSpec(10, 0, 0.5)


def test_no_separation_gives_chance_pauc():
    values = []
    for seed in range(5):
        d = gen_synthetic(SynthSpec(10_000, 5, 0.3, separation=0.0, seed=seed))
        w = np.random.default_rng(seed + 100).standard_normal(5)
        values.append(raw_pauc(d.X, d.y, w, 1.0).value)
    assert abs(np.mean(values) - 0.5) <= 0.05


def test_large_separation_psg_is_near_perfect():
    d = gen_synthetic(SynthSpec(2000, 5, 0.2, separation=10.0, noise=1.0, seed=1))
    m = MeasureSpec.pauc(0.1)
    out = run_psg(d, SgdConfig(10.0, len(d), m, passes=50), FeasibleSet(100.0))
    assert raw_pauc(d.X, d.y, out.averaged_model, 0.1).value >= 0.99


def test_stratified_split():
    d = gen_synthetic(SynthSpec(1001, 3, 0.07, seed=3))
    tr, te = stratified_split(d, 0.7, seed=1)
    assert len(tr) + len(te) == len(d)
    assert abs(tr.n_pos - 0.7 * d.n_pos) <= 1
    assert abs(tr.n_neg - 0.7 * d.n_neg) <= 1
    # class proportions preserved within one percentage point
    assert abs(tr.n_pos / len(tr) - d.n_pos / len(d)) <= 0.01
    assert abs(te.n_pos / len(te) - d.n_pos / len(d)) <= 0.01
    tr2, _ = stratified_split(d, 0.7, seed=1)
    np.testing.assert_array_equal(tr.X, tr2.X)
    with pytest.raises(InvalidInput):
        stratified_split(d, 1.0, seed=1)


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_model_round_trip(coords):
    w = np.array(coords)
    buf = io.StringIO()
    save_model(w, buf)
    buf.seek(0)
    back = load_model(buf)
    np.testing.assert_array_equal(back, w)


def test_model_round_trip_scores():
    d = gen_synthetic(SynthSpec(20, 3, 0.3, seed=0))
    w = np.random.default_rng(0).standard_normal(3) / 3
    buf = io.StringIO()
    save_model(w, buf)
    buf.seek(0)
    np.testing.assert_array_equal(scores(load_model(buf), d.X), scores(w, d.X))


def test_model_parse_errors():
    for text in ("", "3\n1 2\n", "x\n1\n"):
        with pytest.raises(ParseError):
            load_model(io.StringIO(text))


def test_trace_round_trip():
    rows = [TraceRow(0, 0, 1.0, 0.5), TraceRow(12, 1, 0.1 + 0.2, 1 / 3), TraceRow(30, 2, float("nan"), 0.0)]
    buf = io.StringIO()
    write_trace(rows, buf)
    assert buf.getvalue().splitlines()[0] == ",".join(TRACE_HEADER)
    buf.seek(0)
    back = read_trace(buf)
    assert back[:2] == rows[:2]
    assert np.isnan(back[2].train_surrogate)
    with pytest.raises(ParseError):
        read_trace(io.StringIO("a,b\n"))
