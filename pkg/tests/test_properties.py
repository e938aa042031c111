import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wemm import baselines, bounds, kernel, oracle, primal
from wemm.stream import Stream, read_stream_csv, write_stream_csv

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def unit_streams(draw, max_T=25, max_d=4):
    d = draw(st.integers(1, max_d))
    T = draw(st.integers(1, max_T))
    raw = draw(arrays(np.float64, (T, d), elements=st.floats(-1, 1, allow_nan=False)))
    scale = draw(arrays(np.float64, T, elements=st.floats(0, 1)))
    norms = np.linalg.norm(raw, axis=1)
    X = np.where(norms[:, None] > 0, raw / np.maximum(norms, 1e-300)[:, None] * scale[:, None], 0.0)
    X *= 1 - 1e-15
    y = draw(arrays(np.float64, T, elements=finite))
    return Stream(X, y)


b_values = st.floats(1.05, 10.0)


@settings(max_examples=60, deadline=None)
@given(unit_streams(), b_values)
def test_loss_identity_and_weight_range(stream, b):
    trace = primal.run_trace(stream, b)
    comp = oracle.comparator_report(stream, trace.a, b)
    rep = bounds.certify_loss_identity(trace, comp, stream, rel_tol=1e-6)
    assert rep.passed, rep.to_dict()
    assert trace.a.min() >= 1.0 and trace.a.max() <= b / (b - 1) * (1 + 1e-12)
    assert bounds.certify_log_det_sum(trace, stream).passed


@settings(max_examples=60, deadline=None)
@given(unit_streams(), b_values)
def test_sigma_inverts_accumulator(stream, b):
    st_ = primal.run(stream.X, stream.y, b).state
    np.testing.assert_allclose(st_.Sigma @ st_.A, np.eye(stream.d), atol=1e-7)
    eig = np.linalg.eigvalsh(st_.Sigma)
    assert eig.min() > 0 and eig.max() <= 1 / b * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(unit_streams(max_T=15, max_d=3), b_values)
def test_linear_kernel_equivalence(stream, b):
    yhat = primal.run(stream.X, stream.y, b).yhat
    dual = kernel.init(stream.d, b)
    preds = [kernel.kernel_update(dual, x, y) for x, y in zip(stream.X, stream.y)]
    scale = 1 + np.abs(stream.y).max()
    np.testing.assert_allclose(preds, yhat, atol=1e-9 * scale)
    np.testing.assert_allclose(dual.beta, dual.beta.T, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(unit_streams(), st.floats(0.1, 10.0), st.sampled_from(sorted(baselines.TAGS)))
def test_baseline_sigma_stays_spd(stream, b, tag):
    trace = baselines.run_trace(stream, tag, b, 0.97 if tag == "rls" else 1.5)
    assert np.all(np.isfinite(trace.yhat))
    assert np.linalg.eigvalsh(trace.extra["state"].Sigma).min() > 0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(1, 5)), min_size=1, max_size=30), st.floats(0.01, 10))
def test_stacking_property(pairs, S):
    fractions, a = map(np.array, zip(*pairs))
    losses = fractions * S
    assert bounds.check_stacking(losses, a, S)


@settings(max_examples=50, deadline=None)
@given(unit_streams())
def test_csv_round_trip(tmp_path_factory, stream):
    path = tmp_path_factory.mktemp("rt") / "s.csv"
    write_stream_csv(stream, path)
    back = read_stream_csv(path)
    assert back.X.tobytes() == stream.X.tobytes() and back.y.tobytes() == stream.y.tobytes()
