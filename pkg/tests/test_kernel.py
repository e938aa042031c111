import time

import numpy as np
import pytest

from helpers import make_stream
from wemm import kernel, primal
from wemm.errors import InvalidParameter, InvalidRegularizer
from wemm.kernel import KernelSpec


class TestKernelEval:
    def test_linear(self):
        assert kernel.kernel_eval(KernelSpec(), [1.0, 0.0], [1.0, 0.0]) == 1.0

    def test_rbf_zero_distance(self):
        x = [0.3, -0.2]
        assert kernel.kernel_eval(KernelSpec("rbf", gamma=1.0), x, x) == 1.0

    def test_polynomial(self):
        spec = KernelSpec("polynomial", degree=2, offset=1.0)
        assert kernel.kernel_eval(spec, [1.0, 0.0], [0.0, 1.0]) == 1.0

    def test_bad_specs(self):
        for kw in ({"kind": "sigmoid"}, {"kind": "rbf", "gamma": 0.0},
                   {"kind": "polynomial", "degree": 0}, {"kind": "polynomial", "offset": -1.0}):
            with pytest.raises(InvalidParameter):
                KernelSpec(**kw)
        with pytest.raises(InvalidParameter):
            kernel.kernel_eval(KernelSpec(), [1.0], [1.0, 2.0])

    def test_dict_round_trip(self):
        for spec in (KernelSpec(), KernelSpec("rbf", gamma=0.5), KernelSpec("polynomial", 3, 1.0)):
            assert KernelSpec.from_dict(spec.to_dict()) == spec


def test_first_round_by_hand():
    s = kernel.init(2, 2.0)
    assert kernel.kernel_predict(s, [0.1, 0.2]) == 0.0
    kernel.kernel_update(s, [1.0, 0.0], 3.0)
    np.testing.assert_allclose(s.alpha, [1.5])
    np.testing.assert_allclose(s.beta, [[-0.25]])


def test_rbf_single_example():
    s = kernel.init(2, 2.0, KernelSpec("rbf", gamma=1.0))
    x = np.array([0.4, -0.7])
    kernel.kernel_update(s, x, 1.0)
    assert kernel.kernel_predict(s, x) == pytest.approx(0.5)


def test_zero_residual_round():
    s = kernel.init(2, 2.0)
    kernel.kernel_update(s, [1.0, 0.0], 1.0)
    x = np.array([0.6, 0.3])
    alpha0, beta0 = s.alpha.copy(), s.beta.copy()
    kernel.kernel_update(s, x, kernel.kernel_predict(s, x))
    np.testing.assert_allclose(s.alpha[:1], alpha0, atol=1e-15)
    assert s.alpha[1] == pytest.approx(0.0, abs=1e-15)
    assert not np.allclose(s.beta[:1, :1], beta0)


def test_invalid_regularizer():
    with pytest.raises(InvalidRegularizer):
        kernel.init(2, 1.0)


@pytest.mark.parametrize("seed", range(3))
def test_linear_kernel_matches_primal(seed):
    stream, _ = make_stream(d=3, T=200, seed=seed, sigma=0.2)
    dual = kernel.init(3, 2.0)
    ps = primal.init(3, 2.0)
    for x, y in zip(stream.X, stream.y):
        assert kernel.kernel_update(dual, x, y) == pytest.approx(primal.predict(ps, x), abs=1e-8)
        primal.update(ps, x, y)
    w, Sigma = dual.implied_weights()
    np.testing.assert_allclose(w, ps.w, atol=1e-8)
    np.testing.assert_allclose(Sigma, ps.Sigma, atol=1e-7)
    np.testing.assert_allclose(dual.beta, dual.beta.T, atol=1e-10)


def test_capacity_growth_keeps_state():
    stream, _ = make_stream(d=2, T=150, seed=4)
    s = kernel.DualState(2, 2.0, capacity=1)
    ref = kernel.run_trace(stream, 2.0)
    preds = [kernel.kernel_update(s, x, y) for x, y in zip(stream.X, stream.y)]
    np.testing.assert_allclose(preds, ref.yhat, atol=1e-13)


def _update_time(state, xs, ys):
    times = []
    for x, y in zip(xs, ys):
        start = time.perf_counter()
        kernel.kernel_update(state, x, y)
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def test_update_cost_is_quadratic():
    stream, _ = make_stream(d=3, T=1030, seed=2)
    s = kernel.DualState(3, 2.0, KernelSpec("rbf", gamma=0.5), capacity=1100)
    X, y = stream.X, stream.y
    for t in range(200):
        kernel.kernel_update(s, X[t], y[t])
    early = _update_time(s, X[200:215], y[200:215])
    for t in range(215, 1000):
        kernel.kernel_update(s, X[t], y[t])
    late = _update_time(s, X[1000:1015], y[1000:1015])
    assert late < 50 * early
