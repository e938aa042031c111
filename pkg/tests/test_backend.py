"""The compiled core and the numpy fallback must agree."""
import numpy as np
import pytest

from helpers import make_stream
from wemm import _backend, _pure

if not _backend.COMPILED:
    pytest.skip("compiled core not built", allow_module_level=True)

from wemm import _core  # noqa: E402


def both(fn_name, *arrays_and_scalars):
    out = []
    for mod in (_core, _pure):
        args = [a.copy() if isinstance(a, np.ndarray) else a for a in arrays_and_scalars]
        ret = getattr(mod, fn_name)(*args)
        out.append((ret, args))
    return out


@pytest.mark.parametrize("seed", range(3))
def test_wemm_pass(seed):
    stream, _ = make_stream(d=4, T=300, seed=seed, sigma=0.5)
    T, d = stream.T, stream.d
    res = both("wemm_pass", stream.X, stream.y, np.eye(d) / 2, np.zeros(d),
               np.zeros(T), np.zeros(T), np.zeros(T), np.zeros(T))
    (r1, a1), (r2, a2) = res
    assert r1 == r2 == -1
    for x, y in zip(a1[2:], a2[2:]):
        np.testing.assert_allclose(x, y, rtol=1e-11, atol=1e-13)


def test_wemm_pass_reports_degenerate_row():
    X = np.array([[0.0, 0.5], [1.0, 0.0]])
    res = both("wemm_pass", X, np.ones(2), np.eye(2), np.zeros(2), *[np.zeros(2)] * 4)
    assert res[0][0] == res[1][0] == 1


@pytest.mark.parametrize("mode", [_backend.RIDGE, _backend.AAR, _backend.AROWR, _backend.RLS])
def test_second_order_pass(mode):
    stream, _ = make_stream(d=3, T=200, seed=mode, sigma=0.3)
    res = both("second_order_pass", mode, stream.X, stream.y, np.eye(3), np.zeros(3), 0.9, np.zeros(stream.T))
    (_, a1), (_, a2) = res
    for x, y in zip(a1[3:], a2[3:]):
        if isinstance(x, np.ndarray):
            np.testing.assert_allclose(x, y, rtol=1e-11, atol=1e-13)


def test_kernel_step():
    stream, _ = make_stream(d=2, T=60, seed=1)
    n_max = stream.T
    states = []
    for mod in (_core, _pure):
        beta, alpha = np.zeros((n_max, n_max)), np.zeros(n_max)
        preds = []
        for n in range(stream.T):
            kvec = np.zeros(n + 1)
            kvec[:n] = stream.X[:n] @ stream.X[n]
            preds.append(mod.kernel_step(beta, alpha, kvec, n, stream.y[n], 0.5))
        states.append((np.array(preds), alpha, beta))
    for x, y in zip(*states):
        np.testing.assert_allclose(x, y, rtol=1e-11, atol=1e-13)
