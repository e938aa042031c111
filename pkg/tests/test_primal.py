import numpy as np
import pytest

from helpers import accumulator_run, lstsq_optimum, make_stream
from wemm import primal
from wemm.errors import DegenerateWeight, InputNormViolation, InvalidRegularizer


def e(i, d=2):
    return np.eye(d)[i]


class TestInit:
    def test_d2_b2(self):
        s = primal.init(2, 2.0)
        np.testing.assert_array_equal(s.Sigma, np.diag([0.5, 0.5]))
        np.testing.assert_array_equal(s.w, [0.0, 0.0])

    def test_scalar(self):
        s = primal.init(1, 1.5)
        assert s.Sigma[0, 0] == pytest.approx(2 / 3)
        assert s.A[0, 0] == 1.5

    @pytest.mark.parametrize("b", [1.0, 0.5, -2.0])
    def test_rejects_b_at_most_one(self, b):
        with pytest.raises(InvalidRegularizer):
            primal.init(3, b)


def test_first_round_by_hand():
    s = primal.init(2, 2.0)
    assert primal.predict(s, e(0)) == 0.0
    assert primal.weight_a(s, e(0)) == pytest.approx(2.0)
    primal.update(s, e(0), 1.0)
    np.testing.assert_allclose(s.w, [0.5, 0.0])
    np.testing.assert_allclose(s.Sigma, np.diag([0.25, 0.5]))
    assert s.a_history == [pytest.approx(2.0)]
    assert primal.predict(s, e(0)) == pytest.approx(0.5)


def test_zero_input_is_noop():
    s = primal.init(2, 2.0)
    primal.update(s, e(0), 1.0)
    before = s.copy()
    primal.update(s, np.zeros(2), 5.0)
    assert s.t == 2 and s.a_history[-1] == 1.0
    np.testing.assert_array_equal(s.w, before.w)
    np.testing.assert_array_equal(s.Sigma, before.Sigma)


def test_norm_and_degeneracy_errors():
    s = primal.init(2, 2.0)
    with pytest.raises(InputNormViolation):
        primal.predict(s, np.array([1.0, 1.0]))
    s.Sigma = np.eye(2)  # forced breach of the b > 1 margin
    with pytest.raises(DegenerateWeight):
        primal.weight_a(s, e(0))
    with pytest.raises(InputNormViolation):
        primal.run(np.array([[2.0, 0.0]]), np.array([1.0]), 2.0)


@pytest.mark.parametrize("seed", range(5))
def test_matches_diagnostic_oracle(seed):
    stream, _ = make_stream(d=3, T=150, seed=seed, sigma=0.5)
    b = 1.5 + seed
    yhat, a, As = accumulator_run(stream.X, stream.y, b)
    run = primal.run(stream.X, stream.y, b)
    np.testing.assert_allclose(run.yhat, yhat, atol=1e-9)
    np.testing.assert_allclose(run.a, a, rtol=1e-12)
    st = run.state
    np.testing.assert_allclose(st.Sigma @ st.A, np.eye(3), atol=1e-7)
    np.testing.assert_allclose(st.w, st.Sigma @ st.b_vec, rtol=1e-7, atol=1e-12)
    np.testing.assert_allclose(st.A, As[-1], rtol=1e-12)


def test_stepwise_equals_batch_run():
    stream, _ = make_stream(d=2, T=60, seed=11, sigma=0.3)
    s = primal.init(2, 2.0)
    preds = []
    for x, y in zip(stream.X, stream.y):
        preds.append(primal.predict(s, x))
        primal.update(s, x, y)
        np.testing.assert_allclose(s.Sigma @ s.A, np.eye(2), atol=1e-7)
    run = primal.run(stream.X, stream.y, 2.0)
    np.testing.assert_allclose(preds, run.yhat, atol=1e-12)
    np.testing.assert_allclose(s.w, run.state.w, atol=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_weight_range(seed):
    b = (1.5, 2.0, 4.0, 1.1)[seed % 4]
    stream, _ = make_stream(kind="unit_sphere_edge", d=1 + seed % 4, T=200, seed=seed)
    a = primal.run(stream.X, stream.y, b).a
    assert a.min() >= 1.0 and a.max() <= b / (b - 1) * (1 + 1e-12)


def per_round_identities(stream, b):
    """Return the max violations of the min-max identity, the weight identity and the rank-one identity."""
    run = primal.run(stream.X, stream.y, b)
    a = run.a
    loss = (stream.y - run.yhat) ** 2
    phi_prev, worst_phi, worst_l2, worst_t2 = 0.0, 0.0, 0.0, 0.0
    A = b * np.eye(stream.d)
    for t in range(stream.T):
        x = stream.X[t]
        _, phi = lstsq_optimum(stream.X[: t + 1], stream.y[: t + 1], a[: t + 1], b)
        worst_phi = max(worst_phi, abs(loss[t] + phi_prev - phi) / (1 + abs(loss[t])))
        phi_prev = phi
        A_prev_inv = np.linalg.inv(A)
        A = A + a[t] * np.outer(x, x)
        A_inv = np.linalg.inv(A)
        qp, qn = x @ A_prev_inv @ x, x @ A_inv @ x
        left = a[t] ** 2 * qn + 1 - a[t]
        right = (1 + a[t] * qp - a[t]) / (1 + a[t] * qp)
        worst_l2 = max(worst_l2, abs(left - right))
        resid = A_inv @ (a[t] * np.outer(x, x)) @ A_prev_inv - (A_prev_inv - A_inv)
        worst_t2 = max(worst_t2, float(np.abs(resid).max()))
        assert np.linalg.eigvalsh(a[t] * np.outer(x, x)).min() >= -1e-12
    return worst_phi, worst_l2, worst_t2


@pytest.mark.parametrize("seed", range(3))
def test_per_round_identities(seed):
    stream, _ = make_stream(d=3, T=60, seed=100 + seed, sigma=1.0)
    phi, l2, t2 = per_round_identities(stream, 2.0)
    assert phi <= 1e-8 and l2 <= 1e-10 and t2 <= 1e-8
