"""WEMM in recursive primal form.

The learner keeps ``w`` and ``Sigma = A^{-1}`` updated by the rank-one
recursions. ``A`` and ``b_vec`` are carried alongside purely as diagnostics
so the two representations can be cross-checked.
"""
import time
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DegenerateWeight, InputNormViolation, InvalidRegularizer
from .linalg import as_vec, symmetrize
from .trace import RunTrace

NORM_SLACK = 1e-12
DEGENERATE_TOL = 1e-12


@dataclass
class PrimalState:
    w: np.ndarray
    Sigma: np.ndarray
    A: np.ndarray
    b_vec: np.ndarray
    b_reg: float
    t: int = 0
    a_history: list = field(default_factory=list)

    @property
    def d(self):
        return self.w.shape[0]

    def copy(self):
        return PrimalState(
            self.w.copy(), self.Sigma.copy(), self.A.copy(), self.b_vec.copy(),
            self.b_reg, self.t, list(self.a_history),
        )


def init(d, b_reg):
    b_reg = float(b_reg)
    if not b_reg > 1.0:
        raise InvalidRegularizer(f"WEMM needs b > 1, got {b_reg}")
    d = int(d)
    return PrimalState(
        w=np.zeros(d),
        Sigma=np.eye(d) / b_reg,
        A=np.eye(d) * b_reg,
        b_vec=np.zeros(d),
        b_reg=b_reg,
    )


def _check_input(state, x):
    x = as_vec(x, state.d)
    nrm = float(np.sqrt(x @ x))
    if nrm > 1.0 + NORM_SLACK:
        raise InputNormViolation(f"||x|| = {nrm!r} > 1")
    return x


def predict(state, x):
    x = _check_input(state, x)
    return float(x @ state.w)


def weight_a(state, x):
    """Equality weight ``1 / (1 - x^T Sigma x)``."""
    x = _check_input(state, x)
    q = float(x @ state.Sigma @ x)
    if q >= 1.0 - DEGENERATE_TOL:
        raise DegenerateWeight(f"x^T Sigma x = {q!r} is not below 1")
    return 1.0 / (1.0 - q)


def update(state, x, y):
    """Advance ``state`` by one round in place and return it."""
    x = _check_input(state, x)
    y = float(y)
    if not np.isfinite(y):
        raise ValueError("label must be finite")
    a = weight_a(state, x)
    s = state.Sigma @ x
    state.w = state.w + (y - float(x @ state.w)) * s
    state.Sigma = symmetrize(state.Sigma - np.outer(s, s))
    state.A = symmetrize(state.A + a * np.outer(x, x))
    state.b_vec = state.b_vec + a * y * x
    state.t += 1
    state.a_history.append(a)
    return state


@dataclass
class PrimalRun:
    yhat: np.ndarray
    a: np.ndarray
    q: np.ndarray        # x_t^T A_{t-1}^{-1} x_t
    q_post: np.ndarray   # x_t^T A_t^{-1} x_t
    state: PrimalState


def run(X, y, b_reg, state=None):
    """Run WEMM over a whole stream using the selected backend loop."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    T, d = X.shape
    state = init(d, b_reg) if state is None else state.copy()
    norms = np.linalg.norm(X, axis=1) if T else np.zeros(0)
    if T and norms.max() > 1.0 + NORM_SLACK:
        bad = int(np.argmax(norms > 1.0 + NORM_SLACK))
        raise InputNormViolation(f"round {bad + 1}: ||x|| = {norms[bad]!r} > 1")
    Sigma = np.ascontiguousarray(state.Sigma.copy())
    w = state.w.copy()
    yhat, a, q, q_post = (np.zeros(T) for _ in range(4))
    failed = _backend.core.wemm_pass(X, y, Sigma, w, yhat, a, q, q_post)
    if failed >= 0:
        raise DegenerateWeight(f"round {failed + 1}: x^T Sigma x is not below 1")
    state.w = w
    state.Sigma = Sigma
    state.A = symmetrize(state.A + (X.T * a) @ X)
    state.b_vec = state.b_vec + X.T @ (a * y)
    state.t += T
    state.a_history.extend(a.tolist())
    return PrimalRun(yhat, a, q, q_post, state)


def run_trace(stream, b_reg, name="wemm"):
    start = time.perf_counter()
    result = run(stream.X, stream.y, b_reg)
    elapsed = (time.perf_counter() - start) * 1000.0
    trace = RunTrace(
        name=name, algorithm="wemm", y=stream.y.copy(), yhat=result.yhat,
        a=result.a, b_reg=float(b_reg), equality_weights=True, runtime_ms=elapsed,
    )
    trace.extra["state"] = result.state
    return trace
