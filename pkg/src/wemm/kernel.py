"""Kernel WEMM: the same learner written in dual coefficients.

``w_t = sum_i alpha_i x_i`` and ``Sigma_t = sum_jk beta_jk x_j x_k^T + I/b``,
with every update expressed through kernel evaluations. The double sums of
the beta update collapse to the outer product of ``g = beta @ k``, so a round
costs O(t^2).
"""
import math
import time
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import InvalidParameter, InvalidRegularizer
from .trace import RunTrace


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"
    degree: int = 2
    offset: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "polynomial", "rbf"):
            raise InvalidParameter(f"unknown kernel {self.kind!r}")
        if self.kind == "polynomial" and (int(self.degree) != self.degree or self.degree < 1 or self.offset < 0):
            raise InvalidParameter("polynomial kernel needs integer degree >= 1 and offset >= 0")
        if self.kind == "rbf" and not self.gamma > 0:
            raise InvalidParameter("rbf kernel needs gamma > 0")

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    def to_dict(self):
        if self.kind == "linear":
            return {"kind": "linear"}
        if self.kind == "polynomial":
            return {"kind": "polynomial", "degree": self.degree, "offset": self.offset}
        return {"kind": "rbf", "gamma": self.gamma}

    def gram_row(self, support, x):
        """``K(x_i, x)`` for every row of ``support``."""
        if self.kind == "linear":
            return support @ x
        if self.kind == "polynomial":
            return (support @ x + self.offset) ** self.degree
        diff = support - x
        return np.exp(-self.gamma * np.einsum("ij,ij->i", diff, diff))


def kernel_eval(spec, x, z):
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape:
        raise InvalidParameter("kernel arguments differ in dimension")
    return float(spec.gram_row(z[None, :], x)[0])


class DualState:
    """Growing dual coefficients; arrays are over-allocated and doubled on demand."""

    def __init__(self, d, b_reg, spec=KernelSpec(), capacity=64):
        b_reg = float(b_reg)
        if not b_reg > 1.0:
            raise InvalidRegularizer(f"Kernel WEMM needs b > 1, got {b_reg}")
        self.d = int(d)
        self.b_reg = b_reg
        self.spec = spec
        self.t = 0
        self._alpha = np.zeros(capacity)
        self._beta = np.zeros((capacity, capacity))
        self._support = np.zeros((capacity, self.d))

    @property
    def alpha(self):
        return self._alpha[: self.t]

    @property
    def beta(self):
        return self._beta[: self.t, : self.t]

    @property
    def support(self):
        return self._support[: self.t]

    def _grow(self):
        cap = self._alpha.shape[0]
        if self.t + 1 <= cap:
            return
        new = 2 * cap
        alpha = np.zeros(new)
        alpha[:cap] = self._alpha
        beta = np.zeros((new, new))
        beta[:cap, :cap] = self._beta
        support = np.zeros((new, self.d))
        support[:cap] = self._support
        self._alpha, self._beta, self._support = alpha, beta, support

    def implied_weights(self):
        """Primal ``w`` and ``Sigma`` (only meaningful for the linear kernel)."""
        S = self.support
        w = S.T @ self.alpha
        Sigma = S.T @ self.beta @ S + np.eye(self.d) / self.b_reg
        return w, Sigma


def init(d, b_reg, spec=KernelSpec()):
    return DualState(d, b_reg, spec)


def kernel_predict(state, x):
    if state.t == 0:
        return 0.0
    x = np.asarray(x, dtype=np.float64)
    return float(state.alpha @ state.spec.gram_row(state.support, x))


def kernel_update(state, x, y):
    """Advance ``state`` by one round in place; returns the prediction made before the update."""
    x = np.asarray(x, dtype=np.float64)
    y = float(y)
    if not (np.all(np.isfinite(x)) and math.isfinite(y)):
        raise InvalidParameter("non-finite input")
    state._grow()
    n = state.t
    kvec = np.zeros(n + 1)
    if n:
        kvec[:n] = state.spec.gram_row(state.support, x)
    pred = _backend.core.kernel_step(state._beta, state._alpha, kvec, n, y, 1.0 / state.b_reg)
    state._support[n] = x
    state.t = n + 1
    return pred


def run_trace(stream, b_reg, spec=KernelSpec(), name="kernel_wemm"):
    start = time.perf_counter()
    state = DualState(stream.d, b_reg, spec, capacity=max(1, stream.T))
    yhat = np.zeros(stream.T)
    for t in range(stream.T):
        yhat[t] = kernel_update(state, stream.X[t], stream.y[t])
    elapsed = (time.perf_counter() - start) * 1000.0
    trace = RunTrace(name=name, algorithm="kernel_wemm", y=stream.y.copy(), yhat=yhat,
                     b_reg=float(b_reg), runtime_ms=elapsed)
    trace.extra["state"] = state
    return trace
