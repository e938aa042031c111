"""Second-order baselines sharing the WEMM learner shape.

``ridge``, ``aar`` (Vovk's aggregating algorithm, the uniform-weight
last-step min-max predictor), ``arowr`` and ``rls`` (exponential
forgetting). Sigma is always kept as the inverse via Sherman-Morrison.
"""
import time
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import InvalidParameter
from .linalg import as_vec, symmetrize
from .trace import RunTrace

TAGS = {"ridge": _backend.RIDGE, "aar": _backend.AAR, "arowr": _backend.AROWR, "rls": _backend.RLS}


@dataclass
class BaselineState:
    tag: str
    w: np.ndarray
    Sigma: np.ndarray
    r: float
    b_reg: float
    t: int = 0

    @property
    def mode(self):
        return TAGS[self.tag]


def baseline_init(tag, d, b_reg, r=1.0):
    if tag not in TAGS:
        raise InvalidParameter(f"unknown baseline {tag!r}")
    b_reg, r = float(b_reg), float(r)
    if not b_reg > 0:
        raise InvalidParameter("b must be > 0")
    if not r > 0:
        raise InvalidParameter("r must be > 0")
    if tag == "rls" and r > 1:
        raise InvalidParameter("RLS forgetting factor must satisfy 0 < r <= 1")
    return BaselineState(tag, np.zeros(int(d)), np.eye(int(d)) / b_reg, r, b_reg)


def baseline_predict(state, x):
    x = as_vec(x, state.w.shape[0])
    margin = float(x @ state.w)
    if state.tag == "aar":
        return margin / (1.0 + float(x @ state.Sigma @ x))
    return margin


def baseline_update(state, x, y):
    """One round in place; returns ``state``."""
    x = as_vec(x, state.w.shape[0])
    Sigma = np.ascontiguousarray(state.Sigma.copy())
    w = state.w.copy()
    yhat = np.zeros(1)
    _backend.core.second_order_pass(
        state.mode, x[None, :].copy(), np.array([float(y)]), Sigma, w, state.r, yhat)
    state.Sigma = symmetrize(Sigma)
    state.w = w
    state.t += 1
    return state


def run_trace(stream, tag, b_reg, r=1.0, name=None):
    state = baseline_init(tag, stream.d, b_reg, r)
    start = time.perf_counter()
    Sigma = np.ascontiguousarray(state.Sigma)
    w = state.w
    yhat = np.zeros(stream.T)
    _backend.core.second_order_pass(state.mode, stream.X, stream.y, Sigma, w, state.r, yhat)
    elapsed = (time.perf_counter() - start) * 1000.0
    state.Sigma, state.w, state.t = Sigma, w, stream.T
    trace = RunTrace(name=name or tag, algorithm=tag, y=stream.y.copy(), yhat=yhat,
                     b_reg=state.b_reg, runtime_ms=elapsed)
    trace.extra["state"] = state
    return trace
