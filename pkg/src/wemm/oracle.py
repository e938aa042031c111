"""Closed-form batch comparators.

Stationary: the regularized weighted least-squares optimum. Non-stationary:
the drift-penalized optimum over a tuple ``u_1..u_T`` anchored at ``u_bar``,
which reduces to a stationary problem with effective weights
``1 / (1/a_tilde + ||x||^2 / c)``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyStream, InvalidParameter
from .linalg import solve_spd, symmetrize


def per_round_losses(stream, u):
    return (stream.y - stream.X @ np.asarray(u, dtype=np.float64)) ** 2


def tuple_losses(stream, u_seq):
    return (stream.y - np.einsum("ij,ij->i", stream.X, u_seq)) ** 2


def _check_weights(stream, a):
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (stream.T,):
        raise InvalidParameter(f"need {stream.T} weights, got shape {a.shape}")
    if np.any(a <= 0) or not np.all(np.isfinite(a)):
        raise InvalidParameter("weights must be positive and finite")
    return a


def weighted_loss(stream, a, u):
    return float(np.sum(_check_weights(stream, a) * per_round_losses(stream, u)))


def plain_loss(stream, u):
    return float(np.sum(per_round_losses(stream, u)))


def worst_example_loss(stream, u):
    if stream.T == 0:
        raise EmptyStream("worst-example loss of an empty stream")
    return float(np.max(per_round_losses(stream, u)))


def accumulators(stream, a, b_reg):
    """``A = bI + sum a x x^T`` and ``b_vec = sum a y x``."""
    a = _check_weights(stream, a)
    A = symmetrize(b_reg * np.eye(stream.d) + (stream.X.T * a) @ stream.X)
    return A, stream.X.T @ (a * stream.y)


def batch_optimum(stream, a, b_reg):
    """Minimizer and minimum of ``b||u||^2 + sum a_s (y_s - u.x_s)^2``.

    The minimum is evaluated at the solved point rather than through
    ``sum a y^2 - b^T A^{-1} b``, which cancels badly for large labels.
    """
    b_reg = float(b_reg)
    if not b_reg > 0:
        raise InvalidParameter("b must be > 0")
    if stream.T == 0:
        return np.zeros(stream.d), 0.0
    A, b_vec = accumulators(stream, a, b_reg)
    u = solve_spd(A, b_vec)
    f_min = b_reg * float(u @ u) + weighted_loss(stream, a, u)
    return u, f_min


@dataclass
class NonstationaryBlock:
    u_bar: np.ndarray
    u_seq: np.ndarray
    V_m: float
    J_min: float
    c: float
    a_eff: np.ndarray
    weighted_tuple_loss: float


@dataclass
class ComparatorReport:
    u_star: np.ndarray
    per_round_loss: np.ndarray
    L_T: float
    L_T_weighted: float
    S: float
    b_reg: float
    nonstationary: NonstationaryBlock | None = None

    @property
    def reg(self):
        return self.b_reg * float(self.u_star @ self.u_star)

    def to_dict(self):
        out = {
            "u_star": self.u_star.tolist(),
            "L_T": self.L_T,
            "L_T_weighted": self.L_T_weighted,
            "S": self.S,
            "b_reg_norm_sq": self.reg,
        }
        if self.nonstationary is not None:
            ns = self.nonstationary
            out["nonstationary"] = {
                "c": ns.c, "u_bar": ns.u_bar.tolist(), "V_m": ns.V_m, "J_min": ns.J_min,
            }
        return out


def comparator_report(stream, a, b_reg, u=None):
    """Losses of ``u`` (default: the weighted batch optimum) on ``stream``."""
    a = _check_weights(stream, a)
    if u is None:
        u, _ = batch_optimum(stream, a, b_reg)
    u = np.asarray(u, dtype=np.float64)
    losses = per_round_losses(stream, u)
    return ComparatorReport(
        u_star=u,
        per_round_loss=losses,
        L_T=float(losses.sum()),
        L_T_weighted=float(np.sum(a * losses)),
        S=float(losses.max()) if stream.T else 0.0,
        b_reg=float(b_reg),
    )


def effective_weights(stream, a_tilde, c):
    return 1.0 / (1.0 / np.asarray(a_tilde, dtype=np.float64) + stream.norms**2 / c)


def optimal_tuple(stream, u_bar, a_tilde, c):
    """Best ``u_t`` for a fixed anchor ``u_bar``."""
    a_eff = effective_weights(stream, a_tilde, c)
    resid = stream.y - stream.X @ u_bar
    return u_bar + ((a_eff / c) * resid)[:, None] * stream.X


def drift_objective(stream, u_bar, u_seq, a_tilde, b_reg, c):
    """``b||u_bar||^2 + c V_m + L^a_tilde(u_1..u_T)``."""
    V_m = float(np.sum((u_seq - u_bar) ** 2))
    return b_reg * float(u_bar @ u_bar) + c * V_m + float(np.sum(a_tilde * tuple_losses(stream, u_seq)))


def nonstationary_optimum(stream, a_tilde, b_reg, c):
    c = float(c)
    if not c > 0:
        raise InvalidParameter("drift penalty c must be > 0")
    a_tilde = _check_weights(stream, a_tilde)
    if np.any(a_tilde < 1.0):
        raise InvalidParameter("a_tilde weights must be >= 1")
    a_eff = effective_weights(stream, a_tilde, c)
    u_bar, J_min = batch_optimum(stream, a_eff, b_reg)
    u_seq = optimal_tuple(stream, u_bar, a_tilde, c)
    return NonstationaryBlock(
        u_bar=u_bar,
        u_seq=u_seq,
        V_m=float(np.sum((u_seq - u_bar) ** 2)),
        J_min=J_min,
        c=c,
        a_eff=a_eff,
        weighted_tuple_loss=float(np.sum(a_tilde * tuple_losses(stream, u_seq))),
    )
