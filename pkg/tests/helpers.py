"""Independent oracles shared by the tests.

Nothing here calls the package's solvers: batch optima come from
``numpy.linalg.lstsq`` on the stacked least-squares system and running
inverses from ``numpy.linalg.inv``.
"""
import numpy as np

from wemm import oracle
from wemm.datagen import GeneratorSpec, generate


def make_stream(kind="gaussian_noise", d=3, T=100, seed=0, **kw):
    return generate(GeneratorSpec(kind=kind, d=d, T=T, seed=seed, **kw))


def lstsq_optimum(X, y, a, b):
    """argmin and min of ``b||u||^2 + sum a (y - u.x)^2`` via a stacked lstsq."""
    d = X.shape[1]
    sa = np.sqrt(np.asarray(a, dtype=float))
    M = np.vstack([X * sa[:, None], np.sqrt(b) * np.eye(d)])
    rhs = np.concatenate([y * sa, np.zeros(d)])
    u = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return u, float(np.sum((M @ u - rhs) ** 2))


def accumulator_run(X, y, b, weight=None):
    """Diagnostic-form WEMM: maintain ``A`` and ``b_vec`` and invert directly.

    ``weight(q)`` maps ``x^T A^{-1} x`` to ``a_t``; default is the equality
    choice. Returns per-round predictions, weights, and the ``A`` sequence.
    """
    T, d = X.shape
    weight = weight or (lambda q: 1.0 / (1.0 - q))
    A = b * np.eye(d)
    bv = np.zeros(d)
    yhat, a_seq, As = np.zeros(T), np.zeros(T), [A.copy()]
    for t in range(T):
        Ainv = np.linalg.inv(A)
        x = X[t]
        yhat[t] = bv @ Ainv @ x
        a = weight(float(x @ Ainv @ x))
        a_seq[t] = a
        A = A + a * np.outer(x, x)
        bv = bv + a * y[t] * x
        As.append(A.copy())
    return yhat, a_seq, As


def ridge_batch_prediction(X, y, x, b):
    d = X.shape[1]
    if len(X) == 0:
        return 0.0
    M = np.vstack([X, np.sqrt(b) * np.eye(d)])
    rhs = np.concatenate([y, np.zeros(d)])
    return float(x @ np.linalg.lstsq(M, rhs, rcond=None)[0])


def alternating_optimum(stream, a_tilde, b, c, iters=200000, tol=1e-15):
    """Block-coordinate descent over ``u_bar`` and the tuple ``u_1..u_T``."""
    X, y = stream.X, stream.y
    T, d = X.shape
    M_inv = np.linalg.inv(c * np.eye(d)[None] + a_tilde[:, None, None] * np.einsum("ti,tj->tij", X, X))
    u_bar = np.zeros(d)
    for _ in range(iters):
        u_seq = np.einsum("tij,tj->ti", M_inv, c * u_bar[None] + (a_tilde * y)[:, None] * X)
        new_bar = c * u_seq.sum(axis=0) / (b + c * T)
        if np.max(np.abs(new_bar - u_bar)) <= tol:
            u_bar = new_bar
            break
        u_bar = new_bar
    u_seq = np.einsum("tij,tj->ti", M_inv, c * u_bar[None] + (a_tilde * y)[:, None] * X)
    J = oracle.drift_objective(stream, u_bar, u_seq, a_tilde, b, c)
    return u_bar, u_seq, J
