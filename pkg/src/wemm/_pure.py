"""Pure-Python/numpy implementations of the per-round loops.

Signatures mirror ``_core.pyx`` exactly; ``_backend`` picks one at import.
All arrays are float64 and updated in place.
"""
import numpy as np

DEGENERATE_TOL = 1e-12

RIDGE, AAR, AROWR, RLS = 0, 1, 2, 3


def wemm_pass(X, y, Sigma, w, yhat, a, q, q_post):
    """Run WEMM over the rows of ``X``; returns the failing row index or -1."""
    for t in range(X.shape[0]):
        x = X[t]
        s = Sigma @ x
        qt = float(x @ s)
        if qt >= 1.0 - DEGENERATE_TOL:
            return t
        pred = float(x @ w)
        yhat[t] = pred
        q[t] = qt
        a[t] = 1.0 / (1.0 - qt)
        w += (y[t] - pred) * s
        Sigma -= np.outer(s, s)
        Sigma[:] = 0.5 * (Sigma + Sigma.T)
        q_post[t] = float(x @ Sigma @ x)
    return -1


def second_order_pass(mode, X, y, Sigma, w, r, yhat):
    for t in range(X.shape[0]):
        x = X[t]
        s = Sigma @ x
        qt = float(x @ s)
        margin = float(x @ w)
        if mode == AAR:
            yhat[t] = margin / (1.0 + qt)
        else:
            yhat[t] = margin
        denom = r + qt if mode in (AROWR, RLS) else 1.0 + qt
        w += (y[t] - margin) / denom * s
        Sigma -= np.outer(s, s) / denom
        if mode == RLS:
            Sigma /= r
        Sigma[:] = 0.5 * (Sigma + Sigma.T)


def kernel_step(beta, alpha, kvec, n, y, binv):
    """One Kernel-WEMM round on the first ``n`` stored examples; returns the prediction."""
    k = kvec[:n]
    B = beta[:n, :n]
    pred = float(alpha[:n] @ k)
    g = B @ k
    r = y - pred
    alpha[:n] += r * g
    alpha[n] = binv * r
    B -= np.outer(g, g)
    beta[n, :n] = -binv * g
    beta[:n, n] = -binv * g
    beta[n, n] = -binv * binv
    return pred
