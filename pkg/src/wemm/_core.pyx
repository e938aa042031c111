# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-round loops; see ``_pure.py`` for the reference semantics."""
from libc.stdlib cimport malloc, free

DEF DEGENERATE_TOL = 1e-12

RIDGE, AAR, AROWR, RLS = 0, 1, 2, 3


def wemm_pass(const double[:, ::1] X, const double[::1] y, double[:, ::1] Sigma,
              double[::1] w, double[::1] yhat, double[::1] a, double[::1] q,
              double[::1] q_post):
    cdef Py_ssize_t T = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t t, i, j
    cdef double qt, pred, resid, acc, v
    cdef double *s = <double *> malloc(d * sizeof(double))
    if s == NULL:
        raise MemoryError()
    try:
        for t in range(T):
            qt = 0.0
            pred = 0.0
            for i in range(d):
                acc = 0.0
                for j in range(d):
                    acc += Sigma[i, j] * X[t, j]
                s[i] = acc
                qt += X[t, i] * acc
                pred += X[t, i] * w[i]
            if qt >= 1.0 - DEGENERATE_TOL:
                return t
            yhat[t] = pred
            q[t] = qt
            a[t] = 1.0 / (1.0 - qt)
            resid = y[t] - pred
            for i in range(d):
                w[i] += resid * s[i]
            for i in range(d):
                for j in range(i, d):
                    v = Sigma[i, j] - s[i] * s[j]
                    Sigma[i, j] = v
                    Sigma[j, i] = v
            acc = 0.0
            for i in range(d):
                v = 0.0
                for j in range(d):
                    v += Sigma[i, j] * X[t, j]
                acc += X[t, i] * v
            q_post[t] = acc
        return -1
    finally:
        free(s)


def second_order_pass(int mode, const double[:, ::1] X, const double[::1] y,
                      double[:, ::1] Sigma, double[::1] w, double r, double[::1] yhat):
    cdef Py_ssize_t T = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t t, i, j
    cdef double qt, margin, denom, coef, acc, v
    cdef double *s = <double *> malloc(d * sizeof(double))
    if s == NULL:
        raise MemoryError()
    try:
        for t in range(T):
            qt = 0.0
            margin = 0.0
            for i in range(d):
                acc = 0.0
                for j in range(d):
                    acc += Sigma[i, j] * X[t, j]
                s[i] = acc
                qt += X[t, i] * acc
                margin += X[t, i] * w[i]
            if mode == 1:
                yhat[t] = margin / (1.0 + qt)
            else:
                yhat[t] = margin
            if mode == 2 or mode == 3:
                denom = r + qt
            else:
                denom = 1.0 + qt
            coef = (y[t] - margin) / denom
            for i in range(d):
                w[i] += coef * s[i]
            for i in range(d):
                for j in range(i, d):
                    v = Sigma[i, j] - s[i] * s[j] / denom
                    if mode == 3:
                        v = v / r
                    Sigma[i, j] = v
                    Sigma[j, i] = v
    finally:
        free(s)


def kernel_step(double[:, ::1] beta, double[::1] alpha, const double[::1] kvec,
                Py_ssize_t n, double y, double binv):
    cdef Py_ssize_t i, j
    cdef double pred = 0.0, r, acc, gi
    cdef double *g = <double *> malloc((n + 1) * sizeof(double))
    if g == NULL:
        raise MemoryError()
    try:
        for i in range(n):
            pred += alpha[i] * kvec[i]
            acc = 0.0
            for j in range(n):
                acc += beta[i, j] * kvec[j]
            g[i] = acc
        r = y - pred
        for i in range(n):
            alpha[i] += r * g[i]
        alpha[n] = binv * r
        # full row-major sweep: g_i*g_j == g_j*g_i exactly, so symmetry is kept bit-for-bit
        for i in range(n):
            gi = g[i]
            for j in range(n):
                beta[i, j] -= gi * g[j]
            beta[i, n] = -binv * gi
        for i in range(n):
            beta[n, i] = -binv * g[i]
        beta[n, n] = -binv * binv
        return pred
    finally:
        free(g)
