"""Numeric certificates for the WEMM regret identities and bounds.

Each certificate is a :class:`BoundReport` comparing a realized quantity
(``lhs``) against a bound assembled from named terms (``rhs`` is their sum).
Tolerances are relative: ``tol = rel_tol * (1 + |rhs|)``.
"""
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InfeasibleParameters,
    InstanceTooLarge,
    InvalidParameter,
    PreconditionViolation,
    WeightModeMismatch,
)
from .linalg import log_det, sym_eigen
from .oracle import comparator_report, nonstationary_optimum, tuple_losses

REL_TOL = 1e-6
NORM_SLACK = 1e-12
EQUALITY_TOL = 1e-8
DENOM_TOL = 1e-12


@dataclass
class BoundReport:
    theorem: str
    lhs: float
    terms: dict
    tol: float
    two_sided: bool = False
    learner: str | None = None
    details: dict = field(default_factory=dict)

    @property
    def rhs(self):
        return float(math.fsum(self.terms.values()))

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def passed(self):
        if self.two_sided:
            return abs(self.slack) <= self.tol
        return self.slack >= -self.tol

    def to_dict(self):
        out = {
            "theorem": self.theorem,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "pass": self.passed,
            "tol": self.tol,
            "two_sided": self.two_sided,
            "terms": dict(self.terms),
        }
        if self.learner is not None:
            out["learner"] = self.learner
        if self.details:
            out["details"] = dict(self.details)
        return out


def _report(theorem, lhs, terms, rel_tol, two_sided=False, learner=None, details=None):
    rhs = math.fsum(terms.values())
    return BoundReport(theorem, float(lhs), {k: float(v) for k, v in terms.items()},
                       rel_tol * (1.0 + abs(rhs)), two_sided, learner, details or {})


# --- run replay --------------------------------------------------------------


@dataclass
class Replay:
    q_prev: np.ndarray  # x_t^T A_{t-1}^{-1} x_t
    q_post: np.ndarray  # x_t^T A_t^{-1} x_t
    log_det_ratio: float  # ln det(A_T / b)
    equality: bool


def replay(trace, stream):
    """Rebuild the weighted matrices of a run from its recorded ``a_t``.

    Uses the general weighted Sherman-Morrison step, so it does not assume
    the equality choice of weights it is later used to verify.
    """
    if trace.a is None:
        raise WeightModeMismatch(f"trace {trace.name!r} has no a_t column")
    if trace.b_reg is None:
        raise InvalidParameter("trace does not record the regularizer b")
    if len(trace.a) != stream.T:
        raise InvalidParameter("trace and stream lengths differ")
    key = (id(stream), float(trace.b_reg))
    cached = trace.extra.get("_replay")
    if cached is not None and cached[0] == key:
        return cached[1]
    b, d = float(trace.b_reg), stream.d
    Sigma = np.eye(d) / b
    q_prev = np.empty(stream.T)
    q_post = np.empty(stream.T)
    for t in range(stream.T):
        x = stream.X[t]
        a = trace.a[t]
        s = Sigma @ x
        q = float(x @ s)
        q_prev[t] = q
        Sigma = Sigma - (a / (1.0 + a * q)) * np.outer(s, s)
        Sigma = 0.5 * (Sigma + Sigma.T)
        q_post[t] = float(x @ Sigma @ x)
    A = b * np.eye(d) + (stream.X.T * trace.a) @ stream.X
    ldr = log_det(0.5 * (A + A.T) / b)
    equality = bool(np.all(np.abs(trace.a * (1.0 - q_prev) - 1.0) <= EQUALITY_TOL))
    result = Replay(q_prev, q_post, ldr, equality)
    trace.extra["_replay"] = (key, result)
    return result


def _require_equality(trace, stream):
    rep = replay(trace, stream)
    if not rep.equality:
        raise WeightModeMismatch(f"trace {trace.name!r} was not run with equality weights")
    return rep


def _require_unit_inputs(stream):
    if stream.T and stream.max_norm > 1.0 + NORM_SLACK:
        raise PreconditionViolation(f"max ||x|| = {stream.max_norm!r} exceeds 1")


def _comparator_losses(comparator):
    return np.asarray(comparator.per_round_loss, dtype=np.float64)


# --- stationary certificates ----------------------------------------------------


def certify_loss_identity(trace, comparator, stream, rel_tol=REL_TOL, allow_inequality=False):
    """Cumulative loss versus ``b||u||^2 + L^a(u)`` at the weighted optimum.

    Under equality weights the two sides must agree; with
    ``allow_inequality`` a run whose weights satisfy ``a_t >= 1/(1-q_t)``
    is certified one-sided.
    """
    rep = replay(trace, stream)
    if not rep.equality:
        feasible = np.all(1.0 + trace.a * rep.q_prev - trace.a <= EQUALITY_TOL)
        if not (allow_inequality and feasible):
            raise WeightModeMismatch(f"trace {trace.name!r} was not run with equality weights")
    u = comparator.u_star
    losses = _comparator_losses(comparator)
    terms = {"reg": comparator.b_reg * float(u @ u), "weighted_loss": float(np.sum(trace.a * losses))}
    return _report("loss_identity", trace.L_T, terms, rel_tol, two_sided=rep.equality,
                   learner=trace.name)


def _log_factor(b):
    return b / (b - 1.0)


def certify_logdet(trace, comparator, stream, rel_tol=REL_TOL):
    """Returns ``(gap, regret)`` reports for the log-determinant bound."""
    _require_unit_inputs(stream)
    rep = _require_equality(trace, stream)
    b = float(trace.b_reg)
    u = comparator.u_star
    losses = _comparator_losses(comparator)
    S = float(losses.max()) if len(losses) else 0.0
    L = float(losses.sum())
    Lw = float(np.sum(trace.a * losses))
    log_term = _log_factor(b) * S * rep.log_det_ratio
    details = {"S": S, "log_det_ratio": rep.log_det_ratio, "L_u": L}
    gap = _report("logdet_gap", Lw - L, {"log_term": log_term}, rel_tol,
                  learner=trace.name, details=details)
    regret = _report("logdet", trace.L_T - L,
                     {"reg": b * float(u @ u), "log_term": log_term}, rel_tol,
                     learner=trace.name, details=details)
    return gap, regret


def logdet_closed_form(trace, comparator, stream, abs_tol=1e-9):
    """The trace-based closed form must dominate the log-determinant form."""
    _require_unit_inputs(stream)
    rep = _require_equality(trace, stream)
    b = float(trace.b_reg)
    d, T = stream.d, stream.T
    u = comparator.u_star
    S = float(_comparator_losses(comparator).max()) if T else 0.0
    reg = b * float(u @ u)
    lhs = reg + _log_factor(b) * S * rep.log_det_ratio
    closed = S * d * _log_factor(b) * math.log1p(T / (d * (b - 1.0)))
    report = _report("logdet_closed_form", lhs, {"reg": reg, "closed_log_term": closed}, 0.0,
                     learner=trace.name)
    report.tol = abs_tol
    return report


def _sublog_term(S, d, L, b):
    if S == 0.0:
        return 0.0
    return _log_factor(b) * S * d * (1.0 + math.log1p(L / (S * d)))


def certify_sublog(trace, comparator, stream, rel_tol=REL_TOL):
    """Returns ``(gap, regret)`` reports for the loss-dependent bound."""
    _require_unit_inputs(stream)
    _require_equality(trace, stream)
    b = float(trace.b_reg)
    u = comparator.u_star
    losses = _comparator_losses(comparator)
    S = float(losses.max()) if len(losses) else 0.0
    L = float(losses.sum())
    Lw = float(np.sum(trace.a * losses))
    term = _sublog_term(S, stream.d, L, b)
    details = {"S": S, "L_u": L}
    gap = _report("sublog_gap", Lw - L, {"sublog_term": term}, rel_tol,
                  learner=trace.name, details=details)
    regret = _report("sublog", trace.L_T - L, {"reg": b * float(u @ u), "sublog_term": term},
                     rel_tol, learner=trace.name, details=details)
    return gap, regret


def certify_weight_range(trace, stream, rel_tol=1e-12):
    """``1 <= a_t <= b/(b-1)`` for every round, as an (upper, lower) pair."""
    b = float(trace.b_reg)
    a = trace.a
    hi = float(a.max()) if len(a) else 1.0
    lo = float(a.min()) if len(a) else 1.0
    upper = _report("a_range_upper", hi, {"b_over_b_minus_1": _log_factor(b)}, rel_tol,
                    learner=trace.name)
    lower = _report("a_range_lower", 1.0, {"min_a": lo}, rel_tol, learner=trace.name)
    return upper, lower


def certify_log_det_sum(trace, stream, abs_tol=1e-8):
    """``sum_t a_t x_t^T A_t^{-1} x_t <= ln det(A_T / b)``."""
    rep = replay(trace, stream)
    lhs = float(np.sum(trace.a * rep.q_post))
    report = _report("logdet_sum", lhs, {"log_det_ratio": rep.log_det_ratio}, 0.0, learner=trace.name)
    report.tol = abs_tol
    return report


# --- combinatorial checks -----------------------------------------------------------


def stacked_indices(a, count):
    """Indices of the ``count`` largest weights, ties going to the earlier round."""
    order = sorted(range(len(a)), key=lambda t: (-a[t], t))
    return order[:count]


def stacking_sides(losses, a, S):
    losses = np.asarray(losses, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    if not S > 0:
        raise InvalidParameter("S must be > 0")
    count = min(len(a), math.ceil(float(losses.sum()) / S))
    idx = stacked_indices(a, count)
    lhs = float(np.sum(losses * (a - 1.0)))
    rhs = S * float(np.sum(a[idx] - 1.0))
    return lhs, rhs, idx


def check_stacking(losses, a, S, tol=1e-9):
    lhs, rhs, _ = stacking_sides(losses, a, S)
    return lhs <= rhs + tol


def stacking_report(trace, comparator, rel_tol=1e-9):
    losses = _comparator_losses(comparator)
    S = float(losses.max()) if len(losses) else 0.0
    if S == 0.0:
        return _report("stacking", 0.0, {"stacked": 0.0}, rel_tol, learner=trace.name)
    lhs, rhs, idx = stacking_sides(losses, trace.a, S)
    return _report("stacking", lhs, {"stacked": rhs}, rel_tol, learner=trace.name,
                   details={"T_prime": len(idx)})


WORST_CASE_MAX_D = 3
WORST_CASE_MAX_TAU = 6


def worst_case_directions(d):
    """Unit directions modulo sign (``a_t`` depends on ``x`` only through ``x x^T``).

    d=1: the axis; d=2: the eight compass directions (four lines); d=3: the
    eight cube diagonals (four lines). The coordinate axes, which are the
    eigenvectors of ``bI``, are always included.
    """
    dirs = [np.eye(d)[i] for i in range(d)]
    if d == 2:
        r = math.sqrt(0.5)
        dirs += [np.array([r, r]), np.array([-r, r])]
    elif d == 3:
        for signs in itertools.product((1.0, -1.0), repeat=2):
            dirs.append(np.array([1.0, signs[0], signs[1]]) / math.sqrt(3.0))
    return dirs


def allocation_bound(eigenvalues, tau):
    """``tau + max over allocations n_s of sum_s sum_{r<=n_s} 1/(lambda_s + r - 2)``."""
    d = len(eigenvalues)
    best = -math.inf
    for alloc in itertools.product(range(tau + 1), repeat=d):
        if sum(alloc) != tau:
            continue
        val = sum(1.0 / (lam + r - 2.0) for lam, n in zip(eigenvalues, alloc) for r in range(1, n + 1))
        best = max(best, val)
    return tau + best


def worst_case_weight_sum(b_reg, d, tau, directions=None):
    """Largest ``sum_t a_t`` over all length-``tau`` sequences from the direction grid."""
    dirs = worst_case_directions(d) if directions is None else directions

    def visit(Sigma, depth):
        if depth == tau:
            return 0.0
        best = -math.inf
        for x in dirs:
            s = Sigma @ x
            q = float(x @ s)
            a = 1.0 / (1.0 - q)
            best = max(best, a + visit(Sigma - np.outer(s, s), depth + 1))
        return best

    return visit(np.eye(d) / b_reg, 0)


def check_worst_case(b_reg, d, tau, tol=1e-9):
    if d > WORST_CASE_MAX_D or tau > WORST_CASE_MAX_TAU:
        raise InstanceTooLarge(f"exhaustive check capped at d <= {WORST_CASE_MAX_D}, tau <= {WORST_CASE_MAX_TAU}")
    if not b_reg > 1:
        raise InvalidParameter("b must be > 1")
    lam, _ = sym_eigen(b_reg * np.eye(d))
    return worst_case_weight_sum(b_reg, d, tau) <= allocation_bound(lam, tau) + tol


# --- non-stationary certificates --------------------------------------------------------


def check_feasible(b_reg, c):
    if not c > 0 or 1.0 / b_reg + 1.0 / c > 1.0:
        raise InfeasibleParameters(f"need 1/b + 1/c <= 1, got b={b_reg}, c={c}")


def nonstationary_weights(trace, stream, c):
    """``a_tilde_t = 1 / (1 - x^T A_{t-1}^{-1} x - ||x||^2 / c)`` for the recorded run."""
    b = float(trace.b_reg)
    c = float(c)
    check_feasible(b, c)
    _require_unit_inputs(stream)
    rep = _require_equality(trace, stream)
    norms_sq = stream.norms**2
    denom = 1.0 - rep.q_prev - norms_sq / c
    if np.any(denom <= DENOM_TOL):
        bad = int(np.argmax(denom <= DENOM_TOL))
        raise InfeasibleParameters(f"round {bad + 1}: a_tilde denominator {denom[bad]!r} <= {DENOM_TOL}")
    a_tilde = 1.0 / denom
    back = 1.0 / (1.0 / a_tilde + norms_sq / c)
    if np.any(np.abs(back - trace.a) > 1e-10 * trace.a):
        raise WeightModeMismatch("a_t does not match 1/(1/a_tilde + ||x||^2/c)")
    return a_tilde


def c_optimal(b_reg, S, T, V_m):
    """Drift penalty minimizing the drift regret bound."""
    if V_m <= 0:
        raise InvalidParameter("c_V needs V_m > 0")
    return _log_factor(b_reg) * (1.0 + math.sqrt(S * T / V_m))


def certify_drift(trace, stream, u_bar, u_seq, c, rel_tol=REL_TOL):
    """Certificates against a drifting comparator ``(u_bar, u_1..u_T)``.

    ``c`` is a number or ``"c_V"``. It only enters the analysis; the run
    never sees it. A comparator with ``V_m = 0`` is the stationary case and
    returns the log-determinant certificates unchanged.
    """
    _require_unit_inputs(stream)
    rep = _require_equality(trace, stream)
    b = float(trace.b_reg)
    u_bar = np.asarray(u_bar, dtype=np.float64)
    u_seq = np.asarray(u_seq, dtype=np.float64)
    T, d = stream.T, stream.d
    V_m = float(np.sum((u_seq - u_bar) ** 2))
    if V_m == 0.0:
        return list(certify_logdet(trace, comparator_report(stream, trace.a, b, u=u_bar), stream, rel_tol))
    losses = tuple_losses(stream, u_seq)
    S = float(losses.max())
    L = float(losses.sum())
    k = _log_factor(b)
    use_cv = isinstance(c, str)
    if use_cv:
        if c != "c_V":
            raise InvalidParameter(f"unknown drift penalty {c!r}")
        c_val = c_optimal(b, S, T, V_m)
    else:
        c_val = float(c)
    check_feasible(b, c_val)
    one_minus = 1.0 - 1.0 / b
    denom = c_val * one_minus**2 - one_minus
    if S == 0.0:
        drift_term = 0.0
    elif use_cv:
        # at c_V the denominator is sqrt(ST/V_m)/k; the closed form avoids cancelling it
        drift_term = k * math.sqrt(S * T * V_m)
    elif denom <= 0.0:
        raise InfeasibleParameters(f"c={c_val} gives a non-positive drift denominator")
    else:
        drift_term = T * S / denom

    a_tilde = nonstationary_weights(trace, stream, c_val)
    ns = nonstationary_optimum(stream, a_tilde, b, c_val)
    details = {"c": c_val, "c_mode": "c_V" if use_cv else "caller", "S": S, "V_m": V_m,
               "L_tuple": L, "log_det_ratio": rep.log_det_ratio}

    cor9 = _report(
        "drift_identity", trace.L_T,
        {"reg": b * float(ns.u_bar @ ns.u_bar), "drift": c_val * ns.V_m,
         "weighted_tuple_loss": ns.weighted_tuple_loss},
        rel_tol, two_sided=True, learner=trace.name,
        details={"c": c_val, "c_mode": details["c_mode"], "J_min": ns.J_min, "V_m_opt": ns.V_m},
    )
    log_term = k * S * rep.log_det_ratio
    Lw_tilde = float(np.sum(a_tilde * losses))
    cor10 = _report("drift_gap", Lw_tilde - L, {"log_term": log_term, "drift_term": drift_term},
                    rel_tol, learner=trace.name, details=details)
    reg = b * float(u_bar @ u_bar)
    if use_cv:
        drift_terms = {"cv_term": k * (V_m + 2.0 * math.sqrt(S * T * V_m))}
    else:
        drift_terms = {"drift": c_val * V_m, "drift_term": drift_term}
    cor11 = _report("drift_regret", trace.L_T,
                    {"reg": reg, "tuple_loss": L, "log_term": log_term, **drift_terms},
                    rel_tol, learner=trace.name, details=details)
    cor11_sub = _report("drift_sublog_regret", trace.L_T,
                        {"reg": reg, "tuple_loss": L, "sublog_term": _sublog_term(S, d, L, b),
                         **drift_terms},
                        rel_tol, learner=trace.name, details=details)
    return [cor9, cor10, cor11, cor11_sub]
