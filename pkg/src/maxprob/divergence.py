"""Asymptotic counterparts of the finite-n questions, on linear moment constraints.

* :func:`rem_solve` maximizes relative entropy ``H(p, q) = -sum p ln(p/q)``
  (I-divergence projection of ``q``); the answer is an exponential tilt of q.
* :func:`npml_solve` maximizes the non-parametric likelihood
  ``sum n_i ln q_i`` over generators q.
* :func:`jem_solve` maximizes Jeffreys' relative entropy
  ``J(p, q) = -sum [p ln(p/q) + q ln(q/p)]``.

All three work on Lagrangean duals and return a :class:`SolverReport` whose
multipliers satisfy the first-order conditions listed in each docstring.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linprog

from .errors import (
    DimensionMismatch,
    InfeasibleConstraints,
    NoConvergence,
    NonPositiveDenominator,
)
from .kernel import _as_generator
from .model import MomentConstraintSet, OccurrenceVector, Pmf, SolverReport, validate_pmf

MAX_ITER = 200


def _check_feasible(constraints: MomentConstraintSet) -> tuple[np.ndarray, np.ndarray]:
    x = constraints.x
    a = constraints.a
    for row, t in zip(constraints.rows, constraints.targets):
        if not min(row) < t < max(row):
            raise InfeasibleConstraints(
                f"target {t} is not strictly inside ({min(row)}, {max(row)})")
    if constraints.k > 1:
        # need a strictly positive pmf meeting every moment: max t s.t. p_i >= t
        m = constraints.m
        c = np.zeros(m + 1)
        c[-1] = -1.0
        a_eq = np.zeros((constraints.k + 1, m + 1))
        a_eq[0, :m] = 1.0
        a_eq[1:, :m] = x
        b_eq = np.concatenate([[1.0], a])
        a_ub = np.hstack([-np.eye(m), np.ones((m, 1))])
        res = linprog(c, A_ub=a_ub, b_ub=np.zeros(m), A_eq=a_eq, b_eq=b_eq,
                      bounds=[(0, None)] * m + [(None, 1.0)], method="highs")
        if res.status != 0 or -res.fun <= 1e-12:
            raise InfeasibleConstraints("no strictly positive pmf satisfies the moment constraints")
    return x, a


def _newton_step(grad: np.ndarray, hess: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(hess, -grad)
    except np.linalg.LinAlgError:
        return -np.linalg.lstsq(hess, grad, rcond=None)[0]


def _report(p: np.ndarray, multipliers, residual, stationarity, iterations, method) -> SolverReport:
    sol = validate_pmf(p / p.sum() if abs(p.sum() - 1.0) > 1e-12 else p, role="solution")
    return SolverReport(sol, tuple(float(v) for v in multipliers), float(residual),
                        float(stationarity), iterations, method)


# -- relative entropy maximization -------------------------------------------------

def _tilt(logq: np.ndarray, x: np.ndarray, theta: np.ndarray):
    z = logq + theta @ x
    top = z.max()
    log_norm = top + math.log(np.exp(z - top).sum())
    return np.exp(z - log_norm), log_norm


def _rem_bisection(logq, x, a, tol, trace):
    """Single-constraint fallback: the tilted mean increases monotonically in theta."""
    def mean(t):
        p, _ = _tilt(logq, x, np.array([t]))
        return float(p @ x[0]) - a[0]

    lo, hi = -1.0, 1.0
    while mean(lo) > 0:
        lo *= 2
    while mean(hi) < 0:
        hi *= 2
    for it in range(400):
        mid = 0.5 * (lo + hi)
        f = mean(mid)
        trace.append((f"bisect {it}", mid, f))
        if abs(f) <= tol or hi - lo <= 1e-300:
            return np.array([mid]), it + 1
        if f < 0:
            lo = mid
        else:
            hi = mid
    return np.array([0.5 * (lo + hi)]), 400


def rem_solve(q, constraints: MomentConstraintSet, tol: float = 1e-12) -> SolverReport:
    """Maximize ``H(p, q)`` subject to the moment constraints.

    The maximizer is ``p_i = q_i exp(theta . x_i) / Z(theta)``; theta is found
    by Newton on the convex dual ``ln Z(theta) - theta . a``, with bisection as
    a fallback when there is a single constraint.

    Multipliers follow the Lagrangean sign convention
    ``ln(q_i / p_i) = lambda_0 + sum_k lambda_k x_ki``, so ``lambda_0 = ln Z``
    and ``lambda_k = -theta_k``.
    """
    q = _as_generator(q)
    if len(q) != constraints.m:
        raise DimensionMismatch(f"generator has {len(q)} cells, constraints have {constraints.m}")
    if constraints.k == 0:
        return SolverReport(validate_pmf(q.probs, role="solution"), (0.0,), 0.0, 0.0, 0, "exact")
    x, a = _check_feasible(constraints)
    logq = np.log(q.array)

    theta = np.zeros(constraints.k)
    trace = []
    method = "newton"
    p, _ = _tilt(logq, x, theta)
    iterations = 0
    for iterations in range(1, MAX_ITER + 1):
        grad = x @ p - a
        trace.append((iterations, theta.copy(), float(np.abs(grad).max())))
        if np.abs(grad).max() <= tol:
            break
        cov = (x * p) @ x.T - np.outer(x @ p, x @ p)
        step = _newton_step(grad, cov)
        _, log_norm = _tilt(logq, x, theta)
        dual = log_norm - theta @ a
        t = 1.0
        while t > 1e-12:
            cand = theta + t * step
            p_c, ln_c = _tilt(logq, x, cand)
            if ln_c - cand @ a <= dual + 1e-4 * t * (grad @ step) + 1e-15 * abs(dual):
                break
            t *= 0.5
        else:
            break
        theta = cand
        p = p_c
    else:
        iterations = MAX_ITER

    if np.abs(x @ p - a).max() > tol:
        if constraints.k == 1:
            theta, extra = _rem_bisection(logq, x, a, tol, trace)
            iterations += extra
            method = "bisection"
        p, _ = _tilt(logq, x, theta)
        if np.abs(x @ p - a).max() > tol:
            raise NoConvergence("relative entropy dual did not converge", trace)

    p, log_norm = _tilt(logq, x, theta)
    lam = np.concatenate([[log_norm], -theta])
    residual = max(abs(p.sum() - 1.0), float(np.abs(x @ p - a).max()))
    stationarity = float(np.abs(np.log(q.array / p) - lam[0] - lam[1:] @ x).max())
    return _report(p, lam, residual, stationarity, iterations, method)


# -- non-parametric maximum likelihood ----------------------------------------------

def npml_solve(nvec, constraints: MomentConstraintSet, tol: float = 1e-12) -> SolverReport:
    """Most likely generator for the counts ``nvec`` under the moment constraints.

    With ``w = nvec / n`` the maximizer has the form
    ``q_i = w_i / (lambda_0 + sum_k lambda_k (x_ki - a_k))``. The multipliers
    minimize the convex dual ``lambda_0 - sum w_i ln(den_i)`` by damped Newton
    from ``lambda = (1, 0, ...)``; steps are halved until every denominator of
    a positive-count cell exceeds 1e-12. Only ``w`` enters, so scaling the
    counts does not change the answer.
    """
    if not isinstance(nvec, OccurrenceVector):
        nvec = OccurrenceVector.of(nvec)
    if len(nvec) != constraints.m:
        raise DimensionMismatch(f"{len(nvec)} counts against {constraints.m} cells")
    w = np.array(nvec.counts, dtype=float) / nvec.n
    if constraints.k == 0:
        return _report(w, (1.0,), abs(w.sum() - 1.0), 0.0, 0, "exact")
    x, a = _check_feasible(constraints)
    pos = w > 0
    u = np.vstack([np.ones(constraints.m), x - a[:, None]])  # (k+1, m)

    def dual(lam):
        den = lam @ u
        return lam[0] - float(w[pos] @ np.log(den[pos]))

    lam = np.zeros(constraints.k + 1)
    lam[0] = 1.0
    trace = []
    iterations = 0
    for iterations in range(MAX_ITER + 1):
        den = lam @ u
        qv = np.where(pos, w / np.where(pos, den, 1.0), 0.0)
        grad = np.concatenate([[1.0 - qv.sum()], -(x - a[:, None]) @ qv])
        residual = max(abs(qv.sum() - 1.0), float(np.abs(x @ qv - a).max()))
        trace.append((iterations, lam.copy(), residual))
        if residual <= tol:
            break
        if iterations == MAX_ITER:
            raise NoConvergence("likelihood dual did not converge", trace)
        weight = np.where(pos, w / np.where(pos, den, 1.0) ** 2, 0.0)
        hess = (u * weight) @ u.T
        step = _newton_step(grad, hess)
        current = dual(lam)
        t = 1.0
        while True:
            cand = lam + t * step
            if np.all((cand @ u)[pos] > 1e-12):
                if dual(cand) <= current + 1e-4 * t * (grad @ step) + 1e-15 * abs(current):
                    break
            t *= 0.5
            if t < 1e-14:
                if np.all((cand @ u)[pos] > 1e-12):
                    break
                raise NonPositiveDenominator(
                    "multiplier iterate cannot stay inside the positivity region", trace)
        lam = cand

    den = lam @ u
    qv = np.where(pos, w / np.where(pos, den, 1.0), 0.0)
    stationarity = float(np.abs(w[pos] / qv[pos] - den[pos]).max())
    return _report(qv, lam, residual, stationarity, iterations, "damped-newton")


# -- Jeffreys entropy maximization --------------------------------------------------

def _jeffreys_inner(q: np.ndarray, c: np.ndarray, iters: int = 200) -> np.ndarray:
    """Solve ``q/p - ln(p/q) - 1 = c`` componentwise for p > 0.

    The left side is strictly decreasing in p, so each root is unique. Works
    in ``u = ln p`` with safeguarded Newton inside a bracket that starts at
    ``(1e-16, 1)`` and widens upward when needed.
    """
    logq = np.log(q)

    def phi(u):
        return q * np.exp(-u) - u + logq - 1.0 - c

    lo = np.full_like(q, math.log(1e-16))
    hi = np.zeros_like(q)
    while True:
        bad = phi(lo) < 0
        if not bad.any():
            break
        lo[bad] -= 36.0
    while True:
        bad = phi(hi) > 0
        if not bad.any():
            break
        hi[bad] += 8.0
    u = np.clip(logq, lo, hi)
    for _ in range(iters):
        f = phi(u)
        lo = np.where(f > 0, u, lo)
        hi = np.where(f < 0, u, hi)
        deriv = -q * np.exp(-u) - 1.0
        nxt = u - f / deriv
        outside = (nxt <= lo) | (nxt >= hi)
        nxt = np.where(outside, 0.5 * (lo + hi), nxt)
        if np.all(np.abs(nxt - u) <= 1e-15 * np.maximum(1.0, np.abs(u))):
            u = nxt
            break
        u = nxt
    return np.exp(u)


def jeffreys_entropy(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return float(-np.sum(p * np.log(p / q) + q * np.log(q / p)))


def jem_solve(q, constraints: MomentConstraintSet, tol: float = 1e-12) -> SolverReport:
    """Maximize Jeffreys' relative entropy ``J(p, q)`` under the moment constraints.

    First-order conditions:
    ``q_i / p_i - ln(p_i / q_i) - 1 = lambda_0 + sum_k lambda_k x_ki``.
    For fixed multipliers each ``p_i`` is the unique root of that equation;
    the multipliers are found by damped Newton on the convex dual, with the
    Jacobian ``dp_i/dc_i = -p_i^2 / (q_i + p_i)`` from implicit
    differentiation.
    """
    q = _as_generator(q)
    if len(q) != constraints.m:
        raise DimensionMismatch(f"generator has {len(q)} cells, constraints have {constraints.m}")
    if constraints.k == 0:
        return SolverReport(validate_pmf(q.probs, role="solution"), (0.0,), 0.0, 0.0, 0, "exact")
    x, a = _check_feasible(constraints)
    qa = q.array
    u = np.vstack([np.ones(constraints.m), x])
    b = np.concatenate([[1.0], a])

    def primal(lam):
        c = lam @ u
        p = _jeffreys_inner(qa, c)
        return p, c

    def dual(lam, p, c):
        inner = -p * np.log(p / qa) - qa * np.log(qa / p) - c * p
        return float(inner.sum() + lam @ b)

    lam = np.zeros(constraints.k + 1)
    p, c = primal(lam)
    trace = []
    iterations = 0
    for iterations in range(MAX_ITER + 1):
        grad = b - u @ p
        trace.append((iterations, lam.copy(), float(np.abs(grad).max())))
        if np.abs(grad).max() <= tol:
            break
        if iterations == MAX_ITER:
            raise NoConvergence("Jeffreys dual did not converge", trace)
        hess = (u * (p * p / (qa + p))) @ u.T
        step = _newton_step(grad, hess)
        current = dual(lam, p, c)
        t = 1.0
        while t > 1e-14:
            cand = lam + t * step
            p_c, c_c = primal(cand)
            if dual(cand, p_c, c_c) <= current + 1e-4 * t * (grad @ step) + 1e-15 * abs(current):
                break
            t *= 0.5
        lam, p, c = cand, p_c, c_c

    residual = max(abs(p.sum() - 1.0), float(np.abs(x @ p - a).max()))
    stationarity = float(np.abs(qa / p - np.log(p / qa) - 1.0 - lam @ u).max())
    return _report(p, lam, residual, stationarity, iterations, "damped-newton")
