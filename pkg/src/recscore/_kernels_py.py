"""Pure-numpy kernels; fallback mirror of the compiled extension.

The screening statistic pins its summation order (sequential prefix sums
along the sorted responses, then a sequential reduction over observations) so
both backends return bit-identical output. The solver kernel matches the
compiled one to floating-point roundoff, not bitwise: matrix products go
through BLAS here and through plain loops there.
"""

from __future__ import annotations

import numpy as np

from . import losses

BACKEND_NAME = "python"

_ID_TO_FAMILY = {v: k for k, v in losses.FAMILY_ID.items()}


def _objective(spec, resid, n, lam, weights, beta):
    risk = float(np.sum(losses.loss_value(spec, resid))) / n
    return risk + lam * float(np.sum(weights * np.abs(beta)))


def _gap_norm(g, beta, thr):
    active = beta != 0.0
    r = np.where(active, g + thr * np.sign(beta), np.maximum(np.abs(g) - thr, 0.0))
    return float(np.sqrt(np.sum(r * r)))


def solve_penalized(x, y, family, tuning, lam, weights, beta0, step, radius, tol, max_iter):
    """Composite gradient descent on (1/n) sum l(y - x b) + lam * sum w |b|,
    constrained to the l2 ball of the given radius.

    Returns (beta, iterations, final_gap, objective_trace, status, on_boundary)
    where status is 0 on stationarity (gap <= tol), 1 on max_iter, 2 on step
    underflow in the objective-increase halving.
    """
    spec = losses.LossSpec(_ID_TO_FAMILY[int(family)], float(tuning))
    n = y.shape[0]
    beta = np.array(beta0, dtype=np.float64, copy=True)
    thr = lam * weights
    trace = np.empty(max_iter + 1)
    resid = y - x @ beta
    fval = _objective(spec, resid, n, lam, weights, beta)
    trace[0] = fval
    it = 0
    status = 1
    while True:
        g = -(x.T @ losses.loss_d1(spec, resid)) / n
        gap = _gap_norm(g, beta, thr)
        if gap <= tol:
            status = 0
            break
        if it >= max_iter:
            status = 1
            break
        h = step
        accepted = False
        while True:
            z = beta - h * g
            beta_new = np.sign(z) * np.maximum(np.abs(z) - h * thr, 0.0)
            nrm = float(np.sqrt(np.sum(beta_new * beta_new)))
            if nrm > radius:
                beta_new *= radius / nrm
            resid_new = y - x @ beta_new
            f_new = _objective(spec, resid_new, n, lam, weights, beta_new)
            # NaN objectives fail this test and keep halving until underflow.
            if f_new <= fval + 1e-12 * (1.0 + abs(fval)):
                accepted = True
                break
            h *= 0.5
            if h < 1e-20:
                break
        if not accepted:
            status = 2
            break
        beta = beta_new
        resid = resid_new
        fval = f_new
        it += 1
        trace[it] = fval
    on_boundary = float(np.sqrt(np.sum(beta * beta))) >= radius - 1e-8
    return beta, it, float(gap), trace[: it + 1].copy(), status, bool(on_boundary)


def sirs_statistic(x, y):
    """Mean squared indicator-covariance per column, ties broken strictly.

    For each column j this is (1/n) sum_k [ (1/n) sum_i x_ij 1{y_i < y_k} ]^2.
    Computed in O(n log n + n p) via prefix sums over the sorted responses.
    Summation order is pinned: prefix sums run in ascending response order and
    the outer reduction runs in original row order, so the result is exactly
    reproducible by a brute-force double loop taken in the same order.
    """
    n = y.shape[0]
    order = np.argsort(y, kind="stable")
    ys = y[order]
    lo = np.searchsorted(ys, y, side="left")
    xs = x[order, :]
    pre = np.empty((n + 1, x.shape[1]))
    pre[0] = 0.0
    np.cumsum(xs, axis=0, out=pre[1:])
    a = pre[lo, :] / n
    sq = a * a
    tot = np.cumsum(sq, axis=0)[-1]
    return tot / n
