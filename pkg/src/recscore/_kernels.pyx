# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# cython: language_level=3
"""Compiled kernels: the penalized descent inner loop and the screening statistic.

Semantics mirror recscore._kernels_py. The screening statistic is bit-identical
to the fallback (same summation order); the solver agrees to roundoff.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt
from scipy.linalg.cython_blas cimport dcopy, dgemv

cnp.import_array()

BACKEND_NAME = "cython"


cdef inline double _lval(int family, double c, double t) noexcept nogil:
    cdef double u, a
    if family == 0:                      # tukey
        if fabs(t) <= c:
            u = (t / c) * (t / c)
            a = 1.0 - u
            return (c * c / 6.0) * (1.0 - a * a * a)
        return c * c / 6.0
    elif family == 1:                    # pseudo_huber
        u = t / c
        return c * c * (sqrt(1.0 + u * u) - 1.0)
    elif family == 2:                    # huber
        if fabs(t) <= c:
            return 0.5 * t * t
        return c * fabs(t) - 0.5 * c * c
    else:                                # squared
        return 0.5 * t * t


cdef inline double _ld1(int family, double c, double t) noexcept nogil:
    cdef double u, a
    if family == 0:
        if fabs(t) <= c:
            u = (t / c) * (t / c)
            a = 1.0 - u
            return t * a * a
        return 0.0
    elif family == 1:
        u = t / c
        return t / sqrt(1.0 + u * u)
    elif family == 2:
        if t > c:
            return c
        elif t < -c:
            return -c
        return t
    else:
        return t


def solve_penalized(double[:, ::1] x, double[::1] y, int family, double tuning,
                    double lam, double[::1] weights, double[::1] beta0,
                    double step, double radius, double tol, long max_iter):
    """Composite gradient descent on (1/n) sum l(y - x b) + lam * sum w |b|,
    constrained to the l2 ball of the given radius.

    Returns (beta, iterations, final_gap, objective_trace, status, on_boundary)
    where status is 0 on stationarity (gap <= tol), 1 on max_iter, 2 on step
    underflow in the objective-increase halving.
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t p = x.shape[1]
    cdef double dn = <double> n

    beta_arr = np.empty(p)
    g_arr = np.empty(p)
    beta_new_arr = np.empty(p)
    resid_arr = np.empty(n)
    resid_new_arr = np.empty(n)
    dvec_arr = np.empty(n)
    trace_arr = np.empty(max_iter + 1)
    thr_arr = np.empty(p)

    cdef double[::1] beta = beta_arr
    cdef double[::1] g = g_arr
    cdef double[::1] beta_new = beta_new_arr
    cdef double[::1] resid = resid_arr
    cdef double[::1] resid_new = resid_new_arr
    cdef double[::1] dvec = dvec_arr
    cdef double[::1] trace = trace_arr
    cdef double[::1] thr = thr_arr

    cdef Py_ssize_t i, j
    cdef long it = 0
    cdef int status = 1
    cdef bint accepted
    cdef double fval, f_new, gap, h, acc, z, az, nrm, rr, tmp

    # Row-major x doubles as a Fortran (p, n) matrix holding x^T, so BLAS
    # does both products: trans='T' gives x @ v, trans='N' gives x^T @ v.
    cdef char tN = c'N'
    cdef char tT = c'T'
    cdef int bm = <int> p
    cdef int bn = <int> n
    cdef int lda = <int> p
    cdef int inc = 1
    cdef double one = 1.0
    cdef double zero = 0.0
    cdef double neg = -1.0
    cdef double ninv = -1.0 / dn

    with nogil:
        for j in range(p):
            beta[j] = beta0[j]
            thr[j] = lam * weights[j]

        dcopy(&bn, &y[0], &inc, &resid[0], &inc)
        dgemv(&tT, &bm, &bn, &neg, &x[0, 0], &lda, &beta[0], &inc, &one, &resid[0], &inc)
        fval = 0.0
        for i in range(n):
            fval += _lval(family, tuning, resid[i])
        fval /= dn
        acc = 0.0
        for j in range(p):
            acc += weights[j] * fabs(beta[j])
        fval += lam * acc
        trace[0] = fval

        gap = 0.0
        while True:
            for i in range(n):
                dvec[i] = _ld1(family, tuning, resid[i])
            dgemv(&tN, &bm, &bn, &ninv, &x[0, 0], &lda, &dvec[0], &inc, &zero, &g[0], &inc)
            acc = 0.0
            for j in range(p):
                if beta[j] > 0.0:
                    tmp = g[j] + thr[j]
                elif beta[j] < 0.0:
                    tmp = g[j] - thr[j]
                else:
                    tmp = fabs(g[j]) - thr[j]
                    if tmp < 0.0:
                        tmp = 0.0
                acc += tmp * tmp
            gap = sqrt(acc)
            if gap <= tol:
                status = 0
                break
            if it >= max_iter:
                status = 1
                break
            h = step
            accepted = False
            while True:
                for j in range(p):
                    z = beta[j] - h * g[j]
                    az = fabs(z) - h * thr[j]
                    if az < 0.0:
                        az = 0.0
                    if z > 0.0:
                        beta_new[j] = az
                    elif z < 0.0:
                        beta_new[j] = -az
                    else:
                        beta_new[j] = 0.0
                nrm = 0.0
                for j in range(p):
                    nrm += beta_new[j] * beta_new[j]
                nrm = sqrt(nrm)
                if nrm > radius:
                    rr = radius / nrm
                    for j in range(p):
                        beta_new[j] *= rr
                dcopy(&bn, &y[0], &inc, &resid_new[0], &inc)
                dgemv(&tT, &bm, &bn, &neg, &x[0, 0], &lda, &beta_new[0], &inc, &one,
                      &resid_new[0], &inc)
                f_new = 0.0
                for i in range(n):
                    f_new += _lval(family, tuning, resid_new[i])
                f_new /= dn
                acc = 0.0
                for j in range(p):
                    acc += weights[j] * fabs(beta_new[j])
                f_new += lam * acc
                # NaN objectives fail this test and keep halving until underflow.
                if f_new <= fval + 1e-12 * (1.0 + fabs(fval)):
                    accepted = True
                    break
                h *= 0.5
                if h < 1e-20:
                    break
            if not accepted:
                status = 2
                break
            for j in range(p):
                beta[j] = beta_new[j]
            for i in range(n):
                resid[i] = resid_new[i]
            fval = f_new
            it += 1
            trace[it] = fval

        nrm = 0.0
        for j in range(p):
            nrm += beta[j] * beta[j]
        nrm = sqrt(nrm)
    on_boundary = nrm >= radius - 1e-8
    return beta_arr, int(it), gap, trace_arr[: it + 1].copy(), status, bool(on_boundary)


def sirs_statistic(double[:, ::1] x, double[::1] y):
    """Mean squared indicator-covariance per column, ties broken strictly.

    Same pinned summation order as the fallback implementation: prefix sums in
    ascending response order, outer reduction in original row order.
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t p = x.shape[1]
    cdef double dn = <double> n

    y_arr = np.asarray(y)
    order = np.argsort(y_arr, kind="stable")
    ys = y_arr[order]
    lo_arr = np.ascontiguousarray(np.searchsorted(ys, y_arr, side="left"), dtype=np.int64)
    xt_arr = np.ascontiguousarray(np.asarray(x)[order, :].T)

    cdef double[:, ::1] xt = xt_arr
    cdef cnp.int64_t[::1] lo = lo_arr
    pre_arr = np.empty(n + 1)
    out_arr = np.empty(p)
    cdef double[::1] pre = pre_arr
    cdef double[::1] out = out_arr
    cdef Py_ssize_t f, m, k
    cdef double run, s, t

    for f in range(p):
        run = 0.0
        pre[0] = 0.0
        for m in range(n):
            run = run + xt[f, m]
            pre[m + 1] = run
        s = 0.0
        for k in range(n):
            t = pre[lo[k]] / dn
            s = s + t * t
        out[f] = s / dn
    return out_arr
