"""Penalized M-estimation: composite gradient descent over an l2 ball.

Minimizes F(beta) = (1/n) sum_i l(y_i - x_i' beta) + lam sum_j w_j |beta_j|
subject to ||beta||_2 <= r. The loss may be nonconvex (Tukey), so the solver
only certifies first-order stationarity: it stops when the minimal-subgradient
norm falls below tol. A fixed step with objective-increase halving keeps the
trace monotone without a Lipschitz constant in hand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend, losses
from .core import validate_dataset
from .errors import BoundaryActive, DimensionMismatch, NonFiniteObjective

__all__ = [
    "SolveResult",
    "empirical_risk",
    "empirical_risk_grad",
    "soft_threshold",
    "project_l2",
    "stationarity_gap",
    "composite_gd",
    "default_step_size",
]


@dataclass(frozen=True)
class SolveResult:
    """Terminal state of one penalized solve.

    converged means the stationarity gap certificate held (gap <= tol) with
    the ball constraint inactive; on_boundary flags final iterates within
    1e-8 of the ball surface, where the certificate is void.
    """

    beta: np.ndarray
    iterations: int
    final_gap: float
    objective_trace: np.ndarray
    converged: bool
    on_boundary: bool = False


def empirical_risk(d, beta, spec):
    """(1/n) sum_i l(y_i - x_i' beta)."""
    resid = d.y - d.x @ np.asarray(beta, dtype=np.float64)
    return float(np.sum(losses.loss_value(spec, resid))) / d.n


def empirical_risk_grad(d, beta, spec):
    """Gradient of empirical_risk: -(1/n) sum_i l'(r_i) x_i."""
    resid = d.y - d.x @ np.asarray(beta, dtype=np.float64)
    return -(d.x.T @ losses.loss_d1(spec, resid)) / d.n


def soft_threshold(v, kappa, weights=None):
    """Componentwise sign(v) max(|v| - kappa*w, 0); the l1 prox."""
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    v = np.asarray(v, dtype=np.float64)
    thr = kappa if weights is None else kappa * np.asarray(weights, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - thr, 0.0)


def project_l2(v, r):
    """Euclidean projection onto the centered l2 ball of radius r."""
    if r <= 0:
        raise ValueError("r must be > 0")
    v = np.asarray(v, dtype=np.float64)
    nrm = float(np.linalg.norm(v))
    if nrm <= r:
        return v.copy()
    return v * (r / nrm)


def stationarity_gap(d, beta, spec, lam, weights=None, radius=10.0):
    """Minimal-norm subgradient of the penalized objective at beta.

    Coordinatewise: g_j + lam*w_j*sign(beta_j) on the active set, and
    max(0, |g_j| - lam*w_j) off it. Valid only in the interior of the ball;
    raises BoundaryActive within 1e-8 of the surface. Pass radius=None to
    skip the boundary check.
    """
    beta = np.asarray(beta, dtype=np.float64)
    if radius is not None and float(np.linalg.norm(beta)) >= radius - 1e-8:
        raise BoundaryActive(
            "||beta|| is within 1e-8 of the constraint radius; the gap "
            "certificate does not apply on the boundary"
        )
    g = empirical_risk_grad(d, beta, spec)
    w = np.ones(d.p) if weights is None else np.asarray(weights, dtype=np.float64)
    thr = lam * w
    r = np.where(beta != 0.0, g + thr * np.sign(beta), np.maximum(np.abs(g) - thr, 0.0))
    return float(np.linalg.norm(r))


def default_step_size(d, spec):
    """0.5 / (sup l'' on a grid  x  power-iteration estimate of lam_max((1/n)X'X))."""
    c = spec.tuning
    grid = np.linspace(-3.0 * c, 3.0 * c, 1201)
    d2max = float(np.max(losses.loss_d2(spec, grid)))
    v = np.full(d.p, 1.0 / np.sqrt(d.p))
    lam_max = 0.0
    for _ in range(20):
        w = d.x.T @ (d.x @ v) / d.n
        nrm = float(np.linalg.norm(w))
        if nrm == 0.0:
            lam_max = 0.0
            break
        v = w / nrm
        lam_max = nrm
    return 0.5 / max(d2max * lam_max, 1e-12)


def composite_gd(d, spec, cfg, init=None):
    """Run the descent from init (default 0) and return a SolveResult.

    Each accepted iterate is project_l2(soft_threshold(beta - h*grad, lam*h*w), r);
    h starts at cfg.step_size (or a derived default) and halves while the
    objective would increase. Stops at stationarity gap <= cfg.tol or after
    cfg.max_iter accepted steps (converged=False then).
    """
    validate_dataset(d)
    p = d.p
    w = np.ones(p) if cfg.weights is None else cfg.weights
    if w.shape[0] != p:
        raise DimensionMismatch(f"weights has length {w.shape[0]}, expected {p}")
    if init is None:
        b0 = np.zeros(p)
    else:
        b0 = np.ascontiguousarray(init, dtype=np.float64)
        if b0.shape != (p,):
            raise DimensionMismatch(f"init has shape {b0.shape}, expected ({p},)")
        if float(np.linalg.norm(b0)) > cfg.radius + 1e-10:
            raise ValueError("init lies outside the constraint ball")
    step = cfg.step_size if cfg.step_size is not None else default_step_size(d, spec)
    beta, it, gap, trace, status, on_boundary = _backend.solve_penalized(
        d.x,
        d.y,
        losses.FAMILY_ID[spec.family],
        spec.tuning,
        cfg.lam,
        np.ascontiguousarray(w),
        b0,
        step,
        cfg.radius,
        cfg.tol,
        cfg.max_iter,
    )
    if not np.all(np.isfinite(trace)):
        raise NonFiniteObjective("objective became non-finite; reduce the step size")
    return SolveResult(
        beta=beta,
        iterations=int(it),
        final_gap=float(gap),
        objective_trace=trace,
        converged=(status == 0) and not on_boundary,
        on_boundary=bool(on_boundary),
    )
