"""Confidence intervals for single coefficients in high dimension.

Pipeline: a two-stage adaptive l1 initial estimator, a plug-in Hessian at
that estimate, per-support decorrelation weights and score variance, then a
Newton solve of the online decorrelated score equation. The score pairs each
observation with a nuisance support estimated without that observation (rows
after the split for early rows, the preceding prefix for later ones), which
is what makes the resulting z-statistic valid without sample splitting's
efficiency loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import ndtri

from . import losses
from .core import Dataset, SeedSpec, SolverConfig, SupportSet, rng_from_spec, validate_dataset
from .errors import (
    DegenerateVariance,
    DomainError,
    InvalidSplit,
    RecscoreError,
    SingularHessian,
    SolverFailure,
    ZeroNewtonDenominator,
)
from .losses import LossSpec, loss_d1, loss_d2
from .screening import ScreenerConfig, default_keep, stats_schedule, supports_from_stats
from .solver import composite_gd, default_step_size

__all__ = [
    "InferenceConfig",
    "InferenceResult",
    "TargetInference",
    "default_lambda_grid",
    "default_split",
    "cv_lambda",
    "initial_estimator",
    "empirical_hessian_sub",
    "omega_hat",
    "sigma_hat_sq",
    "recursive_score_fit",
    "normal_quantile",
    "bonferroni_infer",
]


@dataclass(frozen=True)
class InferenceConfig:
    """Everything recursive_score_fit needs besides the data.

    s_n=None derives floor(2n/log n) at fit time; lambda_grid=None derives
    the default grid from (n, p). The solver config is a template: its lam is
    replaced by the cross-validated value. seed drives fold assignment (the
    only randomness in the pipeline).
    """

    j0: int
    alpha: float = 0.05
    s_n: int | None = None
    newton_steps: int = 8
    loss: LossSpec = LossSpec("tukey")
    screener: ScreenerConfig = ScreenerConfig()
    solver: SolverConfig = SolverConfig(lam=0.0)
    adaptive_gamma: float = 1.0
    cv_folds: int = 5
    lambda_grid: tuple | None = None
    seed: SeedSpec = SeedSpec(0)

    def __post_init__(self):
        if self.j0 < 0:
            raise ValueError("j0 must be nonnegative")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.newton_steps < 1:
            raise ValueError("newton_steps must be >= 1")
        if self.adaptive_gamma < 0:
            raise ValueError("adaptive_gamma must be >= 0")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be >= 2")
        if self.lambda_grid is not None:
            grid = tuple(float(l) for l in self.lambda_grid)
            if not grid:
                raise ValueError("lambda_grid must be nonempty")
            if any(l <= 0 for l in grid):
                raise ValueError("lambda_grid values must be > 0")
            object.__setattr__(self, "lambda_grid", grid)


@dataclass(frozen=True)
class InferenceResult:
    """One target's estimate, studentization slope and interval.

    gamma is the Newton denominator at the second-to-last iterate divided
    by n; sqrt(n)*gamma*(beta_hat - truth) is asymptotically standard
    normal, which is what the interval inverts. newton_trace holds the l+1
    iterates starting at the initial estimate. ridge_applied flags that the
    restricted Hessian needed diagonal regularization somewhere.
    """

    beta_hat: float
    gamma: float
    ci_lo: float
    ci_hi: float
    sigma_hat_minus_sn: float
    newton_trace: np.ndarray
    support_minus_sn: SupportSet
    beta_tilde: np.ndarray
    ridge_applied: bool = False


@dataclass(frozen=True)
class TargetInference:
    """Per-target outcome of a multiple-testing batch.

    Exactly one of result/error is set; significant means the adjusted CI
    excludes zero (None when the target errored).
    """

    j0: int
    adjusted_alpha: float
    result: InferenceResult | None = None
    error: str | None = None
    significant: bool | None = None


def default_split(n):
    """floor(2n / log n), the split point between schedule halves."""
    if n < 3:
        raise ValueError("need n >= 3")
    return int(math.floor(2.0 * n / math.log(n)))


def default_lambda_grid(n, p, num=20):
    """Geometric grid on [0.05, 2] x sqrt(log p / n), the penalty's natural scale.

    log p degenerates to 0 at p=1, so a single-feature problem borrows the
    p=2 scale instead of an empty grid.
    """
    scale = math.sqrt(math.log(max(p, 2)) / n)
    return tuple(np.geomspace(0.05 * scale, 2.0 * scale, num))


def normal_quantile(q):
    """Upper-tail standard normal quantile: the z with P(N(0,1) > z) = q."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must be in (0, 1), got {q}")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return float(-ndtri(q))
    return float(ndtri(1.0 - q))


# Budget for fold fits only. Scoring needs rough solutions, not certificates:
# the selected value is insensitive to this budget (final fits use the full one).
_CV_TOL_FLOOR = 1e-3
_CV_ITER_CAP = 500


def cv_lambda(d, spec, grid, folds, seed, solver=None):
    """Penalty level minimizing mean held-out loss over seeded folds.

    Folds are a seed-deterministic partition of the rows; each grid value is
    fit on every training complement (warm-started along the descending
    grid) and scored by the mean of per-fold mean held-out losses. Ties go
    to the smaller value. Fold fits run under a capped iteration budget.
    """
    validate_dataset(d)
    grid = [float(l) for l in grid]
    if not grid:
        raise ValueError("grid must be nonempty")
    if not 2 <= folds <= d.n:
        raise ValueError(f"folds must be in [2, n], got {folds}")
    template = solver if solver is not None else SolverConfig(lam=0.0)
    cv_tol = max(template.tol, _CV_TOL_FLOOR)
    cv_iter = min(template.max_iter, _CV_ITER_CAP)
    order = np.argsort(grid, kind="stable")[::-1]
    perm = rng_from_spec(seed).permutation(d.n)
    scores = np.zeros(len(grid))
    for f in range(folds):
        test_mask = np.zeros(d.n, dtype=bool)
        test_mask[perm[f::folds]] = True
        d_train = Dataset(d.x[~test_mask], d.y[~test_mask])
        d_test = Dataset(d.x[test_mask], d.y[test_mask])
        step = template.step_size
        if step is None:
            step = default_step_size(d_train, spec)
        init = None
        for gi in order:
            cfg = replace(
                template, lam=grid[gi], step_size=step, tol=cv_tol, max_iter=cv_iter
            )
            res = composite_gd(d_train, spec, cfg, init=init)
            init = res.beta
            resid = d_test.y - d_test.x @ res.beta
            scores[gi] += float(np.mean(losses.loss_value(spec, resid)))
    scores /= folds
    best = 0
    for gi in range(1, len(grid)):
        if scores[gi] < scores[best] or (scores[gi] == scores[best] and grid[gi] < grid[best]):
            best = gi
    return grid[best]


def initial_estimator(d, spec, cfg):
    """Two-stage adaptive l1 estimate of the full coefficient vector.

    Stage 1 solves at the cross-validated penalty with uniform weights;
    stage 2 reweights each coordinate by 1/max(|stage1_j|, 1e-4)^gamma and
    re-solves, warm-started at the stage-1 solution.
    """
    grid = cfg.lambda_grid if cfg.lambda_grid is not None else default_lambda_grid(d.n, d.p)
    lam = cv_lambda(d, spec, grid, cfg.cv_folds, cfg.seed, solver=cfg.solver)
    step = cfg.solver.step_size
    if step is None:
        step = default_step_size(d, spec)
    stage1 = composite_gd(d, spec, replace(cfg.solver, lam=lam, step_size=step))
    w = 1.0 / np.maximum(np.abs(stage1.beta), 1e-4) ** cfg.adaptive_gamma
    stage2 = composite_gd(
        d,
        spec,
        replace(cfg.solver, lam=lam, step_size=step, weights=w),
        init=stage1.beta,
    )
    if stage2.on_boundary:
        raise SolverFailure(
            "initial estimate sits on the constraint boundary; increase the radius"
        )
    return stage2.beta


def empirical_hessian_sub(d, beta_tilde, spec, rows):
    """Submatrix of (1/n) sum_i l''(r_i) x_i x_i' on the given index set.

    rows is the index set of the submatrix (a SupportSet or index sequence,
    typically the support plus the target); the full p x p matrix is never
    formed.
    """
    idx = rows.as_array() if isinstance(rows, SupportSet) else np.asarray(rows, dtype=np.intp)
    if idx.size > d.n:
        raise ValueError(f"index set size {idx.size} exceeds n={d.n}")
    resid = d.y - d.x @ np.asarray(beta_tilde, dtype=np.float64)
    d2 = loss_d2(spec, resid)
    xs = d.x[:, idx]
    h = (xs * d2[:, None]).T @ xs / d.n
    return (h + h.T) / 2.0


def omega_hat(hess_sub, m, j0):
    """Decorrelation weights: solve H_MM w = H_Mj0 inside the submatrix.

    hess_sub must be indexed by sorted(M + {j0}). Solved by Cholesky with no
    explicit inverse; raises SingularHessian when the factorization fails,
    a pivot falls at or below 1e-10, or the solve residual exceeds
    1e-8 * ||rhs||. Empty M returns an empty vector.
    """
    m_idx = m.as_array() if isinstance(m, SupportSet) else np.asarray(m, dtype=np.intp)
    if m_idx.size == 0:
        return np.empty(0)
    union = np.sort(np.append(m_idx, j0))
    pos = {int(jj): k for k, jj in enumerate(union)}
    mm = np.asarray([pos[int(jj)] for jj in m_idx], dtype=np.intp)
    pj = pos[int(j0)]
    a = hess_sub[np.ix_(mm, mm)]
    b = hess_sub[mm, pj]
    try:
        factor = cho_factor(a, lower=True)
    except LinAlgError as exc:
        raise SingularHessian(str(exc)) from None
    if float(np.min(np.abs(np.diag(factor[0])))) <= 1e-10:
        raise SingularHessian("Cholesky pivot at or below 1e-10")
    w = cho_solve(factor, b)
    bnorm = float(np.linalg.norm(b))
    if float(np.linalg.norm(a @ w - b)) > 1e-8 * max(bnorm, 1e-300):
        raise SingularHessian("solve residual exceeds 1e-8 of the right-hand side")
    return w


def sigma_hat_sq(d, beta_tilde, spec, m, j0, omega):
    """Plug-in variance of the decorrelated score component.

    (1/n) sum_i [l'(r_i)]^2 (x_ij0 - w' x_iM)^2; the loss-derivative sign
    factors of the two score components square away.
    """
    m_idx = m.as_array() if isinstance(m, SupportSet) else np.asarray(m, dtype=np.intp)
    omega = np.asarray(omega, dtype=np.float64)
    if omega.shape[0] != m_idx.size:
        raise ValueError("omega length must equal |M|")
    resid = d.y - d.x @ np.asarray(beta_tilde, dtype=np.float64)
    d1 = loss_d1(spec, resid)
    z = d.x[:, j0] - (d.x[:, m_idx] @ omega if m_idx.size else 0.0)
    val = float(np.mean((d1 * z) ** 2))
    if val < 1e-12:
        raise DegenerateVariance(
            f"score variance {val:.3e} < 1e-12: column {j0} is explained by the support"
        )
    return val


@dataclass(frozen=True)
class _FitPieces:
    """Target-independent intermediates shared across a multi-target batch."""

    beta_tilde: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    s_n: int
    keep: int
    stats: dict | None = None  # None when the screener pins fixed_indices


def _build_pieces(d, cfg):
    validate_dataset(d)
    n = d.n
    s_n = cfg.s_n if cfg.s_n is not None else default_split(n)
    if not 1 < s_n < n:
        raise InvalidSplit(f"s_n must satisfy 1 < s_n < n, got s_n={s_n}, n={n}")
    keep = cfg.screener.keep if cfg.screener.keep is not None else default_keep(n)
    if keep > n:
        raise ValueError(f"keep={keep} exceeds n={n}")
    beta_tilde = initial_estimator(d, cfg.loss, cfg)
    resid = d.y - d.x @ beta_tilde
    stats = None
    if cfg.screener.fixed_indices is None:
        stats = stats_schedule(d, s_n, cfg.screener)
    return _FitPieces(
        beta_tilde=beta_tilde,
        d1=loss_d1(cfg.loss, resid),
        d2=loss_d2(cfg.loss, resid),
        s_n=s_n,
        keep=keep,
        stats=stats,
    )


def _hessian_sub_from_d2(d, d2, idx):
    xs = d.x[:, idx]
    h = (xs * d2[:, None]).T @ xs / d.n
    return (h + h.T) / 2.0


def _omega_with_ridge(hess_sub, m, j0):
    """omega_hat with one diagonal-ridge retry; returns (omega, ridged)."""
    try:
        return omega_hat(hess_sub, m, j0), False
    except SingularHessian:
        m_size = len(m)
        if m_size == 0:
            raise
        union = np.sort(np.append(m.as_array(), j0))
        mm = np.asarray([int(np.searchsorted(union, jj)) for jj in m.as_array()])
        ridge = 1e-6 * float(np.trace(hess_sub[np.ix_(mm, mm)])) / m_size
        bumped = hess_sub.copy()
        bumped[mm, mm] += ridge
        return omega_hat(bumped, m, j0), True


def _fit_target(d, cfg, pieces):
    n = d.n
    s_n = pieces.s_n
    j0 = cfg.j0
    if not 0 <= j0 < d.p:
        raise ValueError(f"j0={j0} out of range for p={d.p}")
    if cfg.screener.fixed_indices is not None:
        fixed = SupportSet(tuple(sorted(set(cfg.screener.fixed_indices) - {j0})))
        supports = {k: fixed for k in [-s_n, *range(s_n, n)]}
    else:
        supports = supports_from_stats(pieces.stats, j0, pieces.keep)

    # group observations by the support their schedule entry resolves to
    groups = {}
    for t in range(n):
        sup = supports[-s_n] if t < s_n else supports[t]
        groups.setdefault(sup.indices, []).append(t)

    beta_tilde = pieces.beta_tilde
    a = np.empty(n)      # Z_t / sigma_t
    base = np.empty(n)   # x_{t,M}' beta_tilde_M
    ridged = False
    per_support = {}
    for sup_idx, rows in groups.items():
        sup = SupportSet(sup_idx)
        m_arr = sup.as_array()
        union = np.sort(np.append(m_arr, j0))
        hess = _hessian_sub_from_d2(d, pieces.d2, union)
        omega, used_ridge = _omega_with_ridge(hess, sup, j0)
        ridged = ridged or used_ridge
        sigma2 = sigma_hat_sq(d, beta_tilde, cfg.loss, sup, j0, omega)
        sigma = math.sqrt(sigma2)
        per_support[sup_idx] = (omega, sigma)
        rows = np.asarray(rows, dtype=np.intp)
        if m_arr.size:
            zr = d.x[rows, j0] - d.x[np.ix_(rows, m_arr)] @ omega
            base[rows] = d.x[np.ix_(rows, m_arr)] @ beta_tilde[m_arr]
        else:
            zr = d.x[rows, j0]
            base[rows] = 0.0
        a[rows] = zr / sigma

    xj = d.x[:, j0]
    spec = cfg.loss
    b = float(beta_tilde[j0])
    trace = [b]
    gamma_raw = 0.0
    for _ in range(cfg.newton_steps):
        resid = d.y - xj * b - base
        score = float(np.sum(a * loss_d1(spec, resid)))
        gamma_raw = float(np.sum(a * (-xj) * loss_d2(spec, resid)))
        if abs(gamma_raw) < 1e-10 * n:
            raise ZeroNewtonDenominator(
                "score derivative vanished; the redescending loss saturated "
                "(consider a larger tuning constant)"
            )
        b = b - score / gamma_raw
        trace.append(b)

    gamma = gamma_raw / n
    half = normal_quantile(cfg.alpha / 2.0) / (math.sqrt(n) * abs(gamma))
    minus = supports[-s_n].indices
    return InferenceResult(
        beta_hat=b,
        gamma=gamma,
        ci_lo=b - half,
        ci_hi=b + half,
        sigma_hat_minus_sn=per_support[minus][1],
        newton_trace=np.asarray(trace),
        support_minus_sn=supports[-s_n],
        beta_tilde=beta_tilde,
        ridge_applied=ridged,
    )


def recursive_score_fit(d, cfg):
    """Estimate and interval for coefficient cfg.j0 via the online score.

    Builds the initial estimate and plug-in pieces, pairs every observation
    with a support screened without it, runs exactly cfg.newton_steps Newton
    updates on the resulting score equation from the initial estimate's j0
    coordinate, and inverts the studentized limit into a two-sided CI.
    """
    pieces = _build_pieces(d, cfg)
    return _fit_target(d, cfg, pieces)


def bonferroni_infer(d, cfg, targets):
    """recursive_score_fit per target at level alpha/len(targets).

    The initial estimate, derivative caches and screening statistics are
    shared across targets; cfg.j0 is ignored. Per-target failures are
    recorded, not raised.
    """
    targets = [int(j) for j in targets]
    if not targets:
        raise ValueError("targets must be nonempty")
    adjusted = cfg.alpha / len(targets)
    pieces = _build_pieces(d, replace(cfg, j0=targets[0]))
    out = []
    for j0 in targets:
        sub = replace(cfg, j0=j0, alpha=adjusted)
        try:
            res = _fit_target(d, sub, pieces)
        except RecscoreError as exc:
            out.append(TargetInference(j0=j0, adjusted_alpha=adjusted, error=str(exc)))
            continue
        sig = not (res.ci_lo <= 0.0 <= res.ci_hi)
        out.append(
            TargetInference(j0=j0, adjusted_alpha=adjusted, result=res, significant=sig)
        )
    return out
