"""Synthetic designs and the replication harness for coverage studies.

Covariates are AR(1)-correlated Gaussians; errors come from a Gaussian scale
mixture (a fraction of gross outliers) or a symmetrized lognormal. Each
replication owns a derived seed, so results are reproducible bit for bit at
any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import Dataset, SeedSpec, derive_seed, rng_from_spec
from .errors import AllRepsFailed, RecscoreError
from .inference import InferenceConfig, _build_pieces, _fit_target

CONTAMINATED = "contaminated"
LOGNORMAL_SIGN = "lognormal_sign"

__all__ = [
    "ErrorModel",
    "SimDesign",
    "EcpAlRow",
    "RepRecord",
    "gen_ar1_covariates",
    "gen_errors",
    "run_replications",
]


@dataclass(frozen=True)
class ErrorModel:
    """Noise distribution: contaminated Gaussian (needs sigma) or sign-symmetrized lognormal."""

    kind: str
    sigma: float | None = None

    def __post_init__(self):
        if self.kind == CONTAMINATED:
            if self.sigma is None or self.sigma <= 0:
                raise ValueError("contaminated errors need sigma > 0")
        elif self.kind == LOGNORMAL_SIGN:
            if self.sigma is not None:
                raise ValueError("lognormal_sign takes no sigma")
        else:
            raise ValueError(f"unknown error model {self.kind!r}")


@dataclass(frozen=True)
class SimDesign:
    """One simulation study: design matrix law, truth, noise, method, size."""

    n: int
    p: int
    beta0: tuple  # sparse truth as ((index, value), ...); dicts accepted
    error_model: ErrorModel
    reps: int
    seed: SeedSpec
    targets: tuple
    method: InferenceConfig
    rho: float = 0.5

    def __post_init__(self):
        if self.n < 10:
            raise ValueError("need n >= 10")
        if self.p < 1:
            raise ValueError("need p >= 1")
        if self.reps < 1:
            raise ValueError("need reps >= 1")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must be in [0, 1)")
        items = self.beta0.items() if hasattr(self.beta0, "items") else self.beta0
        pairs = tuple(sorted((int(j), float(v)) for j, v in items))
        if any(not 0 <= j < self.p for j, _ in pairs):
            raise ValueError("beta0 indices must lie in [0, p)")
        object.__setattr__(self, "beta0", pairs)
        targets = tuple(int(j) for j in self.targets)
        if not targets:
            raise ValueError("targets must be nonempty")
        if any(not 0 <= j < self.p for j in targets):
            raise ValueError("target indices must lie in [0, p)")
        object.__setattr__(self, "targets", targets)

    def beta_vector(self):
        beta = np.zeros(self.p)
        for j, v in self.beta0:
            beta[j] = v
        return beta


@dataclass(frozen=True)
class EcpAlRow:
    """Aggregate line of a coverage table for one target coefficient."""

    target: int
    ecp: float
    al_mean: float
    al_sd: float
    reps_ok: int


@dataclass(frozen=True)
class RepRecord:
    """Outcome of one (replication, target) pair; error set when it failed."""

    rep: int
    target: int
    beta_hat: float | None = None
    gamma: float | None = None
    ci_lo: float | None = None
    ci_hi: float | None = None
    covered: bool | None = None
    length: float | None = None
    error: str | None = None


def gen_ar1_covariates(n, p, rho, seed):
    """n i.i.d. rows from N(0, Sigma) with Sigma_jk = rho^|j-k|.

    Built by the AR(1) recursion x_1 = eta_1, x_j = rho x_{j-1} +
    sqrt(1-rho^2) eta_j, which realizes this covariance exactly in O(np).
    """
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must be in [0, 1)")
    rng = rng_from_spec(seed)
    eta = rng.standard_normal((n, p))
    x = np.empty((n, p))
    x[:, 0] = eta[:, 0]
    scale = math.sqrt(1.0 - rho * rho)
    for j in range(1, p):
        x[:, j] = rho * x[:, j - 1] + scale * eta[:, j]
    return x


def gen_errors(model, n, seed):
    """Noise vector under the given model; one stream, fixed draw order."""
    rng = rng_from_spec(seed)
    if model.kind == CONTAMINATED:
        gross = rng.random(n) < 0.1
        return np.where(gross, model.sigma, 1.0) * rng.standard_normal(n)
    signs = 2.0 * rng.integers(0, 2, size=n) - 1.0
    return signs * np.exp(rng.standard_normal(n))


def _run_one_rep(design, rep):
    rep_spec = derive_seed(design.seed, rep)
    x = gen_ar1_covariates(design.n, design.p, design.rho, derive_seed(rep_spec, 0))
    eps = gen_errors(design.error_model, design.n, derive_seed(rep_spec, 1))
    d = Dataset(x, x @ design.beta_vector() + eps)
    truth = design.beta_vector()
    base_cfg = replace(design.method, seed=derive_seed(rep_spec, 2))
    try:
        pieces = _build_pieces(d, replace(base_cfg, j0=design.targets[0]))
    except RecscoreError as exc:
        msg = f"{type(exc).__name__}: {exc}"
        return [RepRecord(rep=rep, target=j, error=msg) for j in design.targets]
    out = []
    for j in design.targets:
        try:
            r = _fit_target(d, replace(base_cfg, j0=j), pieces)
        except RecscoreError as exc:
            out.append(RepRecord(rep=rep, target=j, error=f"{type(exc).__name__}: {exc}"))
            continue
        out.append(
            RepRecord(
                rep=rep,
                target=j,
                beta_hat=r.beta_hat,
                gamma=r.gamma,
                ci_lo=r.ci_lo,
                ci_hi=r.ci_hi,
                covered=bool(r.ci_lo <= truth[j] <= r.ci_hi),
                length=r.ci_hi - r.ci_lo,
            )
        )
    return out


def run_replications(design, threads=1):
    """Run the study and aggregate per-target coverage and length.

    Returns (rows, records): one EcpAlRow per target plus the flat per-rep
    log. Failed (rep, target) pairs are excluded from the aggregates and
    counted through reps_ok. Aggregation always reduces in replication order
    over results keyed by rep id, so the output is identical at any thread
    count. Raises AllRepsFailed if some target has no successful rep.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    reps = design.reps
    if threads == 1:
        per_rep = [_run_one_rep(design, rep) for rep in range(reps)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_rep = list(pool.map(lambda r: _run_one_rep(design, r), range(reps)))
    records = [rec for recs in per_rep for rec in recs]
    rows = []
    for j in design.targets:
        ok = [rec for rec in records if rec.target == j and rec.error is None]
        if not ok:
            raise AllRepsFailed(f"target {j}: all {reps} replications failed")
        lengths = np.asarray([rec.length for rec in ok])
        covers = np.asarray([float(rec.covered) for rec in ok])
        al_sd = float(np.std(lengths, ddof=1)) if len(ok) > 1 else 0.0
        rows.append(
            EcpAlRow(
                target=j,
                ecp=float(np.mean(covers)),
                al_mean=float(np.mean(lengths)),
                al_sd=al_sd,
                reps_ok=len(ok),
            )
        )
    return rows, records
