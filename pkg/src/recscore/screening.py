"""Feature screening and the recursive screening schedule.

Two marginal screeners are provided: a rank-based one (robust to heavy tails,
the default) and plain absolute correlation as a fallback. The schedule maps
the split point of online inference to the sub-dataset each support estimate
must be computed from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import sirs_statistic
from .core import Dataset, SupportSet, validate_dataset
from .errors import InvalidSplit, ZeroVarianceColumn

SIRS = "sirs"
SIS = "sis"

__all__ = [
    "ScreenerConfig",
    "sirs_stats",
    "sis_stats",
    "select_support",
    "stats_schedule",
    "screening_schedule",
    "supports_from_stats",
    "default_keep",
]


@dataclass(frozen=True)
class ScreenerConfig:
    """Screener choice plus selected-set size and recompute stride.

    keep=None derives floor(n / log n) from the data at use time.
    refresh_every=m > 1 amortizes the per-step schedule: supports are
    recomputed every m-th step and reused in between. fixed_indices is an
    internal hook that bypasses screening entirely with a caller-chosen
    support (used by dense-design equivalence tests); it is not reachable
    from the CLI.
    """

    method: str = SIRS
    keep: int | None = None
    refresh_every: int = 1
    fixed_indices: tuple | None = None

    def __post_init__(self):
        if self.method not in (SIRS, SIS):
            raise ValueError(f"method must be {SIRS!r} or {SIS!r}, got {self.method!r}")
        if self.keep is not None and self.keep < 1:
            raise ValueError("keep must be >= 1")
        if self.refresh_every < 1:
            raise ValueError("refresh_every must be >= 1")
        if self.fixed_indices is not None:
            object.__setattr__(
                self, "fixed_indices", tuple(int(j) for j in self.fixed_indices)
            )


def default_keep(n):
    """floor(n / log n), the standard sure-screening set size; >= 1."""
    if n < 2:
        raise ValueError("need n >= 2")
    return max(1, int(math.floor(n / math.log(n))))


def sirs_stats(d):
    """Rank-based screening statistic per column.

    omega_j = (1/n) sum_k [ (1/n) sum_i x_ij 1{y_i < y_k} ]^2 with strict
    inequality on ties, computed on internally standardized columns. Only the
    ranks of y enter, so the statistic is invariant to strictly monotone
    transforms of the response. Zero-variance columns carry no information
    and get statistic 0.
    """
    validate_dataset(d)
    if d.n < 2:
        raise ValueError("need n >= 2")
    mean = d.x.mean(axis=0)
    scale = d.x.std(axis=0)
    dead = scale == 0.0
    xs = (d.x - mean) / np.where(dead, 1.0, scale)
    stats = np.asarray(sirs_statistic(np.ascontiguousarray(xs), d.y))
    if dead.any():
        stats = np.where(dead, 0.0, stats)
    return stats


def sis_stats(d):
    """Absolute sample correlation of each column with the response."""
    validate_dataset(d)
    if d.n < 2:
        raise ValueError("need n >= 2")
    xc = d.x - d.x.mean(axis=0)
    yc = d.y - d.y.mean()
    sy = float(np.sqrt(np.sum(yc * yc)))
    if sy == 0.0:
        raise ZeroVarianceColumn("y")
    sx = np.sqrt(np.sum(xc * xc, axis=0))
    dead = np.flatnonzero(sx == 0.0)
    if dead.size:
        raise ZeroVarianceColumn(int(dead[0]))
    return np.abs(xc.T @ yc) / (sx * sy)


def select_support(stats, j0, keep):
    """Indices of the keep largest stats after removing j0.

    Ties broken toward the smaller index; result sorted ascending with
    cardinality min(keep, p - 1).
    """
    stats = np.asarray(stats, dtype=np.float64)
    p = stats.shape[0]
    if not 0 <= j0 < p:
        raise ValueError(f"j0={j0} out of range for p={p}")
    if keep < 1:
        raise ValueError("keep must be >= 1")
    order = np.argsort(-stats, kind="stable")
    order = order[order != j0]
    chosen = np.sort(order[: min(keep, p - 1)])
    return SupportSet(tuple(int(j) for j in chosen))


def _sub(d, rows):
    return Dataset(d.x[rows], d.y[rows])


def stats_schedule(d, s_n, cfg):
    """Screening statistics for every schedule key; see screening_schedule.

    Values for non-refresh steps alias the most recent refreshed vector.
    Separate from support selection so multiple targets j0 can share one
    pass over the data.
    """
    validate_dataset(d)
    n = d.n
    if not 1 < s_n < n:
        raise InvalidSplit(f"s_n must satisfy 1 < s_n < n, got s_n={s_n}, n={n}")
    stat_fn = sirs_stats if cfg.method == SIRS else sis_stats
    out = {-s_n: stat_fn(_sub(d, slice(s_n, n)))}
    current = None
    for t in range(s_n, n):
        if (t - s_n) % cfg.refresh_every == 0:
            current = stat_fn(_sub(d, slice(0, t)))
        out[t] = current
    return out


def screening_schedule(d, j0, s_n, cfg):
    """Map each schedule key to an estimated support excluding j0.

    Key -s_n holds the support estimated from rows s_n..n-1 (used for the
    first s_n online steps); key t, for t in s_n..n-1, holds the support
    estimated from rows 0..t-1, refreshed every cfg.refresh_every steps and
    reused in between.
    """
    validate_dataset(d)
    n = d.n
    if not 1 < s_n < n:
        raise InvalidSplit(f"s_n must satisfy 1 < s_n < n, got s_n={s_n}, n={n}")
    keep = cfg.keep if cfg.keep is not None else default_keep(n)
    if keep > n:
        raise ValueError(f"keep={keep} exceeds n={n}")
    if cfg.fixed_indices is not None:
        fixed = SupportSet(tuple(sorted(set(cfg.fixed_indices) - {j0})))
        return {k: fixed for k in [-s_n, *range(s_n, n)]}
    stats = stats_schedule(d, s_n, cfg)
    return supports_from_stats(stats, j0, keep)


def supports_from_stats(stats, j0, keep):
    """Support per schedule key from precomputed statistics.

    Keys whose stats vector aliases the previous one (non-refresh steps)
    share the previous SupportSet, so selection runs once per refresh.
    """
    out = {}
    prev_stats = None
    prev_support = None
    neg = [k for k in stats if k < 0]
    pos = sorted(k for k in stats if k >= 0)
    for key in neg + pos:
        if stats[key] is not prev_stats:
            prev_stats = stats[key]
            prev_support = select_support(prev_stats, j0, keep)
        out[key] = prev_support
    return out
