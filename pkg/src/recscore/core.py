"""Shared data model: datasets, support sets, solver/seed configuration.

All containers are immutable after construction and safe to share across
parallel workers; the operations here are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonFiniteValue, ZeroVarianceColumn

__all__ = [
    "Dataset",
    "SupportSet",
    "SolverConfig",
    "SeedSpec",
    "StandardizeRecord",
    "validate_dataset",
    "standardize",
    "derive_seed",
    "rng_from_spec",
]


@dataclass(frozen=True)
class Dataset:
    """An n x p covariate matrix paired with a length-n response vector."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.ascontiguousarray(self.x, dtype=np.float64))
        object.__setattr__(self, "y", np.ascontiguousarray(self.y, dtype=np.float64))

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]


@dataclass(frozen=True)
class SupportSet:
    """A strictly increasing tuple of column indices estimating the active set."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(int(j) for j in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("support indices must be strictly increasing")
        if idx and idx[0] < 0:
            raise ValueError("support indices must be nonnegative")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, j):
        return j in self.indices

    def as_array(self):
        return np.asarray(self.indices, dtype=np.intp)


@dataclass(frozen=True)
class SolverConfig:
    """Settings for the l1-penalized, l2-ball-constrained descent.

    lam is the penalty level; step_size=None means "derive from the data"
    (0.5 / Lipschitz estimate). weights are optional per-coordinate penalty
    multipliers (adaptive second stage).
    """

    lam: float
    step_size: float | None = None
    radius: float = 10.0
    tol: float = 1e-6
    max_iter: int = 5000
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.step_size is not None and self.step_size <= 0:
            raise ValueError("step_size must be > 0")
        if self.radius <= 0:
            raise ValueError("radius must be > 0")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.weights is not None:
            w = np.ascontiguousarray(self.weights, dtype=np.float64)
            if np.any(w < 0):
                raise ValueError("weights must be >= 0")
            object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class SeedSpec:
    """Root of a reproducible random stream.

    Distinct (base_seed, stream_id) pairs map to statistically independent
    streams via numpy's SeedSequence, independent of platform and thread
    scheduling.
    """

    base_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.stream_id < 0:
            raise ValueError("stream_id must be nonnegative")


def derive_seed(spec, rep):
    """Child seed for replication `rep`; pure, injective over rep < 2**32."""
    if rep < 0:
        raise ValueError("rep must be >= 0")
    if rep >= 1 << 32:
        raise ValueError("rep must be < 2**32")
    return SeedSpec(spec.base_seed, (spec.stream_id << 32) + rep)


def rng_from_spec(spec):
    """A numpy Generator owned by this seed spec."""
    entropy = spec.base_seed & ((1 << 64) - 1)
    ss = np.random.SeedSequence(entropy=entropy, spawn_key=(spec.stream_id,))
    return np.random.default_rng(ss)


def validate_dataset(d):
    """Raise unless d satisfies the Dataset invariants.

    Checks: 2-d x and 1-d y, matching row counts, n >= 1, p >= 1, and
    finiteness of every entry (the first offending coordinate is reported).
    """
    if d.x.ndim != 2:
        raise DimensionMismatch(f"x must be 2-d, got ndim={d.x.ndim}")
    if d.y.ndim != 1:
        raise DimensionMismatch(f"y must be 1-d, got ndim={d.y.ndim}")
    if d.x.shape[0] != d.y.shape[0]:
        raise DimensionMismatch(
            f"x has {d.x.shape[0]} rows but y has length {d.y.shape[0]}"
        )
    if d.n < 1 or d.p < 1:
        raise DimensionMismatch("need n >= 1 and p >= 1")
    if not np.all(np.isfinite(d.y)):
        row = int(np.flatnonzero(~np.isfinite(d.y))[0])
        raise NonFiniteValue("y", row)
    if not np.all(np.isfinite(d.x)):
        flat = int(np.flatnonzero(~np.isfinite(d.x.ravel()))[0])
        raise NonFiniteValue("x", flat // d.p, flat % d.p)


@dataclass(frozen=True)
class StandardizeRecord:
    """Centering/scale record sufficient to invert the transform on coefficients."""

    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: float

    def coef_to_original(self, beta_std):
        """Map standardized-scale coefficients back to the original covariate scale.

        Returns (beta_original, intercept) for the uncentered model
        y = intercept + x @ beta_original.
        """
        beta = np.asarray(beta_std, dtype=np.float64) / self.x_scale
        intercept = self.y_mean - float(self.x_mean @ beta)
        return beta, intercept


def standardize(d):
    """Center y and standardize every column of x to mean 0, sd 1.

    Sample standard deviation uses the n-denominator (population) convention;
    the convention is fixed because downstream interval widths depend on scale.
    Idempotent to floating-point accuracy.
    """
    mean = d.x.mean(axis=0)
    scale = d.x.std(axis=0)
    dead = np.flatnonzero(scale == 0.0)
    if dead.size:
        raise ZeroVarianceColumn(int(dead[0]))
    xs = (d.x - mean) / scale
    ys = d.y - d.y.mean()
    return Dataset(xs, ys), StandardizeRecord(mean, scale, float(d.y.mean()))
