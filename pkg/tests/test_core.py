import numpy as np
import pytest

from recscore.core import (
    Dataset,
    SeedSpec,
    SolverConfig,
    SupportSet,
    derive_seed,
    rng_from_spec,
    standardize,
    validate_dataset,
)
from recscore.errors import DimensionMismatch, NonFiniteValue, ZeroVarianceColumn


def test_dataset_coerces_to_c_contiguous_float64():
    d = Dataset([[1, 2], [3, 4], [5, 6]], [1, 2, 3])
    assert d.x.dtype == np.float64 and d.y.dtype == np.float64
    assert d.x.flags.c_contiguous
    assert (d.n, d.p) == (3, 2)


def test_dataset_fortran_input_copied():
    xf = np.asfortranarray(np.arange(12.0).reshape(4, 3))
    d = Dataset(xf, np.zeros(4))
    assert d.x.flags.c_contiguous


def test_validate_dataset_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        validate_dataset(Dataset(np.zeros((3, 2)), np.zeros(4)))


def test_validate_dataset_reports_first_nonfinite():
    x = np.zeros((3, 4))
    x[1, 2] = np.inf
    with pytest.raises(NonFiniteValue) as ei:
        validate_dataset(Dataset(x, np.zeros(3)))
    assert (ei.value.row, ei.value.col) == (1, 2)
    y = np.zeros(3)
    y[2] = np.nan
    with pytest.raises(NonFiniteValue) as ei:
        validate_dataset(Dataset(np.zeros((3, 4)), y))
    assert ei.value.row == 2


def test_support_set_sorted_unique():
    s = SupportSet((1, 4, 9))
    assert s.as_array().dtype == np.intp
    assert list(s.as_array()) == [1, 4, 9]
    with pytest.raises(ValueError):
        SupportSet((4, 1))
    with pytest.raises(ValueError):
        SupportSet((1, 1, 2))
    assert SupportSet(()).as_array().size == 0


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(lam=-0.1)
    with pytest.raises(ValueError):
        SolverConfig(lam=0.1, radius=0.0)
    with pytest.raises(ValueError):
        SolverConfig(lam=0.1, tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(lam=0.1, max_iter=0)
    cfg = SolverConfig(lam=0.2)
    assert cfg.step_size is None and cfg.radius == 10.0


def test_seed_streams_are_distinct_and_reproducible():
    base = SeedSpec(123)
    a1 = rng_from_spec(derive_seed(base, 0)).standard_normal(8)
    a2 = rng_from_spec(derive_seed(base, 0)).standard_normal(8)
    b = rng_from_spec(derive_seed(base, 1)).standard_normal(8)
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1, b)


def test_derive_seed_nested_substreams_differ():
    base = SeedSpec(9)
    rep = derive_seed(base, 3)
    x_stream = rng_from_spec(derive_seed(rep, 0)).standard_normal(4)
    e_stream = rng_from_spec(derive_seed(rep, 1)).standard_normal(4)
    assert not np.array_equal(x_stream, e_stream)


def test_derive_seed_rejects_huge_rep():
    with pytest.raises(ValueError):
        derive_seed(SeedSpec(1), 1 << 32)
    with pytest.raises(ValueError):
        derive_seed(SeedSpec(1), -1)


def test_standardize_moments_and_inverse():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((50, 4)) * np.array([0.5, 2.0, 7.0, 1.0]) + np.array(
        [1.0, -3.0, 0.0, 10.0]
    )
    y = rng.standard_normal(50) + 4.0
    ds, rec = standardize(Dataset(x, y))
    assert np.allclose(ds.x.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(ds.x.std(axis=0), 1.0, atol=1e-12)
    assert abs(ds.y.mean()) < 1e-12
    beta_std = rng.standard_normal(4)
    beta, intercept = rec.coef_to_original(beta_std)
    # same predictions on the original scale
    lhs = ds.x @ beta_std + rec.y_mean
    rhs = x @ beta + intercept
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_standardize_zero_variance_column():
    x = np.ones((10, 3))
    x[:, 0] = np.arange(10.0)
    with pytest.raises(ZeroVarianceColumn) as ei:
        standardize(Dataset(x, np.arange(10.0)))
    assert ei.value.col == 1
