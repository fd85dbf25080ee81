import math

import numpy as np
import pytest

from recscore.losses import (
    DEFAULT_TUNING,
    LossSpec,
    assumption_audit,
    loss_d1,
    loss_d2,
    loss_d3,
    loss_value,
)

from reference import fd_central

SPECS = [
    LossSpec("tukey"),
    LossSpec("pseudo_huber"),
    LossSpec("huber"),
    LossSpec("squared"),
]


def test_default_tuning_constants():
    assert LossSpec("tukey").tuning == 4.685
    assert LossSpec("pseudo_huber").tuning == 1.345
    assert LossSpec("huber").tuning == 1.345
    assert DEFAULT_TUNING["squared"] == 1.0


def test_spec_validation():
    with pytest.raises(ValueError):
        LossSpec("cauchy")
    with pytest.raises(ValueError):
        LossSpec("tukey", tuning=0.0)
    assert LossSpec("tukey", tuning=2.5).tuning == 2.5


def test_squared_exact():
    spec = LossSpec("squared")
    t = np.array([-3.0, -0.5, 0.0, 2.0])
    assert np.array_equal(loss_value(spec, t), 0.5 * t * t)
    assert np.array_equal(loss_d1(spec, t), t)
    assert np.array_equal(loss_d2(spec, t), np.ones(4))
    assert np.array_equal(loss_d3(spec, t), np.zeros(4))


def test_tukey_frozen_values():
    # fixed oracle values from direct evaluation of the closed form at t0=4.685
    spec = LossSpec("tukey")
    assert abs(float(loss_value(spec, 1.0)) - 0.4775662) < 1e-6
    assert abs(float(loss_d1(spec, 1.0)) - 0.9109558) < 1e-6
    # saturation at t0^2/6 for |t| >= t0
    assert abs(float(loss_value(spec, 4.685)) - 3.6582042) < 1e-6
    assert float(loss_value(spec, 100.0)) == float(loss_value(spec, 4.685))


def test_tukey_redescends_to_zero():
    spec = LossSpec("tukey")
    t = np.array([4.686, 5.0, -80.0])
    assert np.array_equal(loss_d1(spec, t), np.zeros(3))
    assert np.array_equal(loss_d2(spec, t), np.zeros(3))
    assert np.array_equal(loss_d3(spec, t), np.zeros(3))


def test_tukey_closed_form_random_points():
    spec = LossSpec("tukey")
    c = spec.tuning
    rng = np.random.default_rng(11)
    t = rng.uniform(-c, c, size=200)
    u = (t / c) ** 2
    assert np.allclose(loss_value(spec, t), c * c / 6.0 * (1 - (1 - u) ** 3), atol=1e-14)
    assert np.allclose(loss_d1(spec, t), t * (1 - u) ** 2, atol=1e-14)
    assert np.allclose(loss_d2(spec, t), (1 - u) * (1 - 5 * u), atol=1e-14)
    assert np.allclose(loss_d3(spec, t), -(4 * t / c**2) * (3 - 5 * u), atol=1e-14)


def test_pseudo_huber_closed_form_random_points():
    spec = LossSpec("pseudo_huber")
    c = spec.tuning
    rng = np.random.default_rng(12)
    t = rng.uniform(-8, 8, size=200)
    w = 1.0 + (t / c) ** 2
    assert np.allclose(loss_value(spec, t), c * c * (np.sqrt(w) - 1), atol=1e-14)
    assert np.allclose(loss_d1(spec, t), t / np.sqrt(w), atol=1e-14)
    assert np.allclose(loss_d2(spec, t), w**-1.5, atol=1e-14)
    assert np.allclose(loss_d3(spec, t), -(3 * t / c**2) * w**-2.5, atol=1e-14)


def test_huber_piecewise_exact():
    spec = LossSpec("huber")
    c = spec.tuning
    inside = np.array([-c / 2, 0.0, c / 3])
    outside = np.array([-2 * c, 3 * c])
    assert np.array_equal(loss_value(spec, inside), 0.5 * inside**2)
    assert np.array_equal(loss_value(spec, outside), c * np.abs(outside) - 0.5 * c * c)
    assert np.array_equal(loss_d1(spec, outside), c * np.sign(outside))
    assert np.array_equal(loss_d2(spec, inside), np.ones(3))
    assert np.array_equal(loss_d2(spec, outside), np.zeros(2))
    assert np.array_equal(loss_d3(spec, np.array([-1.0, 0.5, 9.0])), np.zeros(3))


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family)
def test_derivatives_match_finite_differences(spec):
    c = spec.tuning
    rng = np.random.default_rng(hash(spec.family) % 2**32)
    t = rng.uniform(-3 * c, 3 * c, size=600)
    t = t[np.abs(np.abs(t) - c) > 1e-3][:200]  # avoid kink neighborhoods
    for tt in t:
        h = 1e-5 * (1.0 + abs(tt))
        fd1 = fd_central(lambda z: float(loss_value(spec, z)), tt, h)
        fd2 = fd_central(lambda z: float(loss_d1(spec, z)), tt, h)
        fd3 = fd_central(lambda z: float(loss_d2(spec, z)), tt, h)
        assert abs(fd1 - float(loss_d1(spec, tt))) / (1 + abs(fd1)) < 1e-6
        assert abs(fd2 - float(loss_d2(spec, tt))) / (1 + abs(fd2)) < 1e-6
        assert abs(fd3 - float(loss_d3(spec, tt))) / (1 + abs(fd3)) < 1e-6


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family)
def test_symmetry(spec):
    t = np.linspace(0.01, 3 * spec.tuning, 101)
    assert np.allclose(loss_value(spec, t), loss_value(spec, -t), atol=1e-14)
    assert np.allclose(loss_d1(spec, t), -loss_d1(spec, -t), atol=1e-14)
    assert np.allclose(loss_d2(spec, t), loss_d2(spec, -t), atol=1e-14)


def test_scalar_and_array_agree():
    # scalar np.float64 ** 3 uses pow(), arrays use the multiply fast path,
    # so agreement is to rounding, not bitwise
    spec = LossSpec("tukey")
    t = np.array([0.3, -2.0, 9.0])
    vec = loss_value(spec, t)
    for k, tt in enumerate(t):
        assert abs(float(loss_value(spec, float(tt))) - vec[k]) < 1e-14


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family)
def test_assumption_audit_clean_on_families(spec):
    grid = np.linspace(-3 * spec.tuning, 3 * spec.tuning, 2001)
    rep = assumption_audit(spec, grid)
    assert rep.odd_symmetry_violation < 1e-12
    assert rep.nonneg_d1_on_pos_violation == 0.0
    assert np.isfinite(rep.grid_max_abs_d1_times_t)
    assert rep.grid_max_abs_d2 <= 1.0 + 1e-12


def test_assumption_audit_rejects_bad_grid():
    spec = LossSpec("huber")
    with pytest.raises(ValueError):
        assumption_audit(spec, np.array([]))
    with pytest.raises(ValueError):
        assumption_audit(spec, np.array([1.0, np.nan]))
