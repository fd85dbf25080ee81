import subprocess
import sys

import numpy as np
import pytest

from recscore import _kernels_py

_kernels = pytest.importorskip("recscore._kernels")

from conftest import make_instance


def _solve_args(n, p, seed, family, tuning):
    x, y, _ = make_instance(n, p, seed=seed)
    rng = np.random.default_rng(seed + 1)
    weights = np.ones(p)
    beta0 = np.zeros(p)
    lam = 0.5 * np.sqrt(np.log(p) / n)
    step = 0.5
    return (np.ascontiguousarray(x), np.ascontiguousarray(y), family, tuning,
            lam, weights, beta0, step, 10.0, 1e-8, 2000)


@pytest.mark.parametrize("family,tuning", [(0, 4.685), (1, 1.345), (2, 1.345), (3, 1.0)])
def test_solver_parity(family, tuning):
    for seed in (1, 2, 3):
        args = _solve_args(80, 30, 400 + seed, family, tuning)
        bc, itc, gapc, trc, stc, bndc = _kernels.solve_penalized(*args)
        bp, itp, gapp, trp, stp, bndp = _kernels_py.solve_penalized(*args)
        assert itc == itp
        assert stc == stp
        assert bndc == bndp
        assert np.max(np.abs(np.asarray(bc) - np.asarray(bp))) < 1e-10
        assert abs(gapc - gapp) < 1e-10
        assert np.allclose(np.asarray(trc), np.asarray(trp), rtol=0, atol=1e-9)


def test_sirs_bitwise_parity_with_ties():
    rng = np.random.default_rng(410)
    for _ in range(5):
        n, p = int(rng.integers(10, 60)), int(rng.integers(2, 15))
        x = rng.standard_normal((n, p))
        y = rng.standard_normal(n)
        y[: n // 3] = y[0]  # tie block exercises the strict-inequality rule
        a = np.asarray(_kernels.sirs_statistic(x, y))
        b = np.asarray(_kernels_py.sirs_statistic(x, y))
        assert np.array_equal(a, b)


def _backend_in_subprocess(value):
    code = (
        "import os\n"
        f"os.environ['RECSCORE_BACKEND'] = {value!r}\n"
        "import recscore\n"
        "print(recscore.BACKEND)\n"
    )
    return subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)


def test_env_forces_python_backend():
    r = _backend_in_subprocess("python")
    assert r.returncode == 0
    assert r.stdout.strip() == "python"


def test_env_forces_cython_backend():
    r = _backend_in_subprocess("cython")
    assert r.returncode == 0
    assert r.stdout.strip() == "cython"


def test_env_rejects_unknown_backend():
    r = _backend_in_subprocess("fortran")
    assert r.returncode != 0
    assert "RECSCORE_BACKEND" in r.stderr
