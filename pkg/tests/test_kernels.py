"""Numpy/numba backend twins must agree on every kernel.

The numba path is loop-form arithmetic of the exact same expressions, so the
agreement tolerances here are near machine precision.  The subprocess tests
pin the DISPERSIA_BACKEND environment switch.
"""

import os
import subprocess
import sys

import numpy as np
import pytest

from dispersia._kernels import (
    HAVE_NUMBA,
    NUMPY_BACKEND,
    active_backend_name,
    select_backend,
)

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")

RNG = np.random.default_rng(2024)


def both_backends():
    return NUMPY_BACKEND, select_backend("numba")


CASES = [
    (2, np.array([1.0]), 2.0**-4),
    (3, np.array([1.0, -1.0]), 0.25),
    (4, np.array([1.0, 0.5]), 2.0**-6),
    (5, np.array([1.0, -2.0, 0.75]), 0.5),
]


def sample_axes(n=257):
    # include exact zeros and eta-zero collisions
    a = np.concatenate([RNG.uniform(-10, 10, n - 2), [0.0, 1.0]])
    b = np.concatenate([RNG.uniform(-10, 10, n - 2), [0.5, -2.0]])
    return np.ascontiguousarray(a), np.ascontiguousarray(b)


@needs_numba
@pytest.mark.parametrize("kappa,coeffs,eps", CASES)
def test_p_eval_equivalence(kappa, coeffs, eps):
    np_b, nb_b = both_backends()
    y = np.ascontiguousarray(RNG.uniform(-20, 20, 513))
    np.testing.assert_allclose(
        nb_b.p_eval(coeffs, kappa, y), np_b.p_eval(coeffs, kappa, y), rtol=1e-13
    )


@needs_numba
@pytest.mark.parametrize("r", [1, 2, 3, 4, 5, 6, 7])
def test_q_eval_equivalence(r):
    np_b, nb_b = both_backends()
    x = np.ascontiguousarray(RNG.uniform(0.0, 50.0, 401))
    y = np.ascontiguousarray(RNG.uniform(0.0, 50.0, 401))
    np.testing.assert_allclose(
        nb_b.q_eval(r, x, y), np_b.q_eval(r, x, y), rtol=1e-13, atol=1e-250
    )


@needs_numba
@pytest.mark.parametrize("kappa,coeffs,eps", CASES)
def test_phase_kernels_equivalence(kappa, coeffs, eps):
    np_b, nb_b = both_backends()
    a, b = sample_axes()
    alpha = 0.6 * kappa
    for name, args in (
        ("phase_direct", (coeffs, kappa, alpha, eps, a, b)),
        ("phase_scaled", (coeffs, kappa, eps, a, b)),
        ("phase_factored", (coeffs, kappa, alpha, eps, a, b)),
    ):
        got = getattr(nb_b, name)(*args)
        want = getattr(np_b, name)(*args)
        scale = np.abs(want).max()
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12 * scale), name


@needs_numba
@pytest.mark.parametrize("kappa,coeffs,eps", CASES)
def test_bound_scan_equivalence(kappa, coeffs, eps):
    np_b, nb_b = both_backends()
    axis = np.ascontiguousarray(np.linspace(-8.0, 8.0, 101))
    c0 = 4.0
    nb = nb_b.bound_scan(coeffs, kappa, eps, c0, axis, axis)
    npv = np_b.bound_scan(coeffs, kappa, eps, c0, axis, axis)
    assert nb[3] == npv[3]  # admissible counts are integers, exact
    assert nb[0] == pytest.approx(npv[0], rel=1e-12)


@needs_numba
def test_bound_scan_no_admissible_sentinel():
    np_b, nb_b = both_backends()
    coeffs = np.array([1.0])
    tiny = np.array([0.001])
    for backend in (np_b, nb_b):
        best, w1, w2, n = backend.bound_scan(coeffs, 2, 0.5, 1.0, tiny, np.array([0.0]))
        assert n == 0 and best == np.inf and np.isnan(w1) and np.isnan(w2)


@needs_numba
def test_update_kernels_equivalence():
    np_b, nb_b = both_backends()
    n = 512
    flow = np.exp(1j * RNG.uniform(-3, 3, n))
    mu_hat = RNG.standard_normal(n) + 1j * RNG.standard_normal(n)
    phi1_sym = RNG.standard_normal(n) + 1j * RNG.standard_normal(n)
    rhs_hat = RNG.standard_normal(n) + 1j * RNG.standard_normal(n)
    tau = 0.0125
    np.testing.assert_allclose(
        nb_b.ei_update(flow, mu_hat, phi1_sym, rhs_hat, tau),
        np_b.ei_update(flow, mu_hat, phi1_sym, rhs_hat, tau),
        rtol=1e-14,
        atol=1e-14,
    )
    flowed = mu_hat.copy()
    filtered = phi1_sym.copy()
    mu = rhs_hat.copy()
    np.testing.assert_allclose(
        nb_b.lri_update(flowed, filtered, mu, tau),
        np_b.lri_update(flowed, filtered, mu, tau),
        rtol=1e-14,
        atol=1e-14,
    )


# ---------------------------------------------------------------------------
# selection plumbing


def test_select_backend_names():
    assert NUMPY_BACKEND.name == "numpy"
    assert select_backend("numpy") is NUMPY_BACKEND
    assert select_backend(" NumPy ") is NUMPY_BACKEND
    with pytest.raises(ValueError):
        select_backend("fortran")


@needs_numba
def test_numba_backend_is_cached_singleton():
    assert select_backend("numba") is select_backend("numba")
    assert select_backend("auto").name == "numba"


def test_active_backend_name_is_valid():
    assert active_backend_name() in ("numpy", "numba")


def _backend_in_subprocess(value):
    env = dict(os.environ)
    if value is None:
        env.pop("DISPERSIA_BACKEND", None)
    else:
        env["DISPERSIA_BACKEND"] = value
    return subprocess.run(
        [sys.executable, "-c",
         "from dispersia._kernels import active_backend_name; print(active_backend_name())"],
        capture_output=True,
        text=True,
        env=env,
    )


def test_env_flag_forces_numpy_backend():
    proc = _backend_in_subprocess("numpy")
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip() == "numpy"


@needs_numba
def test_env_flag_auto_prefers_numba():
    proc = _backend_in_subprocess(None)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip() == "numba"


def test_env_flag_rejects_unknown_value():
    proc = _backend_in_subprocess("gpu")
    assert proc.returncode != 0
    assert "DISPERSIA_BACKEND" in proc.stderr
