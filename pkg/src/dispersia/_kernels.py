"""Hot numerical kernels with twin numba and numpy implementations.

The numba path JIT-compiles tight loops (dispersion-polynomial batches, the
oscillatory-phase pair, the lower-bound grid scan, and the fused per-step
pointwise updates).  The numpy path is a vectorized fallback with identical
signatures.  Selection happens once at import from the environment:

    DISPERSIA_BACKEND = auto | numba | numpy      (default: auto)

"auto" takes numba when it is importable and falls back to numpy otherwise;
"numba" insists and raises if the import fails.  Both backends are always
exposed for equivalence tests and benchmarks via `select_backend`.
"""

from __future__ import annotations

import math
import os
from typing import Callable, NamedTuple

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False


def _tilde_coeffs(coeffs: np.ndarray, kappa: int) -> np.ndarray:
    # d~_{k-2j} = d_{k-2j} / 2^(k-2j-1), same ordering as coeffs
    out = np.empty_like(coeffs)
    for j in range(coeffs.shape[0]):
        out[j] = coeffs[j] / 2.0 ** (kappa - 2 * j - 1)
    return out


# ---------------------------------------------------------------------------
# numpy implementations (vectorized)
# ---------------------------------------------------------------------------


def _np_p_eval(coeffs: np.ndarray, kappa: int, y: np.ndarray) -> np.ndarray:
    """P(y) as nested form in y^2 times the parity factor (y or y^2)."""
    y = np.asarray(y, dtype=np.float64)
    y2 = y * y
    acc = np.full_like(y2, coeffs[0])
    for c in coeffs[1:]:
        acc = acc * y2 + c
    return acc * (y if kappa % 2 else y2)


def _np_q_eval(r: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Two-variable binomial sum Q_r; only odd binomial columns enter."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if r % 2 == 0:
        p = r // 2
        acc = np.zeros(np.broadcast(x, y).shape)
        for j in range(p):
            acc += math.comb(r, 2 * j + 1) * x**j * y ** (p - 1 - j)
    else:
        p = (r - 1) // 2
        acc = np.zeros(np.broadcast(x, y).shape)
        for j in range(p + 1):
            acc += math.comb(r, 2 * j + 1) * x**j * y ** (p - j)
    return acc


def _np_phase_direct(
    coeffs: np.ndarray,
    kappa: int,
    alpha: float,
    eps: float,
    xi1: np.ndarray,
    xi2: np.ndarray,
) -> np.ndarray:
    """eps^alpha * (P(xi1/eps + xi2) - P(xi2)), the defining subtractive form."""
    xi1 = np.asarray(xi1, dtype=np.float64)
    xi2 = np.asarray(xi2, dtype=np.float64)
    return eps**alpha * (
        _np_p_eval(coeffs, kappa, xi1 / eps + xi2) - _np_p_eval(coeffs, kappa, xi2)
    )


def _np_phase_scaled(
    coeffs: np.ndarray,
    kappa: int,
    eps: float,
    xi1: np.ndarray,
    xi2: np.ndarray,
) -> np.ndarray:
    """eps^(kappa-alpha) * phase: the factored core, free of the eps^-j blowup.

    Equals sum_j eps^(2j) d~_{k-2j} Q_{k-2j}(xi1^2, eta^2) times xi1*eta for
    even kappa, xi1 for odd, with eta = xi1 + 2 eps xi2.
    """
    xi1 = np.asarray(xi1, dtype=np.float64)
    xi2 = np.asarray(xi2, dtype=np.float64)
    eta = xi1 + 2.0 * eps * xi2
    x = xi1 * xi1
    y = eta * eta
    tilde = _tilde_coeffs(coeffs, kappa)
    acc = np.zeros(np.broadcast(x, y).shape)
    for j in range(coeffs.shape[0]):
        r = kappa - 2 * j
        acc += eps ** (2 * j) * tilde[j] * _np_q_eval(r, x, y)
    return acc * (xi1 * eta if kappa % 2 == 0 else xi1)


def _np_phase_factored(
    coeffs: np.ndarray,
    kappa: int,
    alpha: float,
    eps: float,
    xi1: np.ndarray,
    xi2: np.ndarray,
) -> np.ndarray:
    return eps ** (alpha - kappa) * _np_phase_scaled(coeffs, kappa, eps, xi1, xi2)


def _np_bound_scan(
    coeffs: np.ndarray,
    kappa: int,
    eps: float,
    c0: float,
    xi1: np.ndarray,
    xi2: np.ndarray,
) -> tuple[float, float, float, int]:
    """Min of |scaled phase| / lower-bound envelope over the product grid.

    Admissible points have |xi1| >= c0*eps or |eta| >= c0*eps; points where
    the envelope vanishes identically carry no information and are skipped.
    Returns (min ratio, worst xi1, worst xi2, admissible count).
    """
    g1, g2 = np.meshgrid(
        np.asarray(xi1, dtype=np.float64),
        np.asarray(xi2, dtype=np.float64),
        indexing="ij",
    )
    eta = g1 + 2.0 * eps * g2
    sigma = 1 if kappa % 2 == 0 else 0
    num = np.abs(_np_phase_scaled(coeffs, kappa, eps, g1, g2))
    pw = kappa - 1 - sigma  # always even
    denom = np.abs(g1) * np.abs(eta) ** sigma * (g1**pw + eta**pw)
    admissible = (np.abs(g1) >= c0 * eps) | (np.abs(eta) >= c0 * eps)
    n_adm = int(np.count_nonzero(admissible))
    valid = admissible & (denom > 0.0)
    if not valid.any():
        return math.inf, math.nan, math.nan, n_adm
    ratio = np.where(valid, num / np.where(denom > 0.0, denom, 1.0), math.inf)
    flat = int(np.argmin(ratio))
    i, j = np.unravel_index(flat, ratio.shape)
    return float(ratio[i, j]), float(g1[i, j]), float(g2[i, j]), n_adm


def _np_ei_update(
    flow: np.ndarray,
    mu_hat: np.ndarray,
    phi1_sym: np.ndarray,
    rhs_hat: np.ndarray,
    tau: float,
) -> np.ndarray:
    return flow * mu_hat + tau * (phi1_sym * rhs_hat)


def _np_lri_update(
    flowed: np.ndarray,
    filtered_pot: np.ndarray,
    mu: np.ndarray,
    tau: float,
) -> np.ndarray:
    return flowed + tau * (filtered_pot * mu)


# ---------------------------------------------------------------------------
# numba implementations (loop form of the same arithmetic)
# ---------------------------------------------------------------------------


def _build_numba_backend():
    njit = numba.njit

    @njit(cache=True)
    def _comb_f(n, k):
        c = 1.0
        for i in range(k):
            c = c * (n - i) / (i + 1)
        return c

    @njit(cache=True)
    def _p_scalar(coeffs, kappa, y):
        y2 = y * y
        acc = coeffs[0]
        for i in range(1, coeffs.shape[0]):
            acc = acc * y2 + coeffs[i]
        if kappa % 2:
            return acc * y
        return acc * y2

    @njit(cache=True)
    def p_eval(coeffs, kappa, y):
        out = np.empty(y.shape[0])
        for i in range(y.shape[0]):
            out[i] = _p_scalar(coeffs, kappa, y[i])
        return out

    @njit(cache=True)
    def _q_scalar(r, x, y):
        acc = 0.0
        if r % 2 == 0:
            p = r // 2
            for j in range(p):
                acc += _comb_f(r, 2 * j + 1) * x**j * y ** (p - 1 - j)
        else:
            p = (r - 1) // 2
            for j in range(p + 1):
                acc += _comb_f(r, 2 * j + 1) * x**j * y ** (p - j)
        return acc

    @njit(cache=True)
    def q_eval(r, x, y):
        out = np.empty(x.shape[0])
        for i in range(x.shape[0]):
            out[i] = _q_scalar(r, x[i], y[i])
        return out

    @njit(cache=True)
    def phase_direct(coeffs, kappa, alpha, eps, xi1, xi2):
        s = eps**alpha
        out = np.empty(xi1.shape[0])
        for i in range(xi1.shape[0]):
            out[i] = s * (
                _p_scalar(coeffs, kappa, xi1[i] / eps + xi2[i])
                - _p_scalar(coeffs, kappa, xi2[i])
            )
        return out

    @njit(cache=True)
    def _phase_scaled_scalar(coeffs, kappa, eps, a, b):
        eta = a + 2.0 * eps * b
        x = a * a
        y = eta * eta
        acc = 0.0
        for j in range(coeffs.shape[0]):
            r = kappa - 2 * j
            tilde = coeffs[j] / 2.0 ** (r - 1)
            acc += eps ** (2 * j) * tilde * _q_scalar(r, x, y)
        if kappa % 2 == 0:
            return acc * a * eta
        return acc * a

    @njit(cache=True)
    def phase_scaled(coeffs, kappa, eps, xi1, xi2):
        out = np.empty(xi1.shape[0])
        for i in range(xi1.shape[0]):
            out[i] = _phase_scaled_scalar(coeffs, kappa, eps, xi1[i], xi2[i])
        return out

    @njit(cache=True)
    def phase_factored(coeffs, kappa, alpha, eps, xi1, xi2):
        s = eps ** (alpha - kappa)
        out = np.empty(xi1.shape[0])
        for i in range(xi1.shape[0]):
            out[i] = s * _phase_scaled_scalar(coeffs, kappa, eps, xi1[i], xi2[i])
        return out

    @njit(cache=True)
    def bound_scan(coeffs, kappa, eps, c0, xi1, xi2):
        sigma = 1 if kappa % 2 == 0 else 0
        pw = kappa - 1 - sigma
        thresh = c0 * eps
        best = math.inf
        w1 = math.nan
        w2 = math.nan
        n_adm = 0
        for i in range(xi1.shape[0]):
            a = xi1[i]
            for j in range(xi2.shape[0]):
                b = xi2[j]
                eta = a + 2.0 * eps * b
                if abs(a) < thresh and abs(eta) < thresh:
                    continue
                n_adm += 1
                denom = abs(a) * abs(eta) ** sigma * (a**pw + eta**pw)
                if denom <= 0.0:
                    continue
                ratio = abs(_phase_scaled_scalar(coeffs, kappa, eps, a, b)) / denom
                if ratio < best:
                    best = ratio
                    w1 = a
                    w2 = b
        return best, w1, w2, n_adm

    @njit(cache=True)
    def ei_update(flow, mu_hat, phi1_sym, rhs_hat, tau):
        out = np.empty_like(mu_hat)
        for i in range(mu_hat.shape[0]):
            out[i] = flow[i] * mu_hat[i] + tau * (phi1_sym[i] * rhs_hat[i])
        return out

    @njit(cache=True)
    def lri_update(flowed, filtered_pot, mu, tau):
        out = np.empty_like(mu)
        for i in range(mu.shape[0]):
            out[i] = flowed[i] + tau * (filtered_pot[i] * mu[i])
        return out

    return Backend(
        name="numba",
        p_eval=p_eval,
        q_eval=q_eval,
        phase_direct=phase_direct,
        phase_scaled=phase_scaled,
        phase_factored=phase_factored,
        bound_scan=bound_scan,
        ei_update=ei_update,
        lri_update=lri_update,
    )


class Backend(NamedTuple):
    name: str
    p_eval: Callable
    q_eval: Callable
    phase_direct: Callable
    phase_scaled: Callable
    phase_factored: Callable
    bound_scan: Callable
    ei_update: Callable
    lri_update: Callable


NUMPY_BACKEND = Backend(
    name="numpy",
    p_eval=_np_p_eval,
    q_eval=_np_q_eval,
    phase_direct=_np_phase_direct,
    phase_scaled=_np_phase_scaled,
    phase_factored=_np_phase_factored,
    bound_scan=_np_bound_scan,
    ei_update=_np_ei_update,
    lri_update=_np_lri_update,
)

_NUMBA_BACKEND: Backend | None = None


def numba_backend() -> Backend:
    """Build (once) and return the JIT backend; raises without numba."""
    global _NUMBA_BACKEND
    if not HAVE_NUMBA:
        raise ImportError("numba is not installed; only the numpy backend is available")
    if _NUMBA_BACKEND is None:
        _NUMBA_BACKEND = _build_numba_backend()
    return _NUMBA_BACKEND


def select_backend(name: str) -> Backend:
    name = name.strip().lower()
    if name == "numpy":
        return NUMPY_BACKEND
    if name == "numba":
        return numba_backend()
    if name == "auto":
        return numba_backend() if HAVE_NUMBA else NUMPY_BACKEND
    raise ValueError(
        f"DISPERSIA_BACKEND must be 'auto', 'numba' or 'numpy', got {name!r}"
    )


ACTIVE: Backend = select_backend(os.environ.get("DISPERSIA_BACKEND", "auto"))


def active_backend_name() -> str:
    return ACTIVE.name
