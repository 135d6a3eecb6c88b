"""Periodic grid, transform conventions, symbols, and norms.

The transform pair approximates the line integrals

    coeff(xi_k) = h * sum_j value(x_j) exp(-i xi_k x_j)
    value(x_j)  = (dxi / 2 pi) * sum_k coeff(xi_k) exp(i xi_k x_j)

on x_j = -L + j h, xi_k = pi k / L, so coefficients track the continuum
transform (a unit Gaussian maps to sqrt(2 pi) exp(-xi^2 / 2)).  Frequencies
are stored in standard transform layout; address them by value via grid.xi.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._kernels import ACTIVE as _K
from .model import DispersiveModel


class MeshResolutionWarning(UserWarning):
    """Grid spacing is coarser than the oscillation scale."""


class MeshResolutionError(ValueError):
    """Grid spacing is far too coarse for the oscillation scale."""


class Grid:
    """Uniform periodic grid on [-L, L) with a power-of-two point count."""

    __slots__ = ("half_width", "n", "h", "nodes", "xi", "dxi", "_alt")

    def __init__(self, half_width: float, n: int):
        if not half_width > 0:
            raise ValueError(f"half_width must be positive, got {half_width!r}")
        if not isinstance(n, int) or n < 8 or n & (n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {n!r}")
        self.half_width = float(half_width)
        self.n = n
        self.h = 2.0 * self.half_width / n
        self.nodes = -self.half_width + self.h * np.arange(n)
        self.xi = 2.0 * np.pi * np.fft.fftfreq(n, d=self.h)
        self.dxi = np.pi / self.half_width
        # (-1)^k in transform layout compensates the -L grid origin
        self._alt = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)

    def __eq__(self, other):
        return (
            isinstance(other, Grid)
            and other.half_width == self.half_width
            and other.n == self.n
        )

    def __hash__(self):
        return hash((self.half_width, self.n))

    def __repr__(self):
        return f"Grid(half_width={self.half_width}, n={self.n})"


class SpectralField:
    """Complex field on a grid, carrying values and cached coefficients."""

    __slots__ = ("grid", "_values", "_coeffs")

    def __init__(self, grid: Grid, values=None, coeffs=None):
        if (values is None) == (coeffs is None):
            raise ValueError("provide exactly one of values or coeffs")
        self.grid = grid
        for name, arr in (("values", values), ("coeffs", coeffs)):
            if arr is not None and np.asarray(arr).shape != (grid.n,):
                raise ValueError(
                    f"{name} must have shape ({grid.n},), got {np.asarray(arr).shape}"
                )
        self._values = (
            None if values is None else np.ascontiguousarray(values, dtype=np.complex128)
        )
        self._coeffs = (
            None if coeffs is None else np.ascontiguousarray(coeffs, dtype=np.complex128)
        )

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            g = self.grid
            self._values = np.fft.ifft(self._coeffs * g._alt) / g.h
        return self._values

    @property
    def coefficients(self) -> np.ndarray:
        if self._coeffs is None:
            g = self.grid
            self._coeffs = g.h * g._alt * np.fft.fft(self._values)
        return self._coeffs

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        if self.grid != other.grid:
            raise ValueError("grids differ")
        return SpectralField(self.grid, values=self.values - other.values)


def to_frequency(f: SpectralField) -> np.ndarray:
    return f.coefficients


def to_physical(grid: Grid, coeffs: np.ndarray) -> SpectralField:
    return SpectralField(grid, coeffs=coeffs)


def x_norm(f: SpectralField, j: int = 0) -> float:
    """Absolute-coefficient norm with a |xi|^j weight (trapezoid-free sum)."""
    if not isinstance(j, int) or j < 0:
        raise ValueError(f"j must be a non-negative integer, got {j!r}")
    w = np.abs(f.coefficients)
    if j:
        w = w * np.abs(f.grid.xi) ** j
    return float(w.sum() * f.grid.dxi)


def phi1(z):
    """phi1(z) = (e^z - 1)/z, with a 4-term Taylor branch for |z| < 1e-4.

    The direct quotient loses about |log10(eps/|z|)| digits to cancellation
    near 0; at the branch point the Taylor truncation error is below 1e-17
    relative, so the switch is seamless.
    """
    za = np.asarray(z, dtype=np.complex128)
    scalar = za.ndim == 0
    za = np.atleast_1d(za)
    small = np.abs(za) < 1e-4
    out = np.empty_like(za)
    zs = za[small]
    out[small] = 1.0 + zs * (0.5 + zs * (1.0 / 6.0 + zs / 24.0))
    zb = za[~small]
    out[~small] = (np.exp(zb) - 1.0) / zb
    return complex(out[0]) if scalar else out


def free_propagator_symbol(model: DispersiveModel, grid: Grid, z: float) -> np.ndarray:
    """Multiplier exp(-i z eps^alpha P(xi)) advancing the free flow by z."""
    p = _K.p_eval(model.coeff_array, model.kappa, grid.xi)
    return np.exp(-1j * z * model.epsilon**model.alpha * np.asarray(p))


def apply_multiplier(f: SpectralField, symbol: np.ndarray) -> SpectralField:
    if np.asarray(symbol).shape != (f.grid.n,):
        raise ValueError("symbol shape must match the grid")
    return SpectralField(f.grid, coeffs=symbol * f.coefficients)


def twist(f: SpectralField, model: DispersiveModel, z: float) -> SpectralField:
    """Undo the free flow at time z (pass to the twisted variable)."""
    return apply_multiplier(f, np.conj(free_propagator_symbol(model, f.grid, z)))


@dataclass(frozen=True)
class PotentialSpec:
    """Potential profile R; the solver samples R(x/eps) on the grid.

    kinds: 'gaussian'  -> amplitude * exp(-x^2 / width_sq)
           'exp_abs'   -> amplitude * exp(-|x|)
           'tabulated' -> samples of the already-scaled R(x_j/eps)
    """

    kind: str
    amplitude: float = -1.0
    width_sq: float = 1.0
    samples: tuple[float, ...] | None = None

    @classmethod
    def gaussian(cls, amplitude: float, width_sq: float) -> "PotentialSpec":
        if width_sq <= 0:
            raise ValueError(f"width_sq must be positive, got {width_sq!r}")
        return cls(kind="gaussian", amplitude=float(amplitude), width_sq=float(width_sq))

    @classmethod
    def exp_abs(cls, amplitude: float) -> "PotentialSpec":
        return cls(kind="exp_abs", amplitude=float(amplitude))

    @classmethod
    def tabulated(cls, samples) -> "PotentialSpec":
        arr = np.asarray(list(samples), dtype=np.complex128)
        scale = float(np.max(np.abs(arr.real))) if arr.size else 0.0
        if arr.size and float(np.max(np.abs(arr.imag))) > 1e-8 * (1.0 + scale):
            raise ValueError(
                "tabulated potential has a non-negligible imaginary part; "
                "only tiny imaginary noise is zeroed at ingestion"
            )
        return cls(kind="tabulated", samples=tuple(float(v) for v in arr.real))


@dataclass(frozen=True)
class InitialDataSpec:
    """Initial state mu0; complex-valued kinds are allowed.

    kinds: 'gaussian'   -> exp(-x^2 / 2)
           'plane_wave' -> exp(i xi0 x)
           'tabulated'  -> complex samples on the grid nodes
    """

    kind: str
    xi0: float = 0.0
    samples: tuple[complex, ...] | None = None

    @classmethod
    def gaussian(cls) -> "InitialDataSpec":
        return cls(kind="gaussian")

    @classmethod
    def plane_wave(cls, xi0: float) -> "InitialDataSpec":
        return cls(kind="plane_wave", xi0=float(xi0))

    @classmethod
    def tabulated(cls, samples) -> "InitialDataSpec":
        return cls(kind="tabulated", samples=tuple(complex(s) for s in samples))


def check_mesh(grid: Grid, epsilon: float) -> None:
    """Warn when h > eps, refuse when h > 4 eps: the potential oscillates on
    scale eps and an unresolved sampling aliases it silently."""
    if grid.h > 4.0 * epsilon:
        raise MeshResolutionError(
            f"grid spacing h={grid.h:.3g} exceeds 4*epsilon={4 * epsilon:.3g}; "
            "refusing an aliased potential"
        )
    if grid.h > epsilon:
        warnings.warn(
            f"grid spacing h={grid.h:.3g} exceeds epsilon={epsilon:.3g}; "
            "the potential is marginally resolved",
            MeshResolutionWarning,
            stacklevel=2,
        )


def sample_potential(spec: PotentialSpec, grid: Grid, epsilon: float) -> np.ndarray:
    """Real samples of R(x_j / eps) under the mesh-resolution rule."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon!r}")
    check_mesh(grid, epsilon)
    y = grid.nodes / epsilon
    if spec.kind == "gaussian":
        return spec.amplitude * np.exp(-(y * y) / spec.width_sq)
    if spec.kind == "exp_abs":
        return spec.amplitude * np.exp(-np.abs(y))
    if spec.kind == "tabulated":
        if spec.samples is None or len(spec.samples) != grid.n:
            raise ValueError(
                f"tabulated potential needs exactly {grid.n} samples, "
                f"got {0 if spec.samples is None else len(spec.samples)}"
            )
        return np.asarray(spec.samples, dtype=np.float64)
    raise ValueError(f"unknown potential kind {spec.kind!r}")


def sample_initial(spec: InitialDataSpec, grid: Grid) -> np.ndarray:
    x = grid.nodes
    if spec.kind == "gaussian":
        return np.exp(-(x * x) / 2.0).astype(np.complex128)
    if spec.kind == "plane_wave":
        return np.exp(1j * spec.xi0 * x)
    if spec.kind == "tabulated":
        if spec.samples is None or len(spec.samples) != grid.n:
            raise ValueError(
                f"tabulated initial data needs exactly {grid.n} samples, "
                f"got {0 if spec.samples is None else len(spec.samples)}"
            )
        return np.asarray(spec.samples, dtype=np.complex128)
    raise ValueError(f"unknown initial data kind {spec.kind!r}")


def gaussian_coeff_exact(xi) -> np.ndarray:
    """Continuum transform of exp(-x^2/2): sqrt(2 pi) exp(-xi^2/2)."""
    xi = np.asarray(xi, dtype=np.float64)
    return math.sqrt(2.0 * math.pi) * np.exp(-(xi * xi) / 2.0)
