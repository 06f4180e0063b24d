"""Periodic-box discretization and pseudo-spectral operators.

Conventions fixed once for the whole package:

* the box is ``[-L, L)^n`` with ``N`` nodes per axis, ``x_j = -L + j * (2L/N)``;
* wavenumbers are ``xi_k = (pi/L) * k`` with integer ``k in [-N/2, N/2 - 1]``
  in FFT order;
* the forward transform sums without scaling and the inverse divides by
  ``N^n`` (numpy's default);
* norms carry explicit quadrature weights ``(2L)^n / N^(2n)`` so that values
  are consistent with the continuum integrals on the box.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "GridSpec",
    "ScalarField",
    "SpectralField",
    "VectorField",
    "axis_coords",
    "axis_wavenumbers",
    "squared_wavenumbers",
    "dealias_mask",
    "to_spectral",
    "to_physical",
    "gradient",
    "laplacian",
    "heat_propagate",
    "sobolev_norm",
    "dealias",
    "check_smoothing_estimate",
    "check_algebra",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[-L, L)^n``."""

    n: int
    N: int
    L: float

    def __post_init__(self) -> None:
        if self.n not in (1, 2, 3):
            raise ValueError(f"dimension n must be 1, 2 or 3, got {self.n}")
        if self.N % 2 != 0 or self.N < 8:
            raise ValueError(f"points per axis N must be even and >= 8, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"half length L must be positive, got {self.L}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def spacing(self) -> float:
        """Node spacing ``2L / N`` (identical on every axis)."""
        return 2.0 * self.L / self.N

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.n


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def axis_coords(grid: GridSpec) -> np.ndarray:
    """Physical nodes of one axis, ``x_j = -L + j * spacing``.

    Evaluated as ``(j - N/2) * spacing`` so the center node is exactly 0,
    which the singular quadrature relies on.
    """
    return _readonly((np.arange(grid.N) - grid.N // 2) * grid.spacing)


@lru_cache(maxsize=None)
def axis_wavenumbers(grid: GridSpec) -> np.ndarray:
    """Wavenumbers ``pi*k/L`` of one axis in FFT order."""
    return _readonly(2.0 * np.pi * np.fft.fftfreq(grid.N, d=grid.spacing))


def _axis_view(grid: GridSpec, axis: int, values: np.ndarray) -> np.ndarray:
    """Reshape a per-axis 1-D array so it broadcasts along ``axis``."""
    shape = [1] * grid.n
    shape[axis] = grid.N
    return values.reshape(shape)


@lru_cache(maxsize=None)
def squared_wavenumbers(grid: GridSpec) -> np.ndarray:
    """Full-grid array of ``|xi|^2``."""
    xi = axis_wavenumbers(grid)
    out = np.zeros(grid.shape)
    for axis in range(grid.n):
        out = out + _axis_view(grid, axis, xi) ** 2
    return _readonly(out)


@lru_cache(maxsize=None)
def dealias_mask(grid: GridSpec) -> np.ndarray:
    """Boolean mask keeping modes with every ``|k_i| <= N/3`` (2/3 rule)."""
    k = np.fft.fftfreq(grid.N) * grid.N
    keep1d = np.abs(k) <= grid.N / 3.0
    mask = np.ones(grid.shape, dtype=bool)
    for axis in range(grid.n):
        mask = mask & _axis_view(grid, axis, keep1d)
    return _readonly(mask)


@lru_cache(maxsize=None)
def _origin_phase(grid: GridSpec) -> np.ndarray:
    """Per-mode factor ``prod_i (-1)^(k_i)`` translating FFT coefficients
    (indexed from the array start at x = -L) to coefficients relative to the
    physical coordinates.  Real and self-inverse."""
    k = np.rint(np.fft.fftfreq(grid.N) * grid.N).astype(int)
    sign1d = np.where(k % 2 == 0, 1.0, -1.0)
    phase = np.ones(grid.shape)
    for axis in range(grid.n):
        phase = phase * _axis_view(grid, axis, sign1d)
    return _readonly(phase)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real samples at the grid nodes, row-major axis order.

    The constructor takes ownership of the array and marks it read-only;
    all operations in this package treat fields as immutable values.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", _readonly(v))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex Fourier coefficients indexed by wavenumber tuple (FFT order)."""

    grid: GridSpec
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients, dtype=complex)
        if c.shape != self.grid.shape:
            raise ValueError(f"coefficients shape {c.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "coefficients", _readonly(c))


@dataclass(frozen=True, eq=False)
class VectorField:
    """n scalar components on one shared grid."""

    components: tuple[ScalarField, ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise ValueError("vector field needs at least one component")
        grid = self.components[0].grid
        if len(self.components) != grid.n:
            raise ValueError(f"expected {grid.n} components, got {len(self.components)}")
        for c in self.components:
            if c.grid != grid:
                raise ValueError("vector field components must share one grid")

    @property
    def grid(self) -> GridSpec:
        return self.components[0].grid


def to_spectral(f: ScalarField) -> SpectralField:
    """Forward transform: ``sum_j f(x_j) exp(-i xi_k . x_j)``, no scaling.

    Coefficients are relative to the physical coordinates, so a constant c
    maps to ``c N^n`` at the zero mode and ``cos(pi x / L)`` to ``N/2`` at
    ``k = +-1``.
    """
    return SpectralField(f.grid, _origin_phase(f.grid) * np.fft.fftn(f.values))


def to_physical(F: SpectralField) -> ScalarField:
    """Inverse transform (divides by ``N^n``); returns the real part."""
    return ScalarField(F.grid, np.fft.ifftn(_origin_phase(F.grid) * F.coefficients).real)


def gradient(u: ScalarField) -> VectorField:
    """Spectral gradient; exact for band-limited fields."""
    grid = u.grid
    uh = np.fft.fftn(u.values)
    xi = axis_wavenumbers(grid)
    comps = []
    for axis in range(grid.n):
        mult = 1j * _axis_view(grid, axis, xi)
        comps.append(ScalarField(grid, np.fft.ifftn(mult * uh).real))
    return VectorField(tuple(comps))


def laplacian(u: ScalarField) -> ScalarField:
    """Fourier multiplier ``-|xi|^2``."""
    uh = np.fft.fftn(u.values)
    return ScalarField(u.grid, np.fft.ifftn(-squared_wavenumbers(u.grid) * uh).real)


def heat_propagate(u: ScalarField, t: float) -> ScalarField:
    """Heat semigroup: multiplier ``exp(-|xi|^2 t)``; identity at ``t = 0``."""
    if t < 0:
        raise ValueError(f"propagation time must be >= 0, got {t}")
    if t == 0.0:
        return u
    uh = np.fft.fftn(u.values)
    return ScalarField(u.grid, np.fft.ifftn(np.exp(-squared_wavenumbers(u.grid) * t) * uh).real)


def sobolev_hs_weights(grid: GridSpec, s: float) -> np.ndarray:
    """Spectral weights ``(1 + |xi|^2)^s`` for the H^s norm."""
    return (1.0 + squared_wavenumbers(grid)) ** s


def sobolev_norm_spectral(coefficients: np.ndarray, grid: GridSpec, s: float) -> float:
    """H^s norm evaluated directly on FFT coefficients."""
    w = sobolev_hs_weights(grid, s)
    scale = (2.0 * grid.L) ** grid.n / grid.N ** (2 * grid.n)
    return float(np.sqrt(np.sum(w * np.abs(coefficients) ** 2) * scale))


def sobolev_norm(u: ScalarField, s: float) -> float:
    """Parseval-consistent H^s norm on the box.

    ``sqrt(sum (1+|xi|^2)^s |u_hat|^2 (2L)^n / N^(2n))``; for ``s = 0`` this
    agrees with direct quadrature of ``integral |u|^2``.
    """
    if s < 0:
        raise ValueError(f"regularity s must be >= 0, got {s}")
    return sobolev_norm_spectral(np.fft.fftn(u.values), u.grid, s)


def dealias(F: SpectralField) -> SpectralField:
    """Zero every coefficient with any ``|k_i| > N/3``; idempotent."""
    out = F.coefficients * dealias_mask(F.grid)
    return SpectralField(F.grid, out)


def check_smoothing_estimate(phi: ScalarField, t: float, s1: float, s2: float) -> float:
    """Ratio ``||h_t phi||_{H^{s1+s2}} / ((1 + t^-s2) ||phi||_{H^s1})``.

    The property harness asserts that the supremum of this ratio over a
    randomized field family stays bounded; with ``s2 = 0`` the semigroup is
    an H^s1 contraction and the ratio never exceeds 1/2.
    """
    if t <= 0:
        raise ValueError(f"smoothing check needs t > 0, got {t}")
    if s1 < 0 or s2 < 0:
        raise ValueError("regularities s1, s2 must be >= 0")
    denom_norm = sobolev_norm(phi, s1)
    if denom_norm == 0.0:
        raise ValueError("smoothing check rejects the zero field")
    smoothed = heat_propagate(phi, t)
    return sobolev_norm(smoothed, s1 + s2) / ((1.0 + t ** (-s2)) * denom_norm)


def check_algebra(f: ScalarField, g: ScalarField, s: float) -> float:
    """Product-norm ratio ``||f g||_{H^s} / (||f||_{H^s} ||g||_{H^s})``.

    The pointwise product is dealiased before the norm is taken.  Requires
    ``s > n/2`` (the algebra range).
    """
    if f.grid != g.grid:
        raise ValueError("algebra check needs fields on the same grid")
    if not s > f.grid.n / 2.0:
        raise ValueError(f"algebra check needs s > n/2 = {f.grid.n / 2.0}, got {s}")
    nf = sobolev_norm(f, s)
    ng = sobolev_norm(g, s)
    if nf == 0.0 or ng == 0.0:
        raise ValueError("algebra check rejects zero fields")
    prod_hat = np.fft.fftn(f.values * g.values) * dealias_mask(f.grid)
    return sobolev_norm_spectral(prod_hat, f.grid, s) / (nf * ng)
