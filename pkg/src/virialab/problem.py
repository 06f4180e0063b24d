"""Admissible coefficients, singular weights, initial data, and the blow-up
precondition report.

The builtin coefficient family per axis is ``b_i(x) = a x^2 exp(-x^2/w^2)``:
nonnegative, vanishing at the origin, non-constant and rapidly decaying,
so the product ``b(x) = prod_i b_i(x_i)`` meets every admissibility
requirement of the blow-up construction.  The builtin initial-data family is
``u0(x) = -(A/2) sum_i exp(-x_i^2)``, whose gradient components
``A x_i exp(-x_i^2)`` share the sign of the weight components on ``(-1, 1)``,
making the initial virial pairing positive for ``A > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import GridSpec, ScalarField, VectorField, axis_coords, gradient, sobolev_norm

__all__ = [
    "CoefficientProfile",
    "CoefficientSpec",
    "WeightSpec",
    "InitialDataSpec",
    "ConditionsReport",
    "build_coefficient",
    "build_weight",
    "build_initial_data",
    "weight_l1_norm",
    "check_blowup_conditions",
]

# Sampled profiles must be effectively supported inside the box: the profile
# magnitude at |x| = L may not exceed this fraction of its maximum.
TAIL_GUARD = 1e-12


@dataclass(frozen=True)
class CoefficientProfile:
    """One axis factor ``a x^2 exp(-x^2/width^2)`` of the product coefficient."""

    amplitude: float = 1.0
    width: float = 1.0

    def __post_init__(self) -> None:
        if not self.amplitude > 0:
            raise ValueError(f"profile amplitude must be > 0, got {self.amplitude}")
        if not self.width > 0:
            raise ValueError(f"profile width must be > 0, got {self.width}")

    def value(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.amplitude * x ** 2 * np.exp(-(x / self.width) ** 2)

    def derivative(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.amplitude * 2.0 * x * (1.0 - (x / self.width) ** 2) * np.exp(-(x / self.width) ** 2)

    def peak(self) -> float:
        """Maximum of the profile, attained at ``|x| = width``."""
        return self.amplitude * self.width ** 2 * np.exp(-1.0)


@dataclass(frozen=True)
class CoefficientSpec:
    """Product coefficient ``b(x) = prod_i b_i(x_i)``, or a flagged literal.

    ``kind`` is ``"product"`` for the admissible family, or ``"zero"`` /
    ``"one"`` for the literals used by the linear and Cole-Hopf oracle modes.
    The literals do not satisfy the admissibility conditions (they are
    constant) and are excluded from the blow-up diagnostics.
    """

    kind: str = "product"
    profiles: tuple[CoefficientProfile, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("product", "zero", "one"):
            raise ValueError(f"coefficient kind must be product/zero/one, got {self.kind!r}")
        if self.kind == "product" and not self.profiles:
            raise ValueError("product coefficient needs one profile per axis")
        if self.kind != "product" and self.profiles:
            raise ValueError(f"{self.kind!r} coefficient takes no profiles")

    @classmethod
    def bump(cls, n: int, amplitude: float = 1.0, width: float = 1.0) -> "CoefficientSpec":
        return cls(kind="product", profiles=tuple(CoefficientProfile(amplitude, width) for _ in range(n)))

    @classmethod
    def zero(cls) -> "CoefficientSpec":
        return cls(kind="zero")

    @classmethod
    def one(cls) -> "CoefficientSpec":
        return cls(kind="one")

    @property
    def is_compliant(self) -> bool:
        return self.kind == "product"

    def axis_value(self, grid: GridSpec, axis: int) -> np.ndarray:
        x = axis_coords(grid)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "one":
            return np.ones_like(x)
        return self.profiles[axis].value(x)

    def axis_derivative(self, grid: GridSpec, axis: int) -> np.ndarray:
        x = axis_coords(grid)
        if self.kind in ("zero", "one"):
            return np.zeros_like(x)
        return self.profiles[axis].derivative(x)

    def sample(self, grid: GridSpec) -> ScalarField:
        return build_coefficient(self, grid)


def _axis_view(grid: GridSpec, axis: int, values: np.ndarray) -> np.ndarray:
    shape = [1] * grid.n
    shape[axis] = grid.N
    return values.reshape(shape)


def build_coefficient(spec: CoefficientSpec, grid: GridSpec) -> ScalarField:
    """Sample the coefficient on the grid.

    Profiles are sampled directly (no wrap-around summation); a guard check
    rejects profiles whose magnitude at ``|x| = L`` exceeds ``TAIL_GUARD``
    times their maximum, which keeps the coefficient effectively compactly
    supported on the box.
    """
    if spec.kind == "zero":
        return ScalarField(grid, np.zeros(grid.shape))
    if spec.kind == "one":
        return ScalarField(grid, np.ones(grid.shape))
    if len(spec.profiles) != grid.n:
        raise ValueError(f"coefficient has {len(spec.profiles)} profiles for a {grid.n}-d grid")
    values = np.ones(grid.shape)
    for axis, profile in enumerate(spec.profiles):
        edge = float(profile.value(np.array(grid.L)))
        if edge > TAIL_GUARD * profile.peak():
            raise ValueError(
                f"profile on axis {axis} is not negligible at |x| = L "
                f"(value {edge:.3e}, peak {profile.peak():.3e}); increase L or shrink the width"
            )
        values = values * _axis_view(grid, axis, profile.value(axis_coords(grid)))
    return ScalarField(grid, values)


@dataclass(frozen=True)
class WeightSpec:
    """Exponent of the singular localized weight; must satisfy 0 < kappa < 1."""

    kappa: float

    def __post_init__(self) -> None:
        if not 0.0 < self.kappa < 1.0:
            raise ValueError(f"weight exponent kappa must lie in (0, 1), got {self.kappa}")


def weight_component(x: np.ndarray, kappa: float) -> np.ndarray:
    """Per-axis weight ``sign(x)(|x|^-kappa - 1)`` on ``|x| < 1``, 0 outside.

    The node ``x = 0``, if present, stores 0 as a sentinel; the quadrature in
    the virial module never reads it (the weight is integrated in closed form
    across the two cells adjoining the origin).
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (np.abs(x) < 1.0) & (x != 0.0)
    ax = np.abs(x[inside])
    out[inside] = np.sign(x[inside]) * (ax ** (-kappa) - 1.0)
    return out


def build_weight(ws: WeightSpec, grid: GridSpec) -> VectorField:
    """Vector weight field: component i depends on ``x_i`` only."""
    comps = []
    w1d = weight_component(axis_coords(grid), ws.kappa)
    for axis in range(grid.n):
        values = np.broadcast_to(_axis_view(grid, axis, w1d), grid.shape).copy()
        comps.append(ScalarField(grid, values))
    return VectorField(tuple(comps))


def weight_l1_norm(kappa: float) -> float:
    """Per-axis L^1 norm ``2 kappa / (1 - kappa)``.

    From the antiderivative: ``integral_0^1 (x^-kappa - 1) dx = kappa/(1-kappa)``,
    doubled by odd symmetry.
    """
    WeightSpec(kappa)
    return 2.0 * kappa / (1.0 - kappa)


@dataclass(frozen=True)
class InitialDataSpec:
    """Builtin initial-data families.

    ``gauss_well``: ``u0(x) = -(A/2) sum_i exp(-x_i^2)`` (the blow-up family).
    ``cosine``: ``A cos(mode * pi * x_1 / L)``, a pure Fourier mode for the
    linear and oracle runs.
    """

    kind: str = "gauss_well"
    amplitude: float = 1.0
    mode: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("gauss_well", "cosine"):
            raise ValueError(f"initial data kind must be gauss_well/cosine, got {self.kind!r}")
        if self.kind == "cosine" and self.mode < 0:
            raise ValueError(f"cosine mode must be >= 0, got {self.mode}")


def build_initial_data(spec: InitialDataSpec, grid: GridSpec) -> ScalarField:
    x = axis_coords(grid)
    if spec.kind == "cosine":
        values = spec.amplitude * np.cos(spec.mode * np.pi / grid.L * x)
        full = np.broadcast_to(_axis_view(grid, 0, values), grid.shape).copy()
        return ScalarField(grid, full)
    values = np.zeros(grid.shape)
    for axis in range(grid.n):
        values = values + _axis_view(grid, axis, np.exp(-x ** 2))
    return ScalarField(grid, -(spec.amplitude / 2.0) * values)


@dataclass(frozen=True)
class ConditionsReport:
    """Evaluation of the blow-up preconditions on a concrete initial datum.

    ``frakC`` and ``m_star`` are user-supplied: the constant in the
    size condition and the time horizon are not computable from the
    construction, so they are recorded as given.  ``c1 = kappa / 2^(n+1)``;
    ``c2`` is the frakC-scaled Sobolev norm (the norm itself when it is
    at most 1, its square otherwise).
    """

    I0: float
    u0_sobolev: float
    frakC: float
    m_star: float
    c1: float
    c2: float
    cond1_holds: bool
    cond2_holds: bool
    positivity_holds: bool


def check_blowup_conditions(
    u0: ScalarField,
    b: ScalarField,
    ws: WeightSpec,
    s: float,
    frakC: float,
    m_star: float,
) -> ConditionsReport:
    """Evaluate the sign condition, the size condition, and the positivity test.

    ``I0`` is the weighted pairing of ``grad u0`` against ``b * w`` computed by
    the singular-weight quadrature; the positivity test is
    ``I0 sqrt(c1) - sqrt(c2) > 0``, the requirement for a finite blow-up time
    in the Riccati comparison.
    """
    if not frakC > 0:
        raise ValueError(f"frakC must be > 0, got {frakC}")
    if not m_star > 0:
        raise ValueError(f"m_star must be > 0, got {m_star}")
    if u0.grid != b.grid:
        raise ValueError("initial datum and coefficient must share one grid")
    from .virial import riccati_c1, virial_I

    grid = u0.grid
    I0 = virial_I(gradient(u0), b, ws)
    norm = sobolev_norm(u0, s)
    c1 = riccati_c1(grid.n, ws.kappa)
    c2 = frakC * (norm if norm <= 1.0 else norm ** 2)
    return ConditionsReport(
        I0=I0,
        u0_sobolev=norm,
        frakC=frakC,
        m_star=m_star,
        c1=c1,
        c2=c2,
        cond1_holds=bool(I0 > 0.0),
        cond2_holds=bool(I0 ** 2 >= c2),
        positivity_holds=bool(I0 * np.sqrt(c1) - np.sqrt(c2) > 0.0),
    )
