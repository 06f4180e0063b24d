"""Virial functional, identity decomposition, and Riccati comparison.

Quadrature design
-----------------
The functional pairs the solution gradient against ``b(x) w(x)`` where the
weight component ``w_i(x_i) = sign(x_i)(|x_i|^-kappa - 1)`` is singular at the
origin and supported in ``[-1, 1]``.  Along the singular axis the smooth
factor is reconstructed piecewise-linearly between grid nodes and integrated
cell by cell against the weight using closed-form antiderivatives of
``x^(1-kappa)`` and ``x^(-kappa)`` (and, for the squared weight, of
``x^(-2 kappa)``, ``x^(1-2 kappa)`` and ``x^(2-2 kappa)``, with the
logarithmic branch at ``2 kappa = 1``).  The scheme is exact in the weight and
second order in the data.  The remaining axes use exact integration of the
piecewise-linear reconstruction over ``[-1, 1]`` (trapezoid with clipped
boundary cells).

The origin is always a grid node (N is even); the two cells adjoining it are
integrated in closed form, so the stored sentinel value of the weight at 0 is
never read.  For the squared weight and for ``|x|^(-kappa-1)`` the moment
multiplying the origin node may diverge; that contribution is dropped, which
is exact whenever the smooth factor vanishes at the origin (true for every
admissible coefficient, whose axis factors vanish there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .problem import CoefficientSpec, WeightSpec, build_coefficient
from .spectral import (
    GridSpec,
    ScalarField,
    VectorField,
    axis_coords,
    axis_wavenumbers,
    dealias_mask,
    squared_wavenumbers,
)

__all__ = [
    "VirialBreakdown",
    "RiccatiParams",
    "BlowupDomainError",
    "ComparisonVerdict",
    "cell_moments",
    "axis_weighted_integral",
    "virial_I",
    "identity_terms",
    "check_identity",
    "riccati_c1",
    "riccati_J",
    "blowup_time",
    "fit_c2",
    "comparison_check",
]

MAX_SPACING = 0.25

_ODD_KINDS = ("w",)
_DROP_ORIGIN_KINDS = ("w2", "dw")


def _pos_moments(a: float, b: float, kappa: float, kind: str) -> tuple[float, float]:
    """Closed-form ``(int_a^b W, int_a^b x W)`` on ``0 <= a < b <= 1``.

    ``W`` is ``x^-kappa - 1`` (kind "w"), its square (kind "w2"),
    ``x^(-kappa-1)`` (kind "dw"), or 1 (kind "box").  Divergent combinations
    (``a = 0`` with a non-integrable power) must be avoided by the caller.
    """
    if kind == "box":
        return b - a, (b * b - a * a) / 2.0
    k = kappa
    if kind == "w":
        m0 = (b ** (1 - k) - a ** (1 - k)) / (1 - k) - (b - a)
        m1 = (b ** (2 - k) - a ** (2 - k)) / (2 - k) - (b * b - a * a) / 2.0
        return m0, m1
    if kind == "dw":
        m0 = (a ** (-k) - b ** (-k)) / k
        m1 = (b ** (1 - k) - a ** (1 - k)) / (1 - k)
        return m0, m1
    if kind == "w2":
        if 2 * k >= 2:
            raise ValueError("squared-weight exponent 2*kappa must stay below 2")
        p = 1.0 - 2.0 * k
        if p == 0.0:
            lead0 = math.log(b / a)
        else:
            lead0 = (b ** p - a ** p) / p
        m0 = lead0 - 2.0 * (b ** (1 - k) - a ** (1 - k)) / (1 - k) + (b - a)
        m1 = (
            (b ** (2 - 2 * k) - a ** (2 - 2 * k)) / (2 - 2 * k)
            - 2.0 * (b ** (2 - k) - a ** (2 - k)) / (2 - k)
            + (b * b - a * a) / 2.0
        )
        return m0, m1
    raise ValueError(f"unknown weight kind {kind!r}")


def cell_moments(a: float, b: float, kappa: float, kind: str) -> tuple[float, float]:
    """Signed cell moments ``(int_a^b W, int_a^b x W)`` for a cell not straddling 0."""
    if a >= b:
        raise ValueError("cell must satisfy a < b")
    if a < 0.0 and b > 0.0:
        raise ValueError("cell must not straddle the origin")
    if b <= 0.0:
        m0, m1 = _pos_moments(-b, -a, kappa, kind)
        if kind in _ODD_KINDS:
            return -m0, m1
        return m0, -m1
    return _pos_moments(a, b, kappa, kind)


def _origin_m1(b: float, kappa: float, kind: str) -> float:
    """``int_0^b x W(x) dx``; finite for every kind since the x factor tames W."""
    k = kappa
    if kind == "w2":
        return (
            b ** (2 - 2 * k) / (2 - 2 * k)
            - 2.0 * b ** (2 - k) / (2 - k)
            + b * b / 2.0
        )
    if kind == "dw":
        return b ** (1 - k) / (1 - k)
    raise ValueError(f"no origin moment for kind {kind!r}")


@lru_cache(maxsize=None)
def _axis_weights(grid: GridSpec, kappa: float, kind: str) -> np.ndarray:
    """Per-node quadrature weights for one axis: ``sum_j q_j g_j ~ int_-1^1 g W``."""
    x = axis_coords(grid)
    h = grid.spacing
    q = np.zeros(grid.N)
    for j in range(grid.N - 1):
        xl, xr = float(x[j]), float(x[j + 1])
        a, b = max(xl, -1.0), min(xr, 1.0)
        if b <= a:
            continue
        if kind in _DROP_ORIGIN_KINDS and a == 0.0:
            # cell right of the origin: the origin-node moment may diverge
            # and is dropped (the smooth factor vanishes there)
            q[j + 1] += _origin_m1(b, kappa, kind) / h
            continue
        if kind in _DROP_ORIGIN_KINDS and b == 0.0:
            q[j] += _origin_m1(-a, kappa, kind) / h
            continue
        m0, m1 = cell_moments(a, b, kappa, kind)
        q[j] += (xr * m0 - m1) / h
        q[j + 1] += (m1 - xl * m0) / h
    q.setflags(write=False)
    return q


def _check_grid(grid: GridSpec) -> None:
    if grid.spacing > MAX_SPACING:
        raise ValueError(
            f"grid spacing {grid.spacing:.4f} exceeds {MAX_SPACING}; too coarse to resolve [-1, 1]"
        )
    if grid.L - grid.spacing < 1.0:
        raise ValueError(
            f"half length L = {grid.L} does not contain the weight support [-1, 1] strictly inside the box"
        )


def axis_weighted_integral(
    values: np.ndarray, grid: GridSpec, kappa: float, axis: int, kind: str = "w"
) -> float:
    """Integrate ``values`` over ``[-1,1]^n`` with weight ``W(x_axis)``.

    The singular axis uses the closed-form cell weights of ``kind``; every
    other axis integrates the piecewise-linear reconstruction over [-1, 1].
    """
    _check_grid(grid)
    out = np.asarray(values, dtype=float)
    for ax in range(grid.n):
        vec = _axis_weights(grid, kappa, kind if ax == axis else "box")
        out = np.tensordot(vec, out, axes=([0], [0]))
    return float(out)


def virial_I(v: VectorField, b: ScalarField, ws: WeightSpec) -> float:
    """Weighted pairing ``sum_i int v_i b w_i`` over ``[-1, 1]^n``."""
    grid = v.grid
    if b.grid != grid:
        raise ValueError("vector field and coefficient must share one grid")
    total = 0.0
    for axis, comp in enumerate(v.components):
        total += axis_weighted_integral(comp.values * b.values, grid, ws.kappa, axis, "w")
    return total


@dataclass(frozen=True)
class VirialBreakdown:
    """Terms of the virial identity ``dI/dt = A + B`` and its lower bounds.

    ``A`` is the diffusion pairing, ``B`` the nonlinear pairing, ``I2`` the
    nonnegative squared-weight term, ``I3`` the coefficient-derivative cross
    term, and ``per_axis_I1`` the per-axis terms entering the pointwise
    weight bound.
    """

    I: float
    A: float
    B: float
    I2: float
    I3: float
    per_axis_I1: tuple[float, ...]


def identity_terms(
    v: VectorField,
    coeff: CoefficientSpec,
    ws: WeightSpec,
    use_dealias: bool = True,
) -> VirialBreakdown:
    """Evaluate every term of the identity at one time slice.

    Takes the coefficient specification (not a sampled field): the cross term
    needs the analytic per-axis derivative of the coefficient factors.  Set
    ``use_dealias`` to match the solver configuration so the nonlinear
    pairing is consistent with the evolved dynamics.
    """
    grid = v.grid
    _check_grid(grid)
    kappa = ws.kappa
    if not 2.0 * kappa < 2.0:
        raise ValueError("squared-weight exponent 2*kappa must stay below 2")
    b = build_coefficient(coeff, grid).values
    xi = axis_wavenumbers(grid)
    ksq = squared_wavenumbers(grid)

    def axis_view(axis: int, arr1d: np.ndarray) -> np.ndarray:
        shape = [1] * grid.n
        shape[axis] = grid.N
        return arr1d.reshape(shape)

    vsq = np.zeros(grid.shape)
    for comp in v.components:
        vsq = vsq + comp.values ** 2

    I = 0.0
    A = 0.0
    for axis, comp in enumerate(v.components):
        I += axis_weighted_integral(comp.values * b, grid, kappa, axis, "w")
        lap = np.fft.ifftn(-ksq * np.fft.fftn(comp.values)).real
        A += axis_weighted_integral(lap * b, grid, kappa, axis, "w")

    F_hat = np.fft.fftn(vsq * b)
    if use_dealias:
        F_hat = F_hat * dealias_mask(grid)
    B = 0.0
    for axis in range(grid.n):
        dF = np.fft.ifftn(1j * axis_view(axis, xi) * F_hat).real
        B += axis_weighted_integral(dF * b, grid, kappa, axis, "w")

    I2 = 0.0
    I3 = 0.0
    I1 = []
    for axis in range(grid.n):
        I2 += 0.5 * kappa * axis_weighted_integral(vsq * b * b, grid, kappa, axis, "w2")
        b_axis = axis_view(axis, coeff.axis_value(grid, axis))
        db_axis = axis_view(axis, coeff.axis_derivative(grid, axis))
        others = np.ones(grid.shape)
        for j in range(grid.n):
            if j != axis:
                others = others * axis_view(j, coeff.axis_value(grid, j))
        I3 -= axis_weighted_integral(vsq * b * others * db_axis, grid, kappa, axis, "w")
        I1.append(kappa * axis_weighted_integral(vsq * b * b_axis, grid, kappa, axis, "dw"))

    return VirialBreakdown(I=I, A=A, B=B, I2=I2, I3=I3, per_axis_I1=tuple(I1))


def check_identity(
    snapshots: Sequence[tuple[float, ScalarField]],
    coeff: CoefficientSpec,
    ws: WeightSpec,
    use_dealias: bool = True,
) -> float:
    """Maximum normalized identity residual over uniformly spaced snapshots.

    Differentiates the functional by central differences in time and compares
    against the evaluated right-hand terms; the residual at each interior
    sample is normalized by ``|A| + |B| + 1``.  The time derivative never uses
    the equation's right side, so the check is independent evidence.
    """
    from .spectral import gradient

    if len(snapshots) < 3:
        raise ValueError(f"identity check needs at least 3 snapshots, got {len(snapshots)}")
    times = np.array([t for t, _ in snapshots], dtype=float)
    dts = np.diff(times)
    dt = dts[0]
    if not np.all(np.abs(dts - dt) <= 1e-6 * abs(dt)):
        raise ValueError("identity check needs uniform snapshot spacing in t")
    terms = [identity_terms(gradient(u), coeff, ws, use_dealias) for _, u in snapshots]
    I = np.array([tr.I for tr in terms])
    worst = 0.0
    for k in range(1, len(terms) - 1):
        dIdt = (I[k + 1] - I[k - 1]) / (2.0 * dt)
        rhs = terms[k].A + terms[k].B
        worst = max(worst, abs(dIdt - rhs) / (abs(terms[k].A) + abs(terms[k].B) + 1.0))
    return worst


# ---------------------------------------------------------------------------
# Riccati comparison


@dataclass(frozen=True)
class RiccatiParams:
    """Coefficients of ``J' = c1 J^2 - c2`` with ``J(0) = I0``."""

    c1: float
    c2: float
    I0: float

    def __post_init__(self) -> None:
        if not self.c1 > 0:
            raise ValueError(f"c1 must be > 0, got {self.c1}")
        if self.c2 < 0:
            raise ValueError(f"c2 must be >= 0, got {self.c2}")


class BlowupDomainError(ValueError):
    """Positivity requirement ``I0 sqrt(c1) - sqrt(c2) > 0`` fails.

    ``margin`` carries the signed value of the failed expression.
    """

    def __init__(self, margin: float):
        self.margin = margin
        super().__init__(
            f"I0*sqrt(c1) - sqrt(c2) must be positive for a finite blow-up time, got {margin:.6e}"
        )


_C2_ZERO = 1e-300


def riccati_c1(n: int, kappa: float) -> float:
    """Quadratic coefficient ``kappa / 2^(n+1)`` of the comparison inequality."""
    if n < 1 or int(n) != n:
        raise ValueError(f"dimension n must be a positive integer, got {n}")
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    return kappa / 2.0 ** (n + 1)


def blowup_time(p: RiccatiParams) -> float:
    """Finite blow-up time of the comparison solution.

    ``t* = ln((I0 sqrt(c1) + sqrt(c2)) / (I0 sqrt(c1) - sqrt(c2))) / (2 sqrt(c1 c2))``,
    with the limit ``1 / (c1 I0)`` as ``c2 -> 0``.  Raises
    :class:`BlowupDomainError` (carrying the signed margin) when the
    positivity requirement fails.
    """
    margin = p.I0 * math.sqrt(p.c1) - math.sqrt(p.c2)
    if not margin > 0.0:
        raise BlowupDomainError(margin)
    if p.c2 < _C2_ZERO:
        return 1.0 / (p.c1 * p.I0)
    num = p.I0 * math.sqrt(p.c1) + math.sqrt(p.c2)
    return math.log(num / margin) / (2.0 * math.sqrt(p.c1 * p.c2))


def riccati_J(p: RiccatiParams, t: float) -> float:
    """Closed-form solution of ``J' = c1 J^2 - c2``, ``J(0) = I0``.

    Defined for ``0 <= t < t*`` in the blow-up regime; rejects evaluation at
    or past the blow-up time and denominators within 1e-14 of zero.
    """
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    if p.c2 < _C2_ZERO:
        if p.I0 > 0 and t >= 1.0 / (p.c1 * p.I0):
            raise ValueError("evaluation at or past the blow-up time")
        den = 1.0 - p.c1 * p.I0 * t
        if abs(den) < 1e-14:
            raise ValueError("comparison solution denominator within 1e-14 of zero")
        return p.I0 / den
    root = math.sqrt(p.c2 / p.c1)
    if p.I0 == root:
        return p.I0  # equilibrium branch
    margin = p.I0 * math.sqrt(p.c1) - math.sqrt(p.c2)
    if margin > 0.0 and t >= blowup_time(p):
        raise ValueError("evaluation at or past the blow-up time")
    z = 2.0 * math.sqrt(p.c1 * p.c2) * t
    if z > 700.0:
        # sub-equilibrium branch: exp overflows, J has converged to -root
        return -root
    grow = math.exp(z)
    num = (p.I0 + root) + (p.I0 - root) * grow
    den = (p.I0 + root) - (p.I0 - root) * grow
    if abs(den) < 1e-14:
        raise ValueError("comparison solution denominator within 1e-14 of zero")
    return root * num / den


def fit_c2(times: np.ndarray, values: np.ndarray, c1: float, early_fraction: float = 0.5) -> float:
    """Empirical ``c2`` from early samples: ``max (c1 I^2 - dI/dt)_+``.

    The derivative uses the nonuniform three-point central formula, so the
    fit works on adaptively stepped series.  Samples with
    ``t <= t0 + early_fraction * (t_end - t0)`` are used; at least one
    interior sample is always included.
    """
    t = np.asarray(times, dtype=float)
    I = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != I.shape or len(t) < 3:
        raise ValueError("fit_c2 needs matching 1-d arrays with at least 3 samples")
    if not 0.0 < early_fraction <= 1.0:
        raise ValueError(f"early_fraction must lie in (0, 1], got {early_fraction}")
    cutoff = t[0] + early_fraction * (t[-1] - t[0])
    best = 0.0
    used = 0
    for k in range(1, len(t) - 1):
        if t[k] > cutoff and used > 0:
            break
        hp = t[k + 1] - t[k]
        hm = t[k] - t[k - 1]
        dIdt = (
            hm * hm * I[k + 1] - hp * hp * I[k - 1] + (hp * hp - hm * hm) * I[k]
        ) / (hp * hm * (hp + hm))
        best = max(best, c1 * I[k] ** 2 - dIdt)
        used += 1
    return max(0.0, best)


@dataclass(frozen=True)
class ComparisonVerdict:
    """Outcome of checking ``I(t_k) >= J(t_k)`` along a sampled trajectory."""

    passed: bool
    samples_checked: int
    violations: int
    first_violation: tuple[float, float, float] | None  # (t, I, J)


def comparison_check(series: Sequence, p: RiccatiParams, tol: float = 1e-6) -> ComparisonVerdict:
    """Assert the comparison principle on sampled data.

    ``series`` is any sequence of records with ``t`` and ``I`` attributes.
    Samples at or past the blow-up time of ``p`` (when defined) are outside
    the comparison domain and are skipped.  A sample violates when
    ``I < J - tol * (1 + |J|)``.
    """
    if not series:
        raise ValueError("comparison check needs a nonempty series")
    first_I = series[0].I
    if abs(first_I - p.I0) > 1e-9 * (1.0 + abs(p.I0)):
        raise ValueError(
            f"params I0 = {p.I0!r} does not match the series' initial value {first_I!r}"
        )
    try:
        t_star = blowup_time(p)
    except BlowupDomainError:
        t_star = None
    checked = 0
    violations = 0
    first_violation = None
    for rec in series:
        t = rec.t - series[0].t
        if t_star is not None and t >= t_star:
            break
        J = riccati_J(p, t)
        checked += 1
        if rec.I < J - tol * (1.0 + abs(J)):
            violations += 1
            if first_violation is None:
                first_violation = (rec.t, rec.I, J)
    return ComparisonVerdict(
        passed=(violations == 0),
        samples_checked=checked,
        violations=violations,
        first_violation=first_violation,
    )
