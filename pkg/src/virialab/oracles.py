"""Closed-form reference solutions used as ground truth.

``heat_exact`` is the exact single-mode decay; ``cole_hopf`` is the global
exact solution of the constant-coefficient equation
``u_t = Lap(u) + |grad u|^2``, obtained by propagating ``exp(u0)`` with the
heat semigroup and taking the logarithm (since ``exp(u)`` solves the heat
equation).  Both go through the package's own spectral heat propagator, so
oracle comparisons isolate the nonlinear-stepping error rather than
transform error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import RunResult
from .spectral import GridSpec, ScalarField, heat_propagate, sobolev_norm, squared_wavenumbers

__all__ = ["OracleCase", "OracleErrorReport", "heat_exact", "cole_hopf", "oracle_error"]

# exp overflow guard: keeps exp(u0) comfortably inside double range
MAX_SUP_FOR_EXP = 30.0


@dataclass(frozen=True)
class OracleCase:
    """A reference-solution scenario.

    ``kind`` is ``heat_mode`` (requires the zero coefficient and single-mode
    data) or ``cole_hopf`` (requires the constant-one coefficient).
    """

    kind: str
    u0: ScalarField
    horizon: float

    def __post_init__(self) -> None:
        if self.kind not in ("heat_mode", "cole_hopf"):
            raise ValueError(f"oracle kind must be heat_mode/cole_hopf, got {self.kind!r}")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be > 0, got {self.horizon}")

    def reference(self, t: float) -> ScalarField:
        if self.kind == "heat_mode":
            return heat_exact(self.u0, t)
        return cole_hopf(self.u0, t)


def _single_mode_check(u0: ScalarField) -> None:
    """Reject fields whose spectrum has more than one (conjugate) mode pair."""
    coeffs = np.fft.fftn(u0.values)
    mags = np.abs(coeffs)
    peak = mags.max()
    if peak == 0.0:
        return
    ksq = squared_wavenumbers(u0.grid)
    active = mags > 1e-10 * peak
    if len(np.unique(np.round(ksq[active], 12))) > 1:
        raise ValueError("heat_exact needs a pure Fourier mode (one |xi| shell)")


def heat_exact(u0: ScalarField, t: float) -> ScalarField:
    """Exact decay of a pure Fourier mode: amplitude times ``exp(-|xi|^2 t)``."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    _single_mode_check(u0)
    return heat_propagate(u0, t)


def cole_hopf(u0: ScalarField, t: float) -> ScalarField:
    """Exact solution of ``u_t = Lap(u) + |grad u|^2``: ``log(h_t * exp(u0))``.

    The heat flow of the positive field ``exp(u0)`` stays positive, which is
    asserted before the logarithm.
    """
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    sup = u0.max_abs()
    if sup > MAX_SUP_FOR_EXP:
        raise ValueError(f"||u0||_inf = {sup:.3f} exceeds {MAX_SUP_FOR_EXP}; exp would overflow")
    propagated = heat_propagate(ScalarField(u0.grid, np.exp(u0.values)), t)
    low = float(propagated.values.min())
    if not low > 1e-300:
        raise ValueError(f"heat flow of exp(u0) lost positivity (min {low:.3e})")
    return ScalarField(u0.grid, np.log(propagated.values))


@dataclass(frozen=True)
class OracleErrorReport:
    """Per-sample and maximal discrepancies against the reference solution."""

    times: tuple[float, ...]
    linf_errors: tuple[float, ...]
    hs_errors: tuple[float, ...]
    max_linf: float
    max_hs: float


def oracle_error(case: OracleCase, numerical: RunResult, s: float = 4.0) -> OracleErrorReport:
    """Compare stored snapshots of a run against the oracle at the same times."""
    if not numerical.snapshots:
        raise ValueError("oracle comparison needs a run with stored snapshots")
    grid = numerical.snapshots[0][1].grid
    if grid != case.u0.grid:
        raise ValueError("oracle and run use different grids")
    times, linf, hs = [], [], []
    for t, u in numerical.snapshots:
        if t > case.horizon + 1e-12:
            raise ValueError(f"snapshot at t = {t} lies past the oracle horizon {case.horizon}")
        ref = case.reference(t)
        diff = ScalarField(grid, u.values - ref.values)
        times.append(t)
        linf.append(diff.max_abs())
        hs.append(sobolev_norm(diff, s))
    return OracleErrorReport(
        times=tuple(times),
        linf_errors=tuple(linf),
        hs_errors=tuple(hs),
        max_linf=max(linf),
        max_hs=max(hs),
    )
