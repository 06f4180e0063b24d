"""Time integration of ``u_t = Lap(u) + |grad u|^2 b`` in mild form.

The stiff linear part is diagonal in Fourier space, so the default stepper is
a classical fourth-order scheme on the integrating-factor variable
``exp(|xi|^2 t) u_hat`` (exact on the linear part).  A second-order
exponential time differencing scheme is kept as a cross-check; its phi
functions are evaluated exactly with a series fallback at small arguments to
avoid cancellation.

Adaptivity is driven by the relative per-step change of ``||grad u||_inf``:
the nonlinearity is quadratic in the gradient, so blow-up manifests there
first.  Steps whose relative change exceeds ten times the target are rejected
and retried with half the step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .problem import WeightSpec
from .spectral import (
    GridSpec,
    ScalarField,
    VectorField,
    axis_wavenumbers,
    dealias_mask,
    sobolev_hs_weights,
    squared_wavenumbers,
)

__all__ = [
    "SolverConfig",
    "TrajectoryRecord",
    "RunResult",
    "PicardReport",
    "nonlinear_term",
    "step",
    "evolve",
    "picard_iterate",
]

INTEGRATORS = ("if_rk4", "etd2")

# rejection threshold, as a multiple of the adaptivity target
REJECT_FACTOR = 10.0
# gradient growth factor that qualifies a step-size collapse as blow-up
BLOWUP_GROWTH = 100.0


@dataclass(frozen=True)
class SolverConfig:
    """Time-integration configuration.

    ``s`` is the diagnostic Sobolev index and must exceed ``n/2 + 3`` for the
    grid it is used on (checked by :func:`evolve`).  ``theta_norm`` and
    ``theta_grad`` are the blow-up detection thresholds on ``||u||_{H^s}``
    and ``||grad u||_inf``.  ``snapshot_stride`` > 0 stores the full field
    every that many accepted steps (plus the initial state).
    """

    dt0: float
    t_end: float
    integrator: str = "if_rk4"
    dealias: bool = True
    s: float = 4.0
    safety: float = 0.9
    growth: float = 1.5
    dt_min: float = 1e-10
    theta_norm: float = 1e6
    theta_grad: float = 1e5
    adaptive: bool = True
    delta_target: float = 0.05
    snapshot_stride: int = 0

    def __post_init__(self) -> None:
        if not self.dt0 > 0:
            raise ValueError(f"dt0 must be > 0, got {self.dt0}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be > 0, got {self.t_end}")
        if not self.dt_min < self.dt0:
            raise ValueError(f"dt_min ({self.dt_min}) must be smaller than dt0 ({self.dt0})")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if not (self.theta_norm > 1 and self.theta_grad > 1):
            raise ValueError("blow-up thresholds must exceed 1")
        if not 0 < self.safety <= 1:
            raise ValueError(f"safety factor must lie in (0, 1], got {self.safety}")
        if not self.growth > 1:
            raise ValueError(f"growth cap must exceed 1, got {self.growth}")
        if not self.delta_target > 0:
            raise ValueError(f"delta_target must be > 0, got {self.delta_target}")
        if self.snapshot_stride < 0:
            raise ValueError(f"snapshot_stride must be >= 0, got {self.snapshot_stride}")


@dataclass(frozen=True)
class TrajectoryRecord:
    """Diagnostics at one accepted step."""

    t: float
    I: float
    hs_norm: float
    grad_sup: float
    dt: float
    tail_mass: float


@dataclass
class RunResult:
    """Outcome of a run: final status, diagnostics series, optional snapshots.

    ``status`` is one of ``completed``, ``blowup_detected``, ``dt_underflow``,
    ``diverged``; ``reason`` names what triggered a detection
    (``hs_norm_threshold``, ``grad_sup_threshold``, or ``dt_collapse``).
    """

    status: str
    t_final: float
    samples: list[TrajectoryRecord]
    u_final: ScalarField
    snapshots: list[tuple[float, ScalarField]] = field(default_factory=list)
    reason: str = ""


def _grad_arrays(uh: np.ndarray, grid: GridSpec) -> list[np.ndarray]:
    xi = axis_wavenumbers(grid)
    out = []
    for axis in range(grid.n):
        shape = [1] * grid.n
        shape[axis] = grid.N
        out.append(np.fft.ifftn(1j * xi.reshape(shape) * uh).real)
    return out


def _nonlinear_hat(uh: np.ndarray, bvals: np.ndarray, grid: GridSpec, use_dealias: bool) -> np.ndarray:
    """FFT of ``|grad u|^2 b``, optionally dealiased (2/3 rule)."""
    grads = _grad_arrays(uh, grid)
    F = np.zeros(grid.shape)
    for g in grads:
        F += g * g
    F *= bvals
    F_hat = np.fft.fftn(F)
    if use_dealias:
        F_hat = F_hat * dealias_mask(grid)
    return F_hat


def nonlinear_term(u: ScalarField, b: ScalarField, use_dealias: bool = True) -> ScalarField:
    """``|grad u|^2 b`` from the spectral gradient, dealiased if configured."""
    if u.grid != b.grid:
        raise ValueError("field and coefficient must share one grid")
    F_hat = _nonlinear_hat(np.fft.fftn(u.values), b.values, u.grid, use_dealias)
    return ScalarField(u.grid, np.fft.ifftn(F_hat).real)


def _phi1(z: np.ndarray) -> np.ndarray:
    """(e^z - 1)/z with a series fallback for small |z|."""
    out = np.empty_like(z)
    small = np.abs(z) < 1e-4
    zs = z[small]
    out[small] = 1.0 + zs / 2.0 + zs ** 2 / 6.0 + zs ** 3 / 24.0
    zl = z[~small]
    out[~small] = np.expm1(zl) / zl
    return out


def _phi2(z: np.ndarray) -> np.ndarray:
    """(e^z - z - 1)/z^2 with a series fallback for small |z|."""
    out = np.empty_like(z)
    small = np.abs(z) < 1e-4
    zs = z[small]
    out[small] = 0.5 + zs / 6.0 + zs ** 2 / 24.0 + zs ** 3 / 120.0
    zl = z[~small]
    out[~small] = (np.expm1(zl) - zl) / zl ** 2
    return out


def _step_if_rk4(uh, dt, ksq, nl):
    """Classical RK4 on the integrating-factor variable exp(|xi|^2 t) u_hat."""
    E = np.exp(-ksq * dt / 2.0)
    E2 = E * E
    k1 = nl(uh)
    k2 = nl(E * (uh + (dt / 2.0) * k1))
    k3 = nl(E * uh + (dt / 2.0) * k2)
    k4 = nl(E2 * uh + dt * E * k3)
    return E2 * uh + (dt / 6.0) * (E2 * k1 + 2.0 * E * (k2 + k3) + k4)


def _step_etd2(uh, dt, ksq, nl):
    """Cox-Matthews second-order ETD Runge-Kutta step."""
    z = -ksq * dt
    E = np.exp(z)
    f1 = dt * _phi1(z)
    f2 = dt * _phi2(z)
    n0 = nl(uh)
    a = E * uh + f1 * n0
    return a + f2 * (nl(a) - n0)


_STEPPERS = {"if_rk4": _step_if_rk4, "etd2": _step_etd2}


def step(
    u: ScalarField,
    b: ScalarField,
    dt: float,
    integrator: str = "if_rk4",
    use_dealias: bool = True,
) -> ScalarField:
    """One step of the configured exponential integrator."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if u.grid != b.grid:
        raise ValueError("field and coefficient must share one grid")
    if integrator not in _STEPPERS:
        raise ValueError(f"integrator must be one of {INTEGRATORS}, got {integrator!r}")
    grid = u.grid
    ksq = squared_wavenumbers(grid)
    nl = lambda w: _nonlinear_hat(w, b.values, grid, use_dealias)
    out = _STEPPERS[integrator](np.fft.fftn(u.values), dt, ksq, nl)
    return ScalarField(grid, np.fft.ifftn(out).real)


@lru_cache(maxsize=None)
def _boundary_mask(grid: GridSpec) -> np.ndarray:
    """Nodes within distance L/8 of the box boundary along any axis."""
    from .spectral import axis_coords

    x = axis_coords(grid)
    edge = np.abs(x) >= grid.L * (7.0 / 8.0)
    mask = np.zeros(grid.shape, dtype=bool)
    for axis in range(grid.n):
        shape = [1] * grid.n
        shape[axis] = grid.N
        mask |= edge.reshape(shape)
    mask.setflags(write=False)
    return mask


def _tail_mass(uvals: np.ndarray, grid: GridSpec) -> float:
    """Fraction of ``sum |u|`` within distance L/8 of the box boundary."""
    au = np.abs(uvals)
    total = np.sum(au)
    if total == 0.0:
        return 0.0
    return float(np.sum(au[_boundary_mask(grid)]) / total)


def evolve(
    u0: ScalarField,
    b: ScalarField,
    cfg: SolverConfig,
    weight: WeightSpec | None = None,
    step_hook: Callable[[float, ScalarField, TrajectoryRecord], None] | None = None,
) -> RunResult:
    """Integrate to ``t_end`` or until a termination condition fires.

    Adaptive stepping multiplies dt by ``clamp(safety * target/delta, 1/2,
    growth)`` where ``delta`` is the relative per-step change of
    ``||grad u||_inf``; steps with ``delta`` beyond ten times the target (or a
    non-finite result) are rejected and retried at half the step.  Detection:
    crossing either threshold reports ``blowup_detected`` with the threshold
    name; a step-size collapse below ``dt_min`` reports ``blowup_detected``
    with reason ``dt_collapse`` when the gradient has grown by a factor
    ``BLOWUP_GROWTH`` since the start, ``dt_underflow`` otherwise.

    ``weight`` enables the virial diagnostic in each record (requires a grid
    fine enough for the singular quadrature); without it ``I`` is recorded
    as 0.  ``step_hook`` is called with ``(t, field, record)`` after every
    accepted step.
    """
    if u0.grid != b.grid:
        raise ValueError("initial datum and coefficient must share one grid")
    grid = u0.grid
    if not cfg.s > grid.n / 2.0 + 3.0:
        raise ValueError(f"diagnostic index s must exceed n/2 + 3 = {grid.n / 2 + 3}, got {cfg.s}")
    if not u0.is_finite():
        raise ValueError("initial datum must be finite")

    if weight is not None:
        from .virial import virial_I

        def virial_of(vgrads: list[np.ndarray]) -> float:
            vf = VectorField(tuple(ScalarField(grid, g) for g in vgrads))
            return virial_I(vf, b, weight)
    else:
        virial_of = None

    ksq = squared_wavenumbers(grid)
    hs_w = sobolev_hs_weights(grid, cfg.s)
    hs_scale = (2.0 * grid.L) ** grid.n / grid.N ** (2 * grid.n)
    nl = lambda w: _nonlinear_hat(w, b.values, grid, cfg.dealias)
    stepper = _STEPPERS[cfg.integrator]

    uh = np.fft.fftn(u0.values)
    t = 0.0
    dt = min(cfg.dt0, cfg.t_end)
    grads0 = _grad_arrays(uh, grid)
    grad_prev = float(np.sqrt(np.max(sum(g * g for g in grads0))))
    grad_initial = grad_prev

    samples: list[TrajectoryRecord] = []
    snapshots: list[tuple[float, ScalarField]] = []
    if cfg.snapshot_stride > 0:
        snapshots.append((0.0, u0))

    status = None
    reason = ""
    accepted = 0

    while status is None:
        if t >= cfg.t_end - 1e-14 * cfg.t_end:
            status = "completed"
            break
        dt_try = min(dt, cfg.t_end - t)
        uh_new = stepper(uh, dt_try, ksq, nl)
        grads = _grad_arrays(uh_new, grid)
        grad_new = float(np.sqrt(np.max(sum(g * g for g in grads))))
        finite = bool(np.isfinite(grad_new)) and bool(np.all(np.isfinite(uh_new)))
        delta = abs(grad_new - grad_prev) / max(grad_prev, 1e-12)

        if cfg.adaptive and (not finite or delta > REJECT_FACTOR * cfg.delta_target):
            dt = dt_try / 2.0
            if dt < cfg.dt_min:
                if grad_prev >= BLOWUP_GROWTH * max(grad_initial, 1e-12):
                    status, reason = "blowup_detected", "dt_collapse"
                else:
                    status, reason = "dt_underflow", "dt_underflow"
            continue
        if not finite:
            status, reason = "diverged", "non_finite_step"
            break

        # accept
        t_new = cfg.t_end if cfg.t_end - (t + dt_try) <= 1e-14 * cfg.t_end else t + dt_try
        uh = uh_new
        t = t_new
        grad_prev = grad_new
        accepted += 1

        uvals = np.fft.ifftn(uh).real
        u_field = ScalarField(grid, uvals)
        hs = float(np.sqrt(np.sum(hs_w * np.abs(uh) ** 2) * hs_scale))
        I_val = virial_of(grads) if virial_of is not None else 0.0
        rec = TrajectoryRecord(
            t=t,
            I=I_val,
            hs_norm=hs,
            grad_sup=grad_new,
            dt=dt_try,
            tail_mass=_tail_mass(uvals, grid),
        )
        samples.append(rec)
        if cfg.snapshot_stride > 0 and accepted % cfg.snapshot_stride == 0:
            snapshots.append((t, u_field))
        if step_hook is not None:
            step_hook(t, u_field, rec)

        if hs > cfg.theta_norm:
            status, reason = "blowup_detected", "hs_norm_threshold"
            break
        if grad_new > cfg.theta_grad:
            status, reason = "blowup_detected", "grad_sup_threshold"
            break

        if cfg.adaptive:
            factor = cfg.safety * cfg.delta_target / max(delta, 1e-12)
            dt = dt_try * min(max(factor, 0.5), cfg.growth)
            if dt < cfg.dt_min:
                if grad_prev >= BLOWUP_GROWTH * max(grad_initial, 1e-12):
                    status, reason = "blowup_detected", "dt_collapse"
                else:
                    status, reason = "dt_underflow", "dt_underflow"
        else:
            dt = cfg.dt0

    t_final = cfg.t_end if status == "completed" else t
    return RunResult(
        status=status,
        t_final=t_final,
        samples=samples,
        u_final=ScalarField(grid, np.fft.ifftn(uh).real),
        snapshots=snapshots,
        reason=reason,
    )


# ---------------------------------------------------------------------------
# Picard iteration on the mild formulation


@dataclass(frozen=True)
class PicardReport:
    """Contraction diagnostics of the mild-solution fixed point.

    ``sup_differences[m]`` is the sup-over-slices H^s distance between
    iterates m+1 and m; ``contraction_factor`` the geometric-fit slope of
    those differences; ``C1_hat`` and ``CB_hat`` the measured initial-data
    and bilinear-term constants; ``smallness = 4 C1_hat CB_hat ||u0||``
    realizes the contraction hypothesis when below 1.
    """

    T: float
    iterates: int
    sup_differences: tuple[float, ...]
    contraction_factor: float
    C1_hat: float
    CB_hat: float
    smallness: float
    diverged: bool


def picard_iterate(
    u0: ScalarField,
    b: ScalarField,
    T: float,
    slices: int = 16,
    iterations: int = 8,
    s: float = 4.0,
    use_dealias: bool = True,
) -> PicardReport:
    """Run the mild-formulation fixed point on stored time slices.

    Each iterate is ``u^(m+1)(t_j) = h_{t_j} u0 + int_0^{t_j} h_{t_j - tau}
    F(u^(m)(tau)) dtau`` with the Duhamel integral evaluated by the trapezoid
    rule over the stored slices; the propagator is exact per slice, so the
    only quadrature error is in tau.  Divergence is flagged when the
    differences grow for three consecutive iterates.
    """
    if not T > 0:
        raise ValueError(f"horizon T must be > 0, got {T}")
    if slices < 8:
        raise ValueError(f"need at least 8 slices, got {slices}")
    if iterations < 3:
        raise ValueError(f"need at least 3 iterations, got {iterations}")
    if u0.grid != b.grid:
        raise ValueError("initial datum and coefficient must share one grid")
    grid = u0.grid
    ksq = squared_wavenumbers(grid)
    hs_w = sobolev_hs_weights(grid, s)
    hs_scale = (2.0 * grid.L) ** grid.n / grid.N ** (2 * grid.n)

    def hs_norm(ch: np.ndarray) -> float:
        return float(np.sqrt(np.sum(hs_w * np.abs(ch) ** 2) * hs_scale))

    tau = np.linspace(0.0, T, slices + 1)
    dtau = T / slices
    u0h = np.fft.fftn(u0.values)
    heat_part = [np.exp(-ksq * tj) * u0h for tj in tau]

    def duhamel(F_hats: list[np.ndarray]) -> list[np.ndarray]:
        """Trapezoid-in-tau Duhamel integrals at every slice time."""
        out = [np.zeros_like(u0h)]
        for j in range(1, slices + 1):
            acc = 0.5 * np.exp(-ksq * (tau[j] - tau[0])) * F_hats[0]
            for i in range(1, j):
                acc = acc + np.exp(-ksq * (tau[j] - tau[i])) * F_hats[i]
            acc = acc + 0.5 * F_hats[j]
            out.append(dtau * acc)
        return out

    current = list(heat_part)
    norm_u0 = hs_norm(u0h)
    C1_hat = max(hs_norm(H) for H in heat_part) / norm_u0 if norm_u0 > 0 else 0.0

    diffs: list[float] = []
    grow_streak = 0
    diverged = False
    for _ in range(iterations):
        F_hats = [_nonlinear_hat(c, b.values, grid, use_dealias) for c in current]
        duh = duhamel(F_hats)
        new = [heat_part[j] + duh[j] for j in range(slices + 1)]
        d = max(hs_norm(new[j] - current[j]) for j in range(slices + 1))
        if diffs and d > diffs[-1]:
            grow_streak += 1
            if grow_streak >= 3:
                diverged = True
        else:
            grow_streak = 0
        diffs.append(d)
        current = new
        if diverged:
            break

    # bilinear-term constant measured on the last iterate
    F_hats = [_nonlinear_hat(c, b.values, grid, use_dealias) for c in current]
    duh = duhamel(F_hats)
    norm_B = max(hs_norm(d) for d in duh)
    norm_u = max(hs_norm(c) for c in current)
    CB_hat = norm_B / norm_u ** 2 if norm_u > 0 else 0.0
    smallness = 4.0 * C1_hat * CB_hat * norm_u0

    positive = [(m, d) for m, d in enumerate(diffs) if d > 0.0]
    if len(positive) >= 2:
        ms = np.array([m for m, _ in positive], dtype=float)
        ld = np.log([d for _, d in positive])
        slope = np.polyfit(ms, ld, 1)[0]
        contraction = float(np.exp(slope))
    else:
        contraction = 0.0

    return PicardReport(
        T=T,
        iterates=len(diffs),
        sup_differences=tuple(diffs),
        contraction_factor=contraction,
        C1_hat=C1_hat,
        CB_hat=CB_hat,
        smallness=smallness,
        diverged=diverged,
    )
