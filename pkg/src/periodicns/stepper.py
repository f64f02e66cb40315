"""Integrating-factor RK4 time integration with the viscous term treated exactly."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .field import SpectralField, irfftn_raw, rfftn_raw
from .forcing import ConstantForcing, ForcingSpec
from .grid import GridSpec
from .operators import _advection_scale_real, bilinear_term, leray_project_coeffs

Observer = Callable[["TrajectoryState"], None]

_REL_STEP_TOL = 1e-9


class BlowupError(RuntimeError):
    """Nonfinite coefficients after a step (blowup or CFL violation)."""

    def __init__(self, t: float):
        super().__init__(f"nonfinite coefficients at t = {t} (blowup or CFL violation)")
        self.t = t


@dataclass(frozen=True)
class StepperConfig:
    nu: float
    dt: float
    record_stride: int = 1
    scheme: str = "if-rk4"
    advection: bool = True
    inviscid_audit: bool = False
    validate_records: bool = True

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.nu < 0 or (self.nu == 0 and not self.inviscid_audit):
            raise ValueError("nu must be positive (nu = 0 only in inviscid audit mode)")
        if self.scheme != "if-rk4":
            raise ValueError(f"unsupported scheme {self.scheme!r}")
        if self.record_stride < 1:
            raise ValueError("record_stride must be at least 1")


@dataclass(frozen=True)
class TrajectoryState:
    t: float
    u: SpectralField


class _Propagator:
    """Precomputed viscous integrating factors and the nonlinear RHS."""

    def __init__(self, grid: GridSpec, config: StepperConfig, forcing: ForcingSpec | None):
        self.grid = grid
        self.config = config
        self.forcing = forcing
        self._factors: dict[float, tuple[np.ndarray, ...]] = {}
        self._use_fast_advection = grid.alias_free and config.advection
        self._work: dict = {}
        self._g_const = (
            forcing.sample(0.0).coeffs if isinstance(forcing, ConstantForcing) else None
        )

    def factors(self, h: float) -> tuple[np.ndarray, ...]:
        """(E, E^2, (h/2)E, (h/2)1, hE) for the half-step factor E."""
        got = self._factors.get(h)
        if got is None:
            ksq_phys = self.grid.ksq_int * self.grid.lambda1
            e = np.exp(-self.config.nu * ksq_phys * (h / 2.0))
            got = (e, e * e, (h / 2.0) * e, np.full_like(e, h / 2.0), h * e)
            if len(self._factors) > 4:
                self._factors.clear()
            self._factors[h] = got
        return got

    def _buffer(self, name: str, shape: tuple, dtype) -> np.ndarray:
        buf = self._work.get(name)
        if buf is None or buf.shape != shape:
            buf = np.empty(shape, dtype=dtype)
            self._work[name] = buf
        return buf

    def rhs(self, coeffs: np.ndarray, t: float) -> np.ndarray:
        """-B(u,u) + g(t); input flattened to (batch, 3, N, N, N//2+1)."""
        g = self.grid
        n = g.N
        if self._use_fast_advection:
            phys = irfftn_raw(coeffs, n)  # u / N^3
            prods = self._buffer("prods", phys.shape[:1] + (6, n, n, n), np.float64)
            _kernels.products(phys, prods)
            t_hat = rfftn_raw(prods)      # (u_i u_j)^ / N^3
            out = np.empty_like(coeffs)
            _kernels.rows_project(t_hat, g.k_int, g.inv_ksq_int,
                                  _advection_scale_real(g), out)
        elif self.config.advection:
            out = np.empty_like(coeffs)
            for m in range(coeffs.shape[0]):
                u = SpectralField(g, coeffs[m])
                out[m] = -bilinear_term(u, u).coeffs
        else:
            out = np.zeros_like(coeffs)
        if self._g_const is not None:
            out += self._g_const
        elif self.forcing is not None:
            out += self.forcing.sample(t).coeffs
        return out

    def step_coeffs(self, coeffs: np.ndarray, t: float, h: float) -> np.ndarray:
        # Classical integrating-factor RK4: exact on the Stokes part,
        # explicit stages for the advection + forcing remainder.
        g = self.grid
        shape = coeffs.shape
        c = np.ascontiguousarray(coeffs).reshape((-1,) + g.spectral_shape)
        e, e2, he2_e, he2, h_e = self.factors(h)

        a = self.rhs(c, t)
        s = self._buffer("stage", c.shape, np.complex128)
        _kernels.stage(c, a, e, he2_e, s)        # E (u + h/2 a)
        b = self.rhs(s, t + h / 2.0)
        _kernels.stage(c, b, e, he2, s)          # E u + h/2 b
        cc = self.rhs(s, t + h / 2.0)
        _kernels.stage(c, cc, e2, h_e, s)        # E2 u + h E cc
        d = self.rhs(s, t + h)

        out = np.empty_like(c)
        _kernels.combine(c, a, b, cc, d, e, e2, h, g.k_int, g.inv_ksq_int, out)
        if not np.all(np.isfinite(out.view(np.float64))):
            raise BlowupError(t + h)
        return out.reshape(shape)


def step(state: TrajectoryState, config: StepperConfig, forcing: ForcingSpec | None) -> TrajectoryState:
    """Advance one full step of length config.dt."""
    prop = _Propagator(state.u.grid, config, forcing)
    out = prop.step_coeffs(state.u.coeffs, state.t, config.dt)
    return TrajectoryState(state.t + config.dt, SpectralField(state.u.grid, out))


def _plan_step(t: float, t_end: float, dt: float) -> float | None:
    """Next step length; None when t has reached t_end (within dt * 1e-9)."""
    rem = t_end - t
    if rem <= dt * _REL_STEP_TOL:
        return None
    if rem < dt * (1.0 + _REL_STEP_TOL):
        return rem
    return dt


def _drive(
    coeffs: np.ndarray,
    t0: float,
    config: StepperConfig,
    forcing: ForcingSpec | None,
    t_end: float,
    grid: GridSpec,
    emit: Callable[[float, np.ndarray], None],
) -> tuple[float, np.ndarray]:
    """Shared stepping loop; emits (t, coeffs) records, never twice per time."""
    prop = _Propagator(grid, config, forcing)
    t = t0
    emit(t, coeffs)
    last_emitted = t
    n_step = 0
    while True:
        h = _plan_step(t, t_end, config.dt)
        if h is None:
            break
        coeffs = prop.step_coeffs(coeffs, t, h)
        t = t + h if h == config.dt else t_end
        n_step += 1
        if n_step % config.record_stride == 0:
            emit(t, coeffs)
            last_emitted = t
    t_final = t_end if abs(t - t_end) <= config.dt * _REL_STEP_TOL else t
    if t_final != last_emitted:
        emit(t_final, coeffs)
    return t_final, coeffs


def integrate(
    state: TrajectoryState,
    config: StepperConfig,
    forcing: ForcingSpec | None,
    t_end: float,
    observers: Sequence[Observer] = (),
) -> TrajectoryState:
    """
    Repeated steps from state.t to exactly t_end (final partial step allowed),
    invoking observers at the start, every record_stride steps, and at the end.
    """
    if t_end < state.t:
        raise ValueError("t_end must not precede the current time")
    grid = state.u.grid

    def emit(t: float, coeffs: np.ndarray) -> None:
        snapshot = TrajectoryState(t, SpectralField(grid, coeffs))
        if config.validate_records:
            snapshot.u.validate()
        for obs in observers:
            obs(snapshot)

    t_final, coeffs = _drive(state.u.coeffs, state.t, config, forcing, t_end, grid, emit)
    return TrajectoryState(t_final, SpectralField(grid, coeffs))


def integrate_batch(
    coeffs: np.ndarray,
    t0: float,
    config: StepperConfig,
    forcing: ForcingSpec | None,
    t_end: float,
    grid: GridSpec,
    observer: Callable[[float, np.ndarray], None] | None = None,
) -> np.ndarray:
    """
    Advance a stack of trajectories (leading axes) under shared forcing.
    Vectorized equivalent of per-member `integrate`; deterministic because
    the batched array operations are themselves deterministic.
    """
    if t_end < t0:
        raise ValueError("t_end must not precede the current time")

    def emit(t: float, c: np.ndarray) -> None:
        if observer is not None:
            observer(t, c)

    _, out = _drive(coeffs, t0, config, forcing, t_end, grid, emit)
    return out


def cfl_advisory(state: TrajectoryState, config: StepperConfig) -> float:
    """max |u| * dt * N / L; values above 0.5 suggest the step is too long."""
    grid = state.u.grid
    phys = state.u.to_physical()
    umax = float(np.sqrt((phys ** 2).sum(axis=0).max())) if phys.size else 0.0
    return umax * config.dt * grid.N / grid.L
