"""End-to-end drivers: trajectory audits, two-trajectory contraction,
pullback ensemble shrinkage, and periodic-orbit convergence."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    AuditResult,
    ConstantsReport,
    RateFit,
    absorbing_inequality_audit,
    constants_report,
    energy_balance_audit,
    enstrophy_window_audit,
    fit_decay_rate,
    gradient_bound_audit,
)
from .field import SpectralField, random_divfree, zero_field
from .forcing import ConstantForcing, ForcingSpec, TimePeriodicForcing
from .grid import GridSpec
from .operators import (
    dw_distance,
    inner_product_l2,
    norm_h,
    norm_h_sq_batch,
    norm_v_sq_batch,
    norm_vprime_sq_batch,
)
from .stepper import StepperConfig, TrajectoryState, integrate, integrate_batch


@dataclass
class TimeSeries:
    """Columnar record of a single trajectory."""

    times: list[float] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    enstrophy: list[float] = field(default_factory=list)
    vprime_sq: list[float] = field(default_factory=list)
    g_sq: list[float] = field(default_factory=list)
    g_dot_u: list[float] = field(default_factory=list)

    COLUMNS = ("t", "energy", "enstrophy", "vprime_sq", "g_sq", "g_dot_u")

    def rows(self):
        return zip(self.times, self.energy, self.enstrophy, self.vprime_sq,
                   self.g_sq, self.g_dot_u)


class TrajectoryRecorder:
    """Observer computing the standard per-sample diagnostics."""

    def __init__(self, forcing: ForcingSpec | None):
        self.forcing = forcing
        self.series = TimeSeries()

    def __call__(self, state: TrajectoryState) -> None:
        u = state.u
        g = u.grid
        s = self.series
        s.times.append(state.t)
        s.energy.append(float(norm_h_sq_batch(u.coeffs, g)))
        s.enstrophy.append(float(norm_v_sq_batch(u.coeffs, g)))
        s.vprime_sq.append(float(norm_vprime_sq_batch(u.coeffs, g)))
        if self.forcing is None:
            s.g_sq.append(0.0)
            s.g_dot_u.append(0.0)
        else:
            s.g_sq.append(self.forcing.h_norm_sq(state.t))
            s.g_dot_u.append(inner_product_l2(self.forcing.sample(state.t), u))


def _initial_field(grid: GridSpec, seed: int, energy: float) -> SpectralField:
    if energy == 0.0:
        return zero_field(grid)
    return random_divfree(grid, seed, energy)


def _default_energy(report: ConstantsReport, fallback: float = 1.0) -> float:
    """Half the absorbing-ball energy, or `fallback` when the ball degenerates."""
    return 0.5 * report.R if report.R > 0 else fallback


# --------------------------------------------------------------------------
# Plain trajectory with audits
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AuditRunReport:
    constants: ConstantsReport
    series: TimeSeries
    seed: int
    initial_energy: float
    transient: float
    audits: tuple[AuditResult, ...]

    @property
    def all_passed(self) -> bool:
        return all(a.passed for a in self.audits)

    def audit(self, name: str) -> AuditResult:
        for a in self.audits:
            if a.name == name:
                return a
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "constants": self.constants.to_json_dict(),
            "seed": self.seed,
            "initial_energy": self.initial_energy,
            "transient": self.transient,
            "audits": [a.to_json_dict() for a in self.audits],
            "all_passed": bool(self.all_passed),
        }


def constants_for(
    grid: GridSpec,
    config: StepperConfig,
    forcing: ForcingSpec | None,
    tau: float | None = None,
    c0: float = 1.0,
    c_serrin: float = 1.0,
) -> ConstantsReport:
    """Constants report treating absent forcing as zero force."""
    if forcing is not None:
        return constants_report(config.nu, grid, forcing, tau, c0, c_serrin)
    from .analysis import constants_from_norms

    tau_eff = tau if tau is not None else 1.0 / (config.nu * grid.lambda1)
    return constants_from_norms(config.nu, grid.lambda1, tau_eff, 0.0, 0.0, c0, c_serrin)


def assemble_audits(
    series: TimeSeries,
    nu: float,
    report: ConstantsReport,
    transient: float = 1.0,
    n_windows: int | None = None,
) -> tuple[AuditResult, ...]:
    """Energy-balance, absorbing-ball, enstrophy-window and gradient audits
    for a recorded trajectory."""
    times = np.array(series.times)
    energy = np.array(series.energy)
    enstrophy = np.array(series.enstrophy)

    audits = [
        energy_balance_audit(times, energy, enstrophy, np.array(series.g_dot_u), nu),
        absorbing_inequality_audit(times, energy, report),
    ]

    inside = energy <= report.R * (1.0 + 1e-9)
    wanted = 0
    if inside.any() and report.R > 0:
        t_enter = float(times[np.argmax(inside)])
        span = float(times[-1]) - t_enter
        wanted = n_windows if n_windows is not None else int(math.floor(span / report.tau + 1e-9))
    if wanted >= 1:
        audits.append(
            enstrophy_window_audit(times, enstrophy, report.tau, report,
                                   t_start=t_enter, n_windows=wanted)
        )
    else:
        audits.append(AuditResult(
            name="enstrophy_windows", passed=True, worst_margin=0.0,
            detail={"windows": [],
                    "note": "no complete tau-window inside the absorbing ball (vacuous)"},
        ))

    if report.regularity_small:
        audits.append(gradient_bound_audit(times, enstrophy, report, t_min=transient))
    return tuple(audits)


def _stokes_balance_audit(u0: SpectralField, final: SpectralField, nu: float,
                          span: float) -> AuditResult:
    """
    Exact energy balance for the purely viscous run: the per-mode dissipation
    integral is available in closed form, so the residual is pure rounding.
    """
    g = u0.grid
    decay = np.exp(-2.0 * nu * g.ksq_int * g.lambda1 * span)
    sq0 = (u0.coeffs.real ** 2 + u0.coeffs.imag ** 2).sum(axis=0)
    dissipated = float(g.L ** 3 * (sq0 * (1.0 - decay) * g.parseval_mult).sum())
    e0 = float(norm_h_sq_batch(u0.coeffs, g))
    et = float(norm_h_sq_batch(final.coeffs, g))
    residual = et + dissipated - e0
    scale = max(e0, et, dissipated, 1e-300)
    rel = residual / scale
    return AuditResult(
        name="energy_balance",
        passed=abs(rel) <= 1e-12,
        worst_margin=1e-12 - abs(rel),
        detail={"residual": residual, "relative_residual": rel,
                "tolerance": 1e-12, "method": "analytic (viscous-only)"},
    )


def run_audits(
    grid: GridSpec,
    config: StepperConfig,
    forcing: ForcingSpec | None,
    t_end: float,
    seed: int = 0,
    initial_energy: float | None = None,
    transient: float = 1.0,
    tau: float | None = None,
    c0: float = 1.0,
    c_serrin: float = 1.0,
    n_windows: int | None = None,
) -> AuditRunReport:
    """Single trajectory with the energy-balance, absorbing-ball, enstrophy
    window, and gradient-bound audits attached."""
    report = constants_for(grid, config, forcing, tau, c0, c_serrin)
    energy0 = initial_energy if initial_energy is not None else _default_energy(report)
    u0 = _initial_field(grid, seed, energy0)
    recorder = TrajectoryRecorder(forcing)
    final = integrate(TrajectoryState(0.0, u0), config, forcing, t_end, observers=(recorder,))

    audits = list(assemble_audits(recorder.series, config.nu, report, transient, n_windows))
    if not config.advection and forcing is None:
        audits[0] = _stokes_balance_audit(u0, final.u, config.nu, t_end)
    return AuditRunReport(
        constants=report,
        series=recorder.series,
        seed=seed,
        initial_energy=energy0,
        transient=transient,
        audits=tuple(audits),
    )


# --------------------------------------------------------------------------
# Two-trajectory contraction
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionReport:
    seed_a: int
    seed_b: int
    times: np.ndarray
    wsq: np.ndarray          # |u_a - u_b|^2
    dw: np.ndarray           # weak-metric distance
    predicted_M: float
    fit: RateFit | None
    envelope_ok: bool
    envelope_margin: float
    monotone: bool
    constants: ConstantsReport

    def to_json_dict(self) -> dict:
        return {
            "seed_a": self.seed_a,
            "seed_b": self.seed_b,
            "predicted_M": self.predicted_M,
            "fit": None if self.fit is None else vars(self.fit).copy(),
            "envelope_ok": bool(self.envelope_ok),
            "envelope_margin": self.envelope_margin,
            "monotone": bool(self.monotone),
            "constants": self.constants.to_json_dict(),
            "final_wsq": float(self.wsq[-1]),
            "final_dw": float(self.dw[-1]),
        }


def _pair_series_observer(grid: GridSpec, out_t: list, out_wsq: list, out_dw: list):
    def observe(t: float, coeffs: np.ndarray) -> None:
        w = coeffs[0] - coeffs[1]
        out_t.append(t)
        out_wsq.append(float(norm_h_sq_batch(w, grid)))
        out_dw.append(dw_distance(SpectralField(grid, coeffs[0]),
                                  SpectralField(grid, coeffs[1])))
    return observe


def run_contraction(
    grid: GridSpec,
    config: StepperConfig,
    forcing: ForcingSpec | None,
    seed_a: int,
    seed_b: int,
    t_end: float,
    initial_energy: float | None = None,
    fit_window: tuple[float, float] | None = None,
    tau: float | None = None,
    c0: float = 1.0,
    c_serrin: float = 1.0,
) -> ContractionReport:
    """
    Integrate two trajectories under identical forcing, track |w|^2 and the
    weak-metric distance, fit the decay rate, and check the exponential
    envelope with the predicted contraction rate.
    """
    if forcing is not None:
        report = constants_report(config.nu, grid, forcing, tau, c0, c_serrin)
    else:
        from .analysis import constants_from_norms

        tau_eff = tau if tau is not None else 1.0 / (config.nu * grid.lambda1)
        report = constants_from_norms(config.nu, grid.lambda1, tau_eff, 0.0, 0.0, c0, c_serrin)
    if not report.contraction_small:
        raise ValueError(
            "contraction experiment requires the smallness criterion "
            "c_serrin * tau * l20^2 < nu^3 lambda1^(1/2)"
        )

    energy0 = initial_energy if initial_energy is not None else _default_energy(report)
    ua = _initial_field(grid, seed_a, energy0)
    ub = _initial_field(grid, seed_b, energy0)
    batch = np.stack([ua.coeffs, ub.coeffs])

    ts: list[float] = []
    wsq: list[float] = []
    dw: list[float] = []
    integrate_batch(batch, 0.0, config, forcing, t_end, grid,
                    observer=_pair_series_observer(grid, ts, wsq, dw))

    times = np.array(ts)
    wsq_arr = np.array(wsq)
    dw_arr = np.array(dw)

    m = report.M
    env = wsq_arr[0] * np.exp(-m * (times - times[0]))
    scale = max(float(wsq_arr[0]), 1e-300)
    env_margin = float(((env - wsq_arr) / scale).min())
    envelope_ok = env_margin >= -1e-9

    drops = np.diff(wsq_arr)
    monotone = bool(np.all(drops <= 1e-10 * scale))

    window = fit_window if fit_window is not None else (t_end / 2.0, t_end)
    try:
        fit = fit_decay_rate(times, wsq_arr, window)
    except ValueError:
        fit = None

    return ContractionReport(
        seed_a=seed_a,
        seed_b=seed_b,
        times=times,
        wsq=wsq_arr,
        dw=dw_arr,
        predicted_M=m,
        fit=fit,
        envelope_ok=envelope_ok,
        envelope_margin=env_margin,
        monotone=monotone,
        constants=report,
    )


# --------------------------------------------------------------------------
# Pullback ensemble shrinkage
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PullbackReport:
    start_times: tuple[float, ...]
    t_star: float
    ensemble: int
    seeds: tuple[int, ...]
    energies: tuple[float, ...]
    d0: float
    ds_diameters: tuple[float, ...]
    dw_diameters: tuple[float, ...]
    max_pair_sq: tuple[float, ...]
    envelope_ratio: tuple[float, ...]  # diameter / (d0 * exp(-M (t*-s)))
    monotone: bool
    constants: ConstantsReport

    def to_json_dict(self) -> dict:
        return {
            "start_times": list(self.start_times),
            "t_star": self.t_star,
            "ensemble": self.ensemble,
            "seeds": list(self.seeds),
            "energies": list(self.energies),
            "d0": self.d0,
            "ds_diameters": list(self.ds_diameters),
            "dw_diameters": list(self.dw_diameters),
            "max_pair_sq": list(self.max_pair_sq),
            "envelope_ratio": list(self.envelope_ratio),
            "monotone": bool(self.monotone),
            "constants": self.constants.to_json_dict(),
        }


def _ensemble_diameters(grid: GridSpec, coeffs: np.ndarray) -> tuple[float, float]:
    """Max pairwise strong and weak distances, in sorted pair order."""
    m = coeffs.shape[0]
    ds = 0.0
    dwv = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            ds = max(ds, float(np.sqrt(norm_h_sq_batch(coeffs[i] - coeffs[j], grid))))
            dwv = max(dwv, dw_distance(SpectralField(grid, coeffs[i]),
                                       SpectralField(grid, coeffs[j])))
    return ds, dwv


def run_pullback(
    grid: GridSpec,
    config: StepperConfig,
    forcing: ForcingSpec | None,
    start_times: list[float],
    ensemble_seeds: list[int],
    t_star: float,
    energies: list[float] | None = None,
    tau: float | None = None,
    c0: float = 1.0,
    c_serrin: float = 1.0,
) -> PullbackReport:
    """
    For each start s <= t*, evolve the same ensemble from s to t* and report
    its strong/weak diameters at t*; earlier starts should shrink the cloud.
    """
    if any(s > t_star for s in start_times):
        raise ValueError("all start times must be <= t_star")
    if forcing is not None:
        report = constants_report(config.nu, grid, forcing, tau, c0, c_serrin)
    else:
        from .analysis import constants_from_norms

        tau_eff = tau if tau is not None else 1.0 / (config.nu * grid.lambda1)
        report = constants_from_norms(config.nu, grid.lambda1, tau_eff, 0.0, 0.0, c0, c_serrin)
    if not report.contraction_small:
        raise ValueError("pullback experiment requires the contraction smallness criterion")

    m = len(ensemble_seeds)
    if energies is None:
        top = report.R if report.R > 0 else 1.0
        energies = list(np.linspace(0.0, top, m))
    members = [_initial_field(grid, s, e) for s, e in zip(ensemble_seeds, energies)]
    init = np.stack([f.coeffs for f in members])
    d0, _ = _ensemble_diameters(grid, init)

    ds_out: list[float] = []
    dw_out: list[float] = []
    sq_out: list[float] = []
    ratio: list[float] = []
    for s in start_times:
        final = integrate_batch(init.copy(), float(s), config, forcing, t_star, grid)
        ds, dwv = _ensemble_diameters(grid, final)
        ds_out.append(ds)
        dw_out.append(dwv)
        sq_out.append(ds * ds)
        env = d0 * math.exp(-report.M * (t_star - s))
        ratio.append(ds / env if env > 0 else (0.0 if ds == 0 else math.inf))

    order = np.argsort(np.array(start_times))[::-1]  # latest start first
    ordered = np.array(ds_out)[order]
    monotone = bool(np.all(np.diff(ordered) <= 1e-10 * max(d0, 1e-300)))

    return PullbackReport(
        start_times=tuple(float(s) for s in start_times),
        t_star=float(t_star),
        ensemble=m,
        seeds=tuple(ensemble_seeds),
        energies=tuple(float(e) for e in energies),
        d0=d0,
        ds_diameters=tuple(ds_out),
        dw_diameters=tuple(dw_out),
        max_pair_sq=tuple(sq_out),
        envelope_ratio=tuple(ratio),
        monotone=monotone,
        constants=report,
    )


# --------------------------------------------------------------------------
# Periodic orbit
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodicReport:
    rho: float
    transient: float
    n_periods: int
    times: np.ndarray
    mismatch: np.ndarray     # |u(t) - u(t - rho)| / sup |u|
    final_mismatch: float
    sup_norm: float
    monotone: bool
    constants: ConstantsReport

    def to_json_dict(self) -> dict:
        return {
            "rho": self.rho,
            "transient": self.transient,
            "n_periods": self.n_periods,
            "final_mismatch": self.final_mismatch,
            "sup_norm": self.sup_norm,
            "monotone": bool(self.monotone),
            "constants": self.constants.to_json_dict(),
        }


def run_periodic(
    grid: GridSpec,
    config: StepperConfig,
    forcing: ForcingSpec,
    transient: float,
    n_periods: int,
    rho: float | None = None,
    comb_per_period: int = 8,
    seed: int = 0,
    initial_energy: float = 0.0,
    tau: float | None = None,
    c0: float = 1.0,
    c_serrin: float = 1.0,
) -> PeriodicReport:
    """
    Integrate through the transient, then compare the trajectory against its
    own rho-shift on a comb of phases; the mismatch should decay to zero.
    """
    if isinstance(forcing, TimePeriodicForcing):
        period = forcing.period
        if rho is not None and not math.isclose(rho, period, rel_tol=1e-12):
            raise ValueError("rho disagrees with the forcing period")
        rho = period
    elif isinstance(forcing, ConstantForcing):
        if rho is None:
            raise ValueError("constant forcing is rho-periodic for every rho; pass one")
    else:
        raise ValueError("periodic experiment needs a periodic (or constant) forcing")
    if transient < 0 or n_periods < 1:
        raise ValueError("transient must be >= 0 and n_periods >= 1")

    report = constants_report(config.nu, grid, forcing, tau, c0, c_serrin)
    if not report.contraction_small:
        raise ValueError("periodic experiment requires the contraction smallness criterion")

    u0 = _initial_field(grid, seed, initial_energy)
    state = integrate(TrajectoryState(0.0, u0), config, forcing, transient)

    delta = rho / comb_per_period
    ring: deque[SpectralField] = deque(maxlen=comb_per_period)
    times: list[float] = []
    raw_mismatch: list[float] = []
    sup_norm = 0.0
    total = comb_per_period * (n_periods + 1)
    for j in range(total + 1):
        u = state.u
        sup_norm = max(sup_norm, norm_h(u))
        if j >= comb_per_period:
            times.append(state.t)
            raw_mismatch.append(norm_h(u - ring[0]))
        ring.append(u)
        if j < total:
            state = integrate(state, config, forcing, state.t + delta)

    mismatch = np.array(raw_mismatch)
    if sup_norm > 0:
        mismatch = mismatch / sup_norm
    final_mismatch = float(mismatch[-comb_per_period:].max())
    slack = 1e-8 * max(float(mismatch[0]), 1e-300)
    monotone = bool(np.all(np.diff(mismatch) <= slack))

    return PeriodicReport(
        rho=float(rho),
        transient=float(transient),
        n_periods=int(n_periods),
        times=np.array(times),
        mismatch=mismatch,
        final_mismatch=final_mismatch,
        sup_norm=sup_norm,
        monotone=monotone,
        constants=report,
    )
