"""Run configuration: strict YAML parsing with located errors, and round-trip
serialization. Unknown keys are hard errors so typos cannot silently change
the physics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
import yaml

from .field import SpectralField
from .forcing import (
    ConstantForcing,
    ForcingSpec,
    QuasiperiodicForcing,
    TimePeriodicForcing,
    WindowedForcing,
    build_profile,
)
from .grid import GridSpec
from .stepper import StepperConfig

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Config syntax or constraint violation, with a field path or location."""


# --------------------------------------------------------------------------
# Schema dataclasses (plain data; round-trips exactly through YAML)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GridConfig:
    L: float = TWO_PI
    N: int = 32
    dealias_fraction: float = 2.0 / 3.0


@dataclass(frozen=True)
class SolverConfig:
    nu: float = 1.0
    dt: float = 1e-3
    record_stride: int = 10
    scheme: str = "if-rk4"
    advection: bool = True
    inviscid_audit: bool = False


@dataclass(frozen=True)
class ModeConfig:
    k: tuple[int, int, int]
    amplitude_re: tuple[float, float, float]
    amplitude_im: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ForcingConfig:
    kind: str = "constant"  # constant | time_periodic | quasiperiodic | windowed
    scale: float = 1.0
    modes: tuple[ModeConfig, ...] = ()
    period: float | None = None
    amplitude: float = 1.0
    phase: float = 0.0
    modes_b: tuple[ModeConfig, ...] = ()
    period_b: float | None = None
    amplitude_b: float = 1.0
    phase_b: float = 0.0
    on_time: float | None = None
    off_time: float | None = None
    base: "ForcingConfig | None" = None
    grashof: float | None = None  # optional: rescale so G matches


@dataclass(frozen=True)
class ConstantsConfig:
    tau: float | None = None  # default 1 / (nu lambda1)
    c0: float = 1.0
    c_serrin: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "run"  # run | contract | pullback | periodic
    t_end: float = 12.0
    transient: float = 1.0
    initial_energy: float | None = None
    n_windows: int | None = None
    seed_a: int = 1
    seed_b: int = 2
    fit_lo: float | None = None
    fit_hi: float | None = None
    start_times: tuple[float, ...] = (-2.0, -4.0, -8.0, -16.0)
    t_star: float = 0.0
    ensemble: int = 5
    n_periods: int = 5
    comb_per_period: int = 8
    rho: float | None = None


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    forcing: ForcingConfig = field(default_factory=ForcingConfig)
    constants: ConstantsConfig = field(default_factory=ConstantsConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    seed: int = 0
    output_dir: str = "runs"

    # -- domain-object construction ---------------------------------------

    def build_grid(self) -> GridSpec:
        g = self.grid
        try:
            return GridSpec(L=g.L, N=g.N, dealias_fraction=g.dealias_fraction)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def build_stepper(self) -> StepperConfig:
        s = self.solver
        try:
            return StepperConfig(
                nu=s.nu,
                dt=s.dt,
                record_stride=s.record_stride,
                scheme=s.scheme,
                advection=s.advection,
                inviscid_audit=s.inviscid_audit,
            )
        except ValueError as exc:
            raise ConfigError(f"solver: {exc}") from None

    def build_forcing(self, grid: GridSpec) -> ForcingSpec:
        try:
            spec = _build_forcing(self.forcing, grid)
            if self.forcing.grashof is not None:
                from .forcing import scale_to_grashof

                spec = scale_to_grashof(spec, self.forcing.grashof, self.solver.nu)
            return spec
        except ValueError as exc:
            raise ConfigError(f"forcing: {exc}") from None

    def tau(self, grid: GridSpec) -> float:
        if self.constants.tau is not None:
            return self.constants.tau
        return 1.0 / (self.solver.nu * grid.lambda1)


def _modes_to_profile(modes: tuple[ModeConfig, ...], grid: GridSpec) -> SpectralField:
    pairs = [
        (m.k, np.array(m.amplitude_re, dtype=float) + 1j * np.array(m.amplitude_im, dtype=float))
        for m in modes
    ]
    return build_profile(grid, pairs)


def _build_forcing(fc: ForcingConfig, grid: GridSpec) -> ForcingSpec:
    if fc.kind == "constant":
        return ConstantForcing(profile=_modes_to_profile(fc.modes, grid), scale=fc.scale)
    if fc.kind == "time_periodic":
        if fc.period is None:
            raise ValueError("time_periodic forcing requires 'period'")
        return TimePeriodicForcing(
            profile=_modes_to_profile(fc.modes, grid),
            period=fc.period,
            amplitude=fc.amplitude,
            phase=fc.phase,
            scale=fc.scale,
        )
    if fc.kind == "quasiperiodic":
        if fc.period is None or fc.period_b is None:
            raise ValueError("quasiperiodic forcing requires 'period' and 'period_b'")
        return QuasiperiodicForcing(
            profile_a=_modes_to_profile(fc.modes, grid),
            period_a=fc.period,
            profile_b=_modes_to_profile(fc.modes_b, grid),
            period_b=fc.period_b,
            amplitude_a=fc.amplitude,
            amplitude_b=fc.amplitude_b,
            phase_a=fc.phase,
            phase_b=fc.phase_b,
            scale=fc.scale,
        )
    if fc.kind == "windowed":
        if fc.base is None or fc.on_time is None or fc.off_time is None:
            raise ValueError("windowed forcing requires 'base', 'on_time' and 'off_time'")
        return WindowedForcing(
            base=_build_forcing(fc.base, grid),
            on_time=fc.on_time,
            off_time=fc.off_time,
            scale=fc.scale,
        )
    raise ValueError(f"unknown forcing kind {fc.kind!r}")


# --------------------------------------------------------------------------
# Strict mapping walker
# --------------------------------------------------------------------------

def _require_mapping(node: Any, path: str) -> dict:
    if node is None:
        return {}
    if not isinstance(node, dict):
        raise ConfigError(f"{path or 'document'} must be a mapping")
    return node


class _Section:
    """Tracks consumed keys so leftovers can be reported as unknown."""

    def __init__(self, data: dict, path: str):
        self.data = data
        self.path = path
        self.used: set[str] = set()

    def sub(self, key: str) -> "_Section":
        self.used.add(key)
        child_path = f"{self.path}.{key}" if self.path else key
        return _Section(_require_mapping(self.data.get(key), child_path), child_path)

    def get(self, key: str, default: Any) -> Any:
        self.used.add(key)
        value = self.data.get(key, default)
        return value

    def has(self, key: str) -> bool:
        return key in self.data

    def finish(self) -> None:
        unknown = set(self.data) - self.used
        if unknown:
            key = sorted(unknown)[0]
            full = f"{self.path}.{key}" if self.path else key
            raise ConfigError(f"unknown key '{full}'")

    # typed getters -------------------------------------------------------

    def _loc(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def number(self, key: str, default: float | None) -> float | None:
        v = self.get(key, default)
        if v is None:
            return None
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{self._loc(key)} must be a number")
        return float(v)

    def integer(self, key: str, default: int | None) -> int | None:
        v = self.get(key, default)
        if v is None:
            return None
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{self._loc(key)} must be an integer")
        return v

    def boolean(self, key: str, default: bool) -> bool:
        v = self.get(key, default)
        if not isinstance(v, bool):
            raise ConfigError(f"{self._loc(key)} must be true or false")
        return v

    def string(self, key: str, default: str) -> str:
        v = self.get(key, default)
        if not isinstance(v, str):
            raise ConfigError(f"{self._loc(key)} must be a string")
        return v

    def number_list(self, key: str, default: tuple, length: int | None = None) -> tuple:
        v = self.get(key, list(default))
        if not isinstance(v, list) or any(
            isinstance(x, bool) or not isinstance(x, (int, float)) for x in v
        ):
            raise ConfigError(f"{self._loc(key)} must be a list of numbers")
        if length is not None and len(v) != length:
            raise ConfigError(f"{self._loc(key)} must have exactly {length} entries")
        return tuple(float(x) for x in v)


def _parse_grid(sec: _Section) -> GridConfig:
    cfg = GridConfig(
        L=sec.number("L", GridConfig.L),
        N=sec.integer("N", GridConfig.N),
        dealias_fraction=sec.number("dealias_fraction", GridConfig.dealias_fraction),
    )
    sec.finish()
    if cfg.N % 2 != 0:
        raise ConfigError("grid.N must be even")
    if cfg.N < 4:
        raise ConfigError("grid.N must be at least 4")
    if cfg.L <= 0:
        raise ConfigError("grid.L must be positive")
    if not 0 < cfg.dealias_fraction <= 1:
        raise ConfigError("grid.dealias_fraction must lie in (0, 1]")
    return cfg


def _parse_solver(sec: _Section) -> SolverConfig:
    cfg = SolverConfig(
        nu=sec.number("nu", SolverConfig.nu),
        dt=sec.number("dt", SolverConfig.dt),
        record_stride=sec.integer("record_stride", SolverConfig.record_stride),
        scheme=sec.string("scheme", SolverConfig.scheme),
        advection=sec.boolean("advection", SolverConfig.advection),
        inviscid_audit=sec.boolean("inviscid_audit", SolverConfig.inviscid_audit),
    )
    sec.finish()
    if cfg.dt <= 0:
        raise ConfigError("solver.dt must be positive")
    if cfg.nu < 0 or (cfg.nu == 0 and not cfg.inviscid_audit):
        raise ConfigError("solver.nu must be positive (0 only with inviscid_audit)")
    if cfg.record_stride < 1:
        raise ConfigError("solver.record_stride must be at least 1")
    if cfg.scheme != "if-rk4":
        raise ConfigError("solver.scheme must be 'if-rk4'")
    return cfg


def _parse_mode(node: Any, path: str) -> ModeConfig:
    sec = _Section(_require_mapping(node, path), path)
    k = sec.get("k", None)
    if (
        not isinstance(k, list)
        or len(k) != 3
        or any(isinstance(x, bool) or not isinstance(x, int) for x in k)
    ):
        raise ConfigError(f"{path}.k must be a list of 3 integers")
    re = sec.number_list("amplitude_re", (0.0, 0.0, 0.0), 3)
    im = sec.number_list("amplitude_im", (0.0, 0.0, 0.0), 3)
    sec.finish()
    return ModeConfig(k=tuple(k), amplitude_re=re, amplitude_im=im)


def _parse_modes(sec: _Section, key: str) -> tuple[ModeConfig, ...]:
    raw = sec.get(key, [])
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise ConfigError(f"{sec._loc(key)} must be a list of modes")
    return tuple(
        _parse_mode(node, f"{sec._loc(key)}[{i}]") for i, node in enumerate(raw)
    )


def _parse_forcing(sec: _Section) -> ForcingConfig:
    kind = sec.string("kind", ForcingConfig.kind)
    base = None
    if sec.has("base"):
        base = _parse_forcing(sec.sub("base"))
    cfg = ForcingConfig(
        kind=kind,
        scale=sec.number("scale", ForcingConfig.scale),
        modes=_parse_modes(sec, "modes"),
        period=sec.number("period", None),
        amplitude=sec.number("amplitude", ForcingConfig.amplitude),
        phase=sec.number("phase", ForcingConfig.phase),
        modes_b=_parse_modes(sec, "modes_b"),
        period_b=sec.number("period_b", None),
        amplitude_b=sec.number("amplitude_b", ForcingConfig.amplitude_b),
        phase_b=sec.number("phase_b", ForcingConfig.phase_b),
        on_time=sec.number("on_time", None),
        off_time=sec.number("off_time", None),
        base=base,
        grashof=sec.number("grashof", None),
    )
    sec.finish()
    if cfg.kind not in ("constant", "time_periodic", "quasiperiodic", "windowed"):
        raise ConfigError(
            f"forcing.kind must be one of constant, time_periodic, quasiperiodic, "
            f"windowed (got '{cfg.kind}')"
        )
    if cfg.kind == "time_periodic" and cfg.period is None:
        raise ConfigError("forcing.period is required for time_periodic forcing")
    if cfg.kind == "quasiperiodic" and (cfg.period is None or cfg.period_b is None):
        raise ConfigError("forcing.period and forcing.period_b are required for quasiperiodic forcing")
    if cfg.kind == "windowed" and (cfg.base is None or cfg.on_time is None or cfg.off_time is None):
        raise ConfigError("forcing.base, forcing.on_time and forcing.off_time are required for windowed forcing")
    if cfg.grashof is not None and cfg.grashof < 0:
        raise ConfigError("forcing.grashof must be nonnegative")
    return cfg


def _parse_constants(sec: _Section) -> ConstantsConfig:
    cfg = ConstantsConfig(
        tau=sec.number("tau", None),
        c0=sec.number("c0", ConstantsConfig.c0),
        c_serrin=sec.number("c_serrin", ConstantsConfig.c_serrin),
    )
    sec.finish()
    if cfg.tau is not None and cfg.tau <= 0:
        raise ConfigError("constants.tau must be positive")
    if cfg.c0 <= 0 or cfg.c_serrin <= 0:
        raise ConfigError("constants.c0 and constants.c_serrin must be positive")
    return cfg


def _parse_experiment(sec: _Section) -> ExperimentConfig:
    d = ExperimentConfig
    cfg = ExperimentConfig(
        kind=sec.string("kind", d.kind),
        t_end=sec.number("t_end", d.t_end),
        transient=sec.number("transient", d.transient),
        initial_energy=sec.number("initial_energy", None),
        n_windows=sec.integer("n_windows", None),
        seed_a=sec.integer("seed_a", d.seed_a),
        seed_b=sec.integer("seed_b", d.seed_b),
        fit_lo=sec.number("fit_lo", None),
        fit_hi=sec.number("fit_hi", None),
        start_times=sec.number_list("start_times", d.start_times),
        t_star=sec.number("t_star", d.t_star),
        ensemble=sec.integer("ensemble", d.ensemble),
        n_periods=sec.integer("n_periods", d.n_periods),
        comb_per_period=sec.integer("comb_per_period", d.comb_per_period),
        rho=sec.number("rho", None),
    )
    sec.finish()
    if cfg.kind not in ("run", "contract", "pullback", "periodic"):
        raise ConfigError(
            f"experiment.kind must be one of run, contract, pullback, periodic (got '{cfg.kind}')"
        )
    if cfg.t_end < 0:
        raise ConfigError("experiment.t_end must be nonnegative")
    if cfg.ensemble < 1:
        raise ConfigError("experiment.ensemble must be at least 1")
    if cfg.n_periods < 1:
        raise ConfigError("experiment.n_periods must be at least 1")
    if cfg.comb_per_period < 1:
        raise ConfigError("experiment.comb_per_period must be at least 1")
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse a YAML run configuration; raise ConfigError with a location or
    field path on any problem."""
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown location"
        raise ConfigError(f"syntax error at {where}: {exc.problem}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"syntax error: {exc}") from None

    root = _Section(_require_mapping(doc, ""), "")
    grid = _parse_grid(root.sub("grid"))
    solver = _parse_solver(root.sub("solver"))
    forcing = _parse_forcing(root.sub("forcing"))
    constants = _parse_constants(root.sub("constants"))
    experiment = _parse_experiment(root.sub("experiment"))
    seed = root.integer("seed", 0)
    output_dir = root.string("output_dir", "runs")
    root.finish()
    return RunConfig(
        grid=grid,
        solver=solver,
        forcing=forcing,
        constants=constants,
        experiment=experiment,
        seed=seed,
        output_dir=output_dir,
    )


def _strip_defaults(value: Any) -> Any:
    if isinstance(value, tuple):
        return [_strip_defaults(v) for v in value]
    return value


def config_to_dict(cfg: RunConfig) -> dict:
    def convert(obj: Any) -> Any:
        if hasattr(obj, "__dataclass_fields__"):
            return {k: convert(v) for k, v in asdict(obj).items() if v is not None}
        if isinstance(obj, dict):
            return {k: convert(v) for k, v in obj.items() if v is not None}
        if isinstance(obj, (list, tuple)):
            return [convert(v) for v in obj]
        return obj

    return convert(asdict(cfg))


def serialize_config(cfg: RunConfig) -> str:
    """YAML text whose parse reproduces cfg exactly."""
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)


def load_config(path: str) -> RunConfig:
    from pathlib import Path

    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    return parse_config(text)
