"""Config parsing: defaults, located errors, unknown-key rejection,
and round-trip serialization."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from periodicns import ConfigError, parse_config, serialize_config
from periodicns.config import RunConfig

MINIMAL = ""

FULL = """
grid: {L: 6.283185307179586, N: 16, dealias_fraction: 0.6666666666666666}
solver: {nu: 0.8, dt: 0.002, record_stride: 4}
forcing:
  kind: time_periodic
  period: 1.0
  amplitude: 1.4142135623730951
  phase: 0.25
  scale: 0.5
  modes:
    - {k: [0, 1, 1], amplitude_re: [0.3, 0.1, -0.1]}
    - {k: [1, 0, 0], amplitude_re: [0.0, 1.0, 0.0], amplitude_im: [0.0, 0.0, 0.5]}
constants: {tau: 1.25, c0: 1.0, c_serrin: 2.0}
experiment:
  kind: contract
  t_end: 4.0
  seed_a: 3
  seed_b: 4
seed: 17
output_dir: out
"""


class TestParsing:
    def test_minimal_config_fills_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.grid.N == 32
        assert cfg.grid.L == pytest.approx(2 * math.pi)
        assert cfg.solver.nu == 1.0
        assert cfg.solver.dt == 1e-3
        assert cfg.forcing.kind == "constant"
        assert cfg.forcing.modes == ()
        assert cfg.constants.c0 == 1.0
        assert cfg.experiment.kind == "run"
        assert cfg.seed == 0
        assert cfg.output_dir == "runs"

    def test_full_config(self):
        cfg = parse_config(FULL)
        assert cfg.grid.N == 16
        assert cfg.forcing.kind == "time_periodic"
        assert len(cfg.forcing.modes) == 2
        assert cfg.forcing.modes[1].amplitude_im == (0.0, 0.0, 0.5)
        assert cfg.experiment.seed_b == 4

    def test_odd_n_error_names_field(self):
        with pytest.raises(ConfigError, match="grid.N must be even"):
            parse_config("grid: {N: 33}")

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key 'grid.nn'"):
            parse_config("grid: {nn: 32}")
        with pytest.raises(ConfigError, match="unknown key 'viscosity'"):
            parse_config("viscosity: 1.0")
        with pytest.raises(ConfigError, match="unknown key 'solver.mu'"):
            parse_config("solver: {mu: 1.0}")

    def test_syntax_error_carries_location(self):
        with pytest.raises(ConfigError, match=r"line \d+, column \d+"):
            parse_config("grid: {N: [}")

    def test_type_errors_name_paths(self):
        with pytest.raises(ConfigError, match="solver.nu must be a number"):
            parse_config("solver: {nu: fast}")
        with pytest.raises(ConfigError, match="grid.N must be an integer"):
            parse_config("grid: {N: 32.5}")
        with pytest.raises(ConfigError, match="solver.advection must be true or false"):
            parse_config("solver: {advection: 3}")

    def test_constraint_errors(self):
        with pytest.raises(ConfigError, match="solver.dt must be positive"):
            parse_config("solver: {dt: -0.1}")
        with pytest.raises(ConfigError, match="forcing.period is required"):
            parse_config("forcing: {kind: time_periodic}")
        with pytest.raises(ConfigError, match="experiment.kind"):
            parse_config("experiment: {kind: dance}")
        with pytest.raises(ConfigError, match="forcing.kind"):
            parse_config("forcing: {kind: stochastic}")

    def test_mode_validation(self):
        with pytest.raises(ConfigError, match=r"forcing.modes\[0\].k"):
            parse_config("forcing: {modes: [{k: [1, 0], amplitude_re: [1, 0, 0]}]}")
        with pytest.raises(ConfigError, match="exactly 3"):
            parse_config("forcing: {modes: [{k: [1, 0, 0], amplitude_re: [1, 0]}]}")

    def test_windowed_requires_base(self):
        with pytest.raises(ConfigError, match="forcing.base"):
            parse_config("forcing: {kind: windowed, on_time: 1.0, off_time: 1.0}")

    def test_nested_windowed_parses(self):
        cfg = parse_config(
            """
forcing:
  kind: windowed
  on_time: 0.5
  off_time: 0.5
  base:
    kind: constant
    modes:
      - {k: [0, 1, 0], amplitude_re: [1.0, 0, 0]}
"""
        )
        assert cfg.forcing.base.kind == "constant"


class TestRoundTrip:
    def test_full_round_trip_identity(self):
        cfg = parse_config(FULL)
        assert parse_config(serialize_config(cfg)) == cfg

    def test_minimal_round_trip_identity(self):
        cfg = parse_config(MINIMAL)
        assert parse_config(serialize_config(cfg)) == cfg

    @settings(max_examples=60, deadline=None)
    @given(
        n=st.sampled_from([4, 8, 16, 32, 64]),
        nu=st.floats(1e-3, 10.0, allow_nan=False),
        dt=st.floats(1e-6, 0.5, allow_nan=False),
        stride=st.integers(1, 50),
        seed=st.integers(0, 2 ** 31),
        kind=st.sampled_from(["run", "contract", "pullback", "periodic"]),
        scale=st.floats(0.0, 100.0),
        c0=st.floats(0.1, 10.0),
        starts=st.lists(st.floats(-50.0, 0.0), min_size=1, max_size=6),
    )
    def test_round_trip_property(self, n, nu, dt, stride, seed, kind, scale, c0, starts):
        from dataclasses import replace

        from periodicns.config import (
            ConstantsConfig,
            ExperimentConfig,
            ForcingConfig,
            GridConfig,
            SolverConfig,
        )

        cfg = RunConfig(
            grid=GridConfig(N=n),
            solver=SolverConfig(nu=nu, dt=dt, record_stride=stride),
            forcing=ForcingConfig(kind="constant", scale=scale),
            constants=ConstantsConfig(c0=c0),
            experiment=replace(ExperimentConfig(kind=kind), start_times=tuple(starts)),
            seed=seed,
        )
        assert parse_config(serialize_config(cfg)) == cfg


class TestDomainConstruction:
    def test_build_grid_and_stepper(self):
        cfg = parse_config(FULL)
        grid = cfg.build_grid()
        assert grid.N == 16
        stepper = cfg.build_stepper()
        assert stepper.nu == 0.8
        assert stepper.record_stride == 4

    def test_build_forcing_projected(self):
        cfg = parse_config(FULL)
        grid = cfg.build_grid()
        spec = cfg.build_forcing(grid)
        spec.sample(0.3).validate()

    def test_default_tau_is_inverse_nu_lambda1(self):
        cfg = parse_config("solver: {nu: 2.0}")
        grid = cfg.build_grid()
        assert cfg.tau(grid) == pytest.approx(0.5)
        cfg2 = parse_config("constants: {tau: 0.25}")
        assert cfg2.tau(cfg2.build_grid()) == 0.25

    def test_grashof_rescaling_through_config(self):
        cfg = parse_config(
            """
solver: {nu: 1.0}
grid: {N: 8}
forcing:
  kind: constant
  grashof: 0.022002845362012782
  modes:
    - {k: [0, 1, 0], amplitude_re: [1.0, 0, 0]}
"""
        )
        grid = cfg.build_grid()
        spec = cfg.build_forcing(grid)
        from periodicns import translational_norms

        rep = translational_norms(spec, 1.0)
        assert rep.l20 == pytest.approx(0.022002845362012782, rel=1e-9)

    def test_mode_outside_band_is_config_error(self):
        cfg = parse_config(
            "grid: {N: 8}\nforcing: {modes: [{k: [3, 0, 0], amplitude_re: [0, 1, 0]}]}"
        )
        with pytest.raises(ConfigError, match="band"):
            cfg.build_forcing(cfg.build_grid())
