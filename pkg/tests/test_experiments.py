"""Experiment drivers at desk-miniature scale (N=8/16, short spans).
The full-scale versions live in the acceptance suite."""

import math

import numpy as np
import pytest

from periodicns import (
    ConstantForcing,
    StepperConfig,
    TimePeriodicForcing,
    build_profile,
    norm_h,
    run_audits,
    run_contraction,
    run_periodic,
    run_pullback,
    scale_to_grashof,
)
from periodicns.analysis import grashof_bound


@pytest.fixture(scope="module")
def small_g_forcing(grid16):
    prof = build_profile(grid16, [((0, 1, 1), np.array([0.3, 0.1, -0.1], dtype=complex))])
    fp = TimePeriodicForcing(profile=prof * (1 / norm_h(prof)), period=1.0,
                             amplitude=math.sqrt(2))
    return scale_to_grashof(fp, 0.1 * grashof_bound(1.0), nu=1.0)


@pytest.fixture(scope="module")
def quick_config():
    return StepperConfig(nu=1.0, dt=2e-3, record_stride=5)


class TestRunAudits:
    def test_unforced_random_data_all_pass(self, grid16):
        config = StepperConfig(nu=1.0, dt=1e-3, record_stride=1)
        rep = run_audits(grid16, config, None, t_end=2.0, seed=3, initial_energy=1.0)
        assert rep.all_passed
        names = [a.name for a in rep.audits]
        assert names[:3] == ["energy_balance", "absorbing_inequality", "enstrophy_windows"]
        assert "gradient_bound" in names

    def test_stokes_only_machine_precision(self, grid16):
        config = StepperConfig(nu=1.0, dt=1e-3, record_stride=1, advection=False)
        rep = run_audits(grid16, config, None, t_end=1.0, seed=3, initial_energy=1.0)
        eb = rep.audit("energy_balance")
        assert abs(eb.detail["relative_residual"]) <= 1e-12

    def test_forced_small_g_run(self, grid16, small_g_forcing):
        config = StepperConfig(nu=1.0, dt=1e-3, record_stride=1)
        rep = run_audits(grid16, config, small_g_forcing, t_end=4.0, seed=5,
                         initial_energy=0.0, n_windows=3)
        assert rep.all_passed
        windows = rep.audit("enstrophy_windows").detail["windows"]
        assert len(windows) == 3

    def test_series_columns_populated(self, grid16, small_g_forcing, quick_config):
        rep = run_audits(grid16, quick_config, small_g_forcing, t_end=0.2, transient=0.0)
        s = rep.series
        n = len(s.times)
        assert n > 2
        assert len(s.energy) == len(s.enstrophy) == len(s.vprime_sq) == n
        assert len(s.g_sq) == len(s.g_dot_u) == n
        assert all(b > a for a, b in zip(s.times, s.times[1:]))


class TestContraction:
    def test_equal_seeds_identically_zero(self, grid16, small_g_forcing, quick_config):
        rep = run_contraction(grid16, quick_config, small_g_forcing, 7, 7, t_end=0.3)
        assert np.all(rep.wsq == 0.0)
        assert np.all(rep.dw == 0.0)
        assert rep.fit is None
        assert rep.envelope_ok and rep.monotone

    def test_unforced_two_trajectories(self, grid16):
        config = StepperConfig(nu=1.0, dt=2e-3, record_stride=5)
        rep = run_contraction(grid16, config, None, 1, 2, t_end=6.0,
                              initial_energy=1.0, fit_window=(3.0, 6.0))
        # late-time difference is lowest-mode dominated: |w|^2 decays at 2 nu lambda1
        assert rep.fit.rate >= 2.0 * 0.999
        assert rep.monotone
        assert rep.envelope_ok
        assert np.all(np.diff(rep.times) > 0)

    def test_forced_small_g_contracts(self, grid16, small_g_forcing, quick_config):
        rep = run_contraction(grid16, quick_config, small_g_forcing, 1, 2, t_end=4.0)
        assert rep.monotone
        assert rep.envelope_ok
        assert rep.wsq[-1] < rep.wsq[0]
        assert rep.dw[-1] < rep.dw[0]
        assert rep.predicted_M == pytest.approx(rep.constants.M)

    def test_large_forcing_rejected(self, grid16):
        prof = build_profile(grid16, [((0, 1, 0), np.array([1.0, 0, 0], dtype=complex))])
        big = ConstantForcing(profile=prof, scale=50.0)
        with pytest.raises(ValueError, match="smallness"):
            run_contraction(grid16, StepperConfig(nu=1.0, dt=1e-3), big, 1, 2, 1.0)


class TestPullback:
    def test_single_member_zero_diameters(self, grid16, small_g_forcing, quick_config):
        rep = run_pullback(grid16, quick_config, small_g_forcing, [-0.5], [4], 0.0)
        assert rep.ds_diameters == (0.0,)
        assert rep.dw_diameters == (0.0,)

    def test_start_at_t_star_keeps_initial_diameter(self, grid16, small_g_forcing,
                                                    quick_config):
        rep = run_pullback(grid16, quick_config, small_g_forcing, [0.0], [4, 5], 0.0)
        assert rep.ds_diameters[0] == pytest.approx(rep.d0)

    def test_earlier_starts_shrink(self, grid16, small_g_forcing, quick_config):
        rep = run_pullback(grid16, quick_config, small_g_forcing,
                           [-0.5, -1.0, -2.0], [4, 5, 6], 0.0)
        d = rep.ds_diameters
        assert d[0] > d[1] > d[2]
        assert rep.monotone
        assert max(rep.envelope_ratio) < 1.2
        assert rep.max_pair_sq == tuple(x * x for x in d)

    def test_start_after_t_star_rejected(self, grid16, small_g_forcing, quick_config):
        with pytest.raises(ValueError, match="start times"):
            run_pullback(grid16, quick_config, small_g_forcing, [1.0], [4], 0.0)

    def test_determinism(self, grid16, small_g_forcing, quick_config):
        a = run_pullback(grid16, quick_config, small_g_forcing, [-0.5], [4, 5], 0.0)
        b = run_pullback(grid16, quick_config, small_g_forcing, [-0.5], [4, 5], 0.0)
        assert a.ds_diameters == b.ds_diameters
        assert a.dw_diameters == b.dw_diameters


class TestPeriodic:
    def test_unforced_zero_solution(self, grid16):
        # zero forcing: the zero trajectory is the periodic orbit for any rho
        from periodicns import zero_field

        z = ConstantForcing(profile=zero_field(grid16))
        config = StepperConfig(nu=1.0, dt=2e-3, record_stride=5)
        rep = run_periodic(grid16, config, z, transient=1.0, n_periods=2, rho=0.5,
                           seed=1, initial_energy=0.0)
        assert rep.final_mismatch == 0.0
        # decaying data approach the zero orbit: mismatch shrinks monotonically
        rep2 = run_periodic(grid16, config, z, transient=1.0, n_periods=4, rho=0.5,
                            seed=1, initial_energy=0.5)
        assert rep2.monotone
        assert rep2.final_mismatch < rep2.mismatch[0]

    def test_forced_converges_to_periodic_orbit(self, grid16, small_g_forcing,
                                                quick_config):
        m = 1.0  # close to nu lambda1 at this tiny G
        rep = run_periodic(grid16, quick_config, small_g_forcing,
                           transient=6.0 / m, n_periods=2)
        assert rep.final_mismatch <= 1e-5
        assert rep.monotone
        assert rep.rho == pytest.approx(1.0)

    def test_constant_forcing_any_rho(self, grid16, small_g_forcing, quick_config):
        fc = ConstantForcing(profile=small_g_forcing.profile,
                             scale=small_g_forcing.scale)
        rep = run_periodic(grid16, quick_config, fc, transient=6.0, n_periods=2,
                           rho=0.77)
        assert rep.final_mismatch <= 1e-5

    def test_rho_mismatch_rejected(self, grid16, small_g_forcing, quick_config):
        with pytest.raises(ValueError, match="rho"):
            run_periodic(grid16, quick_config, small_g_forcing, 1.0, 1, rho=2.0)

    def test_constant_without_rho_rejected(self, grid16, small_g_forcing, quick_config):
        fc = ConstantForcing(profile=small_g_forcing.profile)
        with pytest.raises(ValueError, match="rho"):
            run_periodic(grid16, quick_config, fc, 1.0, 1)
