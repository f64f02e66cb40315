"""Time integration: viscous exactness, invariant preservation, landing on
t_end, compositionality, the CFL advisory and blowup signalling."""

import numpy as np
import pytest

from periodicns import (
    BlowupError,
    ConstantForcing,
    GridSpec,
    SpectralField,
    StepperConfig,
    TrajectoryState,
    cfl_advisory,
    integrate,
    norm_h,
    random_divfree,
    step,
    zero_field,
)


def _single_mode_state(grid, amplitude=0.5):
    c = np.zeros(grid.spectral_shape, dtype=complex)
    c[1, 1, 0, 0] = amplitude
    c[1, -1, 0, 0] = amplitude
    return TrajectoryState(0.0, SpectralField(grid, c))


class TestStepperConfig:
    def test_rejects_zero_nu_without_audit_mode(self):
        with pytest.raises(ValueError, match="inviscid"):
            StepperConfig(nu=0.0, dt=1e-3)
        StepperConfig(nu=0.0, dt=1e-3, inviscid_audit=True)

    def test_rejects_bad_dt_and_scheme(self):
        with pytest.raises(ValueError, match="dt"):
            StepperConfig(nu=1.0, dt=0.0)
        with pytest.raises(ValueError, match="scheme"):
            StepperConfig(nu=1.0, dt=1e-3, scheme="euler")


class TestViscousExactness:
    def test_single_mode_heat_decay(self, grid8):
        # B disabled, g = 0: one unit of time decays |k| = 1 by e^-nu
        state = _single_mode_state(grid8)
        config = StepperConfig(nu=1.0, dt=0.02, advection=False,
                               record_stride=10 ** 9, validate_records=False)
        final = integrate(state, config, None, 1.0)
        got = final.u.coeffs[1, 1, 0, 0]
        expected = 0.5 * np.exp(-1.0)
        assert abs(got - expected) / expected < 1e-13

    def test_every_mode_matches_analytic_decay(self, grid8):
        u0 = random_divfree(grid8, 7, 1.0)
        config = StepperConfig(nu=0.7, dt=0.02, advection=False,
                               record_stride=10 ** 9, validate_records=False)
        samples = []
        config_rec = StepperConfig(nu=0.7, dt=0.02, advection=False, record_stride=10)
        integrate(TrajectoryState(0.0, u0), config_rec, None, 1.0,
                  observers=(lambda s: samples.append(s),))
        for s in samples:
            decay = np.exp(-0.7 * grid8.ksq_int * grid8.lambda1 * s.t)
            expected = u0.coeffs * decay
            sel = np.abs(expected) > 1e-300
            rel = np.abs(s.u.coeffs - expected)[sel] / np.abs(expected)[sel]
            assert rel.max() < 1e-13

    def test_zero_state_stays_zero(self, grid8):
        config = StepperConfig(nu=1.0, dt=1e-2)
        final = integrate(TrajectoryState(0.0, zero_field(grid8)), config, None, 0.3)
        assert np.all(final.u.coeffs == 0)


class TestIntegrate:
    def test_identity_when_t_end_equals_t(self, grid8):
        state = TrajectoryState(0.25, random_divfree(grid8, 0, 1.0))
        config = StepperConfig(nu=1.0, dt=1e-2)
        seen = []
        final = integrate(state, config, None, 0.25, observers=(lambda s: seen.append(s.t),))
        assert final.t == 0.25
        assert np.array_equal(final.u.coeffs, state.u.coeffs)
        assert seen == [0.25]  # exactly one record, no duplicate

    def test_rejects_backwards_time(self, grid8):
        state = TrajectoryState(1.0, random_divfree(grid8, 0, 1.0))
        with pytest.raises(ValueError, match="precede"):
            integrate(state, StepperConfig(nu=1.0, dt=1e-2), None, 0.5)

    def test_lands_exactly_on_t_end(self, grid8):
        state = TrajectoryState(0.0, random_divfree(grid8, 1, 1.0))
        config = StepperConfig(nu=1.0, dt=1e-3, record_stride=10 ** 9,
                               validate_records=False)
        final = integrate(state, config, None, 0.4567)  # not a step multiple
        assert final.t == 0.4567

    def test_split_equals_full_on_step_boundary(self, grid8, forcing_catalog):
        # dyadic dt makes accumulated times exact, so the split is bitwise
        fp = forcing_catalog["time_periodic"]
        u0 = random_divfree(grid8, 9, 1.0)
        config = StepperConfig(nu=1.0, dt=1.0 / 1024, record_stride=10 ** 9,
                               validate_records=False)
        full = integrate(TrajectoryState(0.0, u0), config, fp, 1.0)
        mid = integrate(TrajectoryState(0.0, u0), config, fp, 0.5)
        resumed = integrate(mid, config, fp, 1.0)
        assert resumed.t == full.t
        assert np.array_equal(resumed.u.coeffs, full.u.coeffs)

    def test_observer_cadence(self, grid8):
        state = TrajectoryState(0.0, random_divfree(grid8, 0, 1.0))
        config = StepperConfig(nu=1.0, dt=0.01, record_stride=5, validate_records=False)
        times = []
        integrate(state, config, None, 0.2, observers=(lambda s: times.append(s.t),))
        assert times[0] == 0.0
        assert times[-1] == pytest.approx(0.2)
        assert len(times) == 5  # t=0, 0.05, 0.10, 0.15, 0.2
        assert all(b > a for a, b in zip(times, times[1:]))

    def test_invariants_preserved_at_records(self, grid8, forcing_catalog):
        # validate_records raises on any broken invariant at each record
        state = TrajectoryState(0.0, random_divfree(grid8, 4, 1.0))
        config = StepperConfig(nu=1.0, dt=1e-2, record_stride=10)
        integrate(state, config, forcing_catalog["time_periodic"], 0.5)

    def test_unforced_energy_nonincreasing(self, grid16):
        state = TrajectoryState(0.0, random_divfree(grid16, 2, 1.0))
        config = StepperConfig(nu=1.0, dt=1e-2, record_stride=1)
        energies = []
        integrate(state, config, None, 0.5,
                  observers=(lambda s: energies.append(norm_h(s.u) ** 2),))
        e = np.array(energies)
        assert np.all(np.diff(e) <= 1e-12 * e[0])

    def test_single_step_matches_integrate(self, grid8):
        config = StepperConfig(nu=1.0, dt=0.01, validate_records=False,
                               record_stride=10 ** 9)
        state = TrajectoryState(0.0, random_divfree(grid8, 3, 1.0))
        one = step(state, config, None)
        via_integrate = integrate(state, config, None, 0.01)
        assert np.array_equal(one.u.coeffs, via_integrate.u.coeffs)


class TestInviscidAudit:
    def test_energy_drift_small_and_fourth_order(self, grid16):
        # energetic field so the RK4 truncation error sits above roundoff
        u0 = random_divfree(grid16, 11, 2000.0)
        e0 = norm_h(u0) ** 2
        drifts = []
        for dt in (2e-3, 1e-3):
            config = StepperConfig(nu=0.0, dt=dt, inviscid_audit=True,
                                   record_stride=10 ** 9, validate_records=False)
            final = integrate(TrajectoryState(0.0, u0), config, None, 0.5)
            drifts.append(abs(norm_h(final.u) ** 2 - e0) / e0)
        assert drifts[1] <= 1e-8
        assert drifts[0] / drifts[1] >= 8.0


class TestCflAdvisory:
    def test_zero_field(self, grid8):
        config = StepperConfig(nu=1.0, dt=1e-2)
        assert cfl_advisory(TrajectoryState(0.0, zero_field(grid8)), config) == 0.0

    def test_proportional_to_amplitude(self, grid8):
        config = StepperConfig(nu=1.0, dt=1e-2)
        a = cfl_advisory(_single_mode_state(grid8, 0.5), config)
        b = cfl_advisory(_single_mode_state(grid8, 1.0), config)
        assert b == pytest.approx(2 * a, rel=1e-12)

    def test_matches_direct_evaluation(self, grid8):
        u = random_divfree(grid8, 6, 2.0)
        config = StepperConfig(nu=1.0, dt=3e-3)
        phys = u.to_physical()
        expected = np.sqrt((phys ** 2).sum(axis=0)).max() * 3e-3 * grid8.N / grid8.L
        got = cfl_advisory(TrajectoryState(0.0, u), config)
        assert got == pytest.approx(expected, rel=1e-12)


class TestBlowup:
    def test_nonfinite_coefficients_raise_with_time(self, grid8):
        # a grossly over-amplified field at dt far beyond stability blows up
        u0 = random_divfree(grid8, 0, 1e8)
        config = StepperConfig(nu=1e-6, dt=0.5, record_stride=10 ** 9,
                               validate_records=False)
        with pytest.raises(BlowupError) as err:
            integrate(TrajectoryState(0.0, u0), config, None, 50.0)
        assert err.value.t > 0.0

    def test_forced_blowup_reports_exit_time(self, grid8, unit_profile8):
        forcing = ConstantForcing(profile=unit_profile8, scale=1e12)
        u0 = random_divfree(grid8, 0, 1e10)
        config = StepperConfig(nu=1e-9, dt=1.0, record_stride=10 ** 9,
                               validate_records=False)
        with pytest.raises(BlowupError):
            integrate(TrajectoryState(0.0, u0), config, forcing, 100.0)
