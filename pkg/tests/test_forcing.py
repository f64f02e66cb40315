"""Forcing catalog: sampling, translational-bound norms, and the
window-length equivalence inequalities."""

import math

import numpy as np
import pytest

from periodicns import (
    ConstantForcing,
    TimePeriodicForcing,
    WindowedForcing,
    build_profile,
    norm_equivalence_check,
    norm_h,
    norm_vprime,
    sample,
    scale_to_grashof,
    translational_norms,
    with_scale,
    zero_field,
)
from periodicns.analysis import grashof_bound


def _brute_force_l20(spec, tau, n_points=10_000, starts=None):
    """Independent quadrature oracle: sample g as a full field and integrate
    |g|^2 by trapezoid at n_points per window."""
    if starts is None:
        starts = np.linspace(0.0, 2.0, 41)
    best = 0.0
    for s in starts:
        ts = np.linspace(s, s + tau, n_points + 1)
        vals = np.array([norm_h(sample(spec, float(t))) ** 2 for t in ts])
        best = max(best, np.trapezoid(vals, ts) / tau)
    return math.sqrt(best)


class TestSampling:
    def test_constant_returns_profile(self, forcing_catalog):
        fc = forcing_catalog["constant"]
        for t in (0.0, 1.7, -3.2):
            assert np.array_equal(sample(fc, t).coeffs, (fc.profile * fc.scale).coeffs)

    def test_periodic_exact_periodicity(self, grid8, unit_profile8):
        # integer and dyadic periods shift with no rounding at all, so the
        # period-shifted samples must be bitwise identical
        fp1 = TimePeriodicForcing(profile=unit_profile8, period=1.0, amplitude=0.7)
        assert np.array_equal(sample(fp1, 0.0).coeffs, sample(fp1, 7.0).coeffs)
        fp2 = TimePeriodicForcing(profile=unit_profile8, period=0.5, amplitude=0.7,
                                  phase=0.3)
        assert np.array_equal(sample(fp2, 0.25).coeffs,
                              sample(fp2, 0.25 + 2048 * 0.5).coeffs)

    def test_periodic_no_accumulated_phase_drift(self, forcing_catalog):
        # non-representable period: reduction happens in one exact fmod, so
        # the only error is the rounding of the time argument itself and it
        # never grows beyond d(env)/dt * ulp(t)
        fp = forcing_catalog["time_periodic"]
        rho = fp.period
        base = fp.envelope(0.3)
        for k in (4, 4096, 2 ** 30):
            t = 0.3 + k * rho
            shifted = fp.envelope(t)
            slope = abs(fp.amplitude) * 2 * np.pi / rho
            budget = slope * (np.spacing(t) + np.spacing(k * rho)) * 4 + 1e-15
            assert abs(shifted - base) <= budget

    def test_windowed_off_phase_is_zero(self, grid8, unit_profile8):
        w = WindowedForcing(base=ConstantForcing(profile=unit_profile8), on_time=0.5,
                            off_time=0.5)
        assert np.array_equal(sample(w, 0.75).coeffs, zero_field(grid8).coeffs)
        assert norm_h(sample(w, 0.25)) > 0

    @pytest.mark.parametrize("t", [0.0, 0.37, 5.2, -1.4])
    def test_all_samples_satisfy_invariants(self, forcing_catalog, t):
        for spec in forcing_catalog.values():
            sample(spec, t).validate()


class TestTranslationalNorms:
    def test_constant_any_tau(self, forcing_catalog):
        fc = forcing_catalog["constant"]
        a = fc.scale * norm_h(fc.profile)
        for tau in (0.25, 1.0, 3.0):
            rep = translational_norms(fc, tau)
            assert rep.l20 == pytest.approx(a, rel=1e-12)
            assert rep.sup_exact

    def test_periodic_full_window_example(self, grid8, unit_profile8):
        # g = a sqrt(2) cos(2 pi t / rho) phi with |phi| = 1 and tau = rho: l20 = a
        a, rho = 0.35, 1.3
        fp = TimePeriodicForcing(profile=unit_profile8, period=rho,
                                 amplitude=a * math.sqrt(2))
        rep = translational_norms(fp, tau=rho)
        assert rep.l20 == pytest.approx(a, rel=1e-12)
        # independent field-sampling quadrature oracle at 1e4 points
        assert rep.l20 == pytest.approx(_brute_force_l20(fp, rho), rel=1e-7)

    def test_zero_forcing(self, grid8):
        z = ConstantForcing(profile=zero_field(grid8))
        rep = translational_norms(z, 1.0)
        assert rep.l20 == 0.0 and rep.l2b == 0.0

    def test_poincare_between_norms(self, forcing_catalog, grid8):
        lam = grid8.lambda1
        for spec in forcing_catalog.values():
            for tau in (0.5, 1.0):
                rep = translational_norms(spec, tau)
                assert rep.l2b <= rep.l20 / math.sqrt(lam) * (1 + 1e-9) + 1e-300

    def test_scaling_multiplicative(self, forcing_catalog):
        for spec in forcing_catalog.values():
            base = translational_norms(spec, 1.0)
            doubled = translational_norms(with_scale(spec, 2.0), 1.0)
            assert doubled.l20 == 2.0 * base.l20
            assert doubled.l2b == 2.0 * base.l2b

    def test_scanned_sup_is_labeled(self, forcing_catalog):
        assert not translational_norms(forcing_catalog["quasiperiodic"], 1.0).sup_exact
        assert translational_norms(forcing_catalog["windowed"], 1.0).sup_exact

    def test_vprime_norm_consistency(self, grid8, unit_profile8):
        fc = ConstantForcing(profile=unit_profile8, scale=1.5)
        rep = translational_norms(fc, 1.0)
        assert rep.l2b == pytest.approx(1.5 * norm_vprime(unit_profile8), rel=1e-12)

    def test_rejects_bad_tau(self, forcing_catalog):
        with pytest.raises(ValueError):
            translational_norms(forcing_catalog["constant"], 0.0)


class TestNormEquivalence:
    @pytest.mark.parametrize("tau,rho", [(1.0, 1.0), (1.0, 2.0), (0.5, 2.0)])
    def test_catalog(self, forcing_catalog, tau, rho):
        for name, spec in forcing_catalog.items():
            rep = norm_equivalence_check(spec, tau, rho)
            assert rep.passed, (name, tau, rho, rep)

    def test_constant_inequality_chain(self, forcing_catalog):
        rep = norm_equivalence_check(forcing_catalog["constant"], 0.7, 2.1)
        assert rep.lhs == pytest.approx(rep.mid * 0.7 / 2.1, rel=1e-9)
        assert rep.mid == pytest.approx(rep.rhs * 2.1 / (rep.n_cover * 0.7), rel=1e-9)

    def test_equal_windows_degenerate(self, forcing_catalog):
        rep = norm_equivalence_check(forcing_catalog["time_periodic"], 1.3, 1.3)
        assert rep.n_cover == 1
        assert rep.lhs == pytest.approx(rep.mid, rel=1e-12)
        assert rep.rhs == pytest.approx(rep.mid, rel=1e-12)

    def test_half_period_window(self, grid8, unit_profile8):
        rho = 1.3
        fp = TimePeriodicForcing(profile=unit_profile8, period=rho,
                                 amplitude=0.35 * math.sqrt(2))
        assert norm_equivalence_check(fp, rho / 2, rho).passed

    def test_rejects_tau_above_rho(self, forcing_catalog):
        with pytest.raises(ValueError):
            norm_equivalence_check(forcing_catalog["constant"], 2.0, 1.0)


class TestGrashofScaling:
    def test_hits_target(self, forcing_catalog):
        target = 0.1 * grashof_bound(1.0)
        for name in ("constant", "time_periodic"):
            scaled = scale_to_grashof(forcing_catalog[name], target, nu=1.0)
            rep = translational_norms(scaled, 1.0)
            assert rep.l20 == pytest.approx(target, rel=1e-9), name

    def test_zero_forcing_rejected(self, grid8):
        z = ConstantForcing(profile=zero_field(grid8))
        with pytest.raises(ValueError, match="zero forcing"):
            scale_to_grashof(z, 0.1, nu=1.0)


class TestProfileBuilder:
    def test_rejects_zero_mode(self, grid8):
        with pytest.raises(ValueError, match="zero-mean"):
            build_profile(grid8, [((0, 0, 0), np.array([1.0, 0, 0], dtype=complex))])

    def test_rejects_out_of_band(self, grid8):
        with pytest.raises(ValueError, match="band"):
            build_profile(grid8, [((3, 0, 0), np.array([0, 1.0, 0], dtype=complex))])

    def test_rejects_duplicates(self, grid8):
        mode = ((1, 0, 0), np.array([0, 1.0, 0], dtype=complex))
        conj = ((-1, 0, 0), np.array([0, 1.0, 0], dtype=complex))
        with pytest.raises(ValueError, match="duplicates"):
            build_profile(grid8, [mode, conj])

    def test_result_is_valid_field(self, grid8):
        prof = build_profile(
            grid8,
            [((1, 0, 0), np.array([0, 1.0, 0.5j], dtype=complex)),
             ((0, 1, 1), np.array([1.0, 0, 0], dtype=complex)),
             ((1, -2, 0), np.array([0.1, 0.2, 0.3], dtype=complex))],
        )
        prof.validate()
        assert norm_h(prof) > 0

    def test_negative_k3_mode_canonicalized(self, grid8):
        a = build_profile(grid8, [((1, 0, -1), np.array([0.5, 1.0, 0.5], dtype=complex))])
        b = build_profile(grid8, [((-1, 0, 1), np.conj(np.array([0.5, 1.0, 0.5], dtype=complex)))])
        assert np.array_equal(a.coeffs, b.coeffs)
