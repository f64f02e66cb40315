"""Built-in numerical self-checks: oracle equivalence of the advection term,
skew-symmetry, exactness of the viscous propagator, and the inviscid
energy-drift order check. Small grids, runs in well under a minute."""

from __future__ import annotations

import numpy as np

from .field import random_divfree
from .grid import GridSpec
from .operators import (
    bilinear_term,
    bilinear_term_direct,
    inner_product_l2,
    norm_h,
    norm_v,
)
from .stepper import StepperConfig, TrajectoryState, integrate

Result = tuple[str, bool, float, float]


def _oracle_equivalence(n_seeds: int = 20) -> Result:
    grid = GridSpec(N=8)
    worst = 0.0
    for seed in range(n_seeds):
        u = random_divfree(grid, seed, 1.0)
        v = random_divfree(grid, 1000 + seed, 1.0)
        fast = bilinear_term(u, v)
        exact = bilinear_term_direct(u, v)
        err = norm_h(fast - exact) / max(norm_h(exact), 1e-300)
        worst = max(worst, err)
    return ("oracle_equivalence", worst <= 1e-10, worst, 1e-10)


def _skew_symmetry(n_triples: int = 30) -> Result:
    grid = GridSpec(N=8)
    worst = 0.0
    for seed in range(n_triples):
        u = random_divfree(grid, 10 * seed, 1.0)
        v = random_divfree(grid, 10 * seed + 1, 1.0)
        w = random_divfree(grid, 10 * seed + 2, 1.0)
        resid = abs(
            inner_product_l2(bilinear_term(u, v), w)
            + inner_product_l2(bilinear_term(u, w), v)
        )
        scale = norm_v(u) * norm_v(v) * norm_v(w)
        worst = max(worst, resid / max(scale, 1e-300))
    return ("skew_symmetry", worst <= 1e-12, worst, 1e-12)


def _stokes_exactness() -> Result:
    grid = GridSpec(N=8)
    u0 = random_divfree(grid, 7, 1.0)
    config = StepperConfig(nu=1.0, dt=0.02, advection=False, record_stride=10 ** 9,
                           validate_records=False)
    final = integrate(TrajectoryState(0.0, u0), config, None, 1.0)
    decay = np.exp(-config.nu * grid.ksq_int * grid.lambda1 * 1.0)
    expected = u0.coeffs * decay
    got = final.u.coeffs
    denom = np.abs(expected)
    sel = denom > 1e-300
    worst = float(np.max(np.abs(got - expected)[sel] / denom[sel])) if sel.any() else 0.0
    return ("stokes_exactness", worst <= 1e-13, worst, 1e-13)


def _inviscid_drift() -> Result:
    # energetic N=16 field: the measured drift sits above roundoff, so this
    # actually exercises the scheme rather than the noise floor
    grid = GridSpec(N=16)
    u0 = random_divfree(grid, 11, 2000.0)
    config = StepperConfig(nu=0.0, dt=1e-3, inviscid_audit=True,
                           record_stride=10 ** 9, validate_records=False)
    e0 = norm_h(u0) ** 2
    final = integrate(TrajectoryState(0.0, u0), config, None, 0.5)
    drift = abs(norm_h(final.u) ** 2 - e0) / e0
    return ("inviscid_energy_drift", drift <= 1e-8, drift, 1e-8)


def run_selftest() -> list[Result]:
    return [
        _oracle_equivalence(),
        _skew_symmetry(),
        _stokes_exactness(),
        _inviscid_drift(),
    ]
