"""Shared fixtures: small grids and a tiny forcing catalog."""

from __future__ import annotations

import math

import numpy as np
import pytest

from periodicns import (
    ConstantForcing,
    GridSpec,
    QuasiperiodicForcing,
    TimePeriodicForcing,
    WindowedForcing,
    build_profile,
    norm_h,
)


@pytest.fixture(scope="session")
def grid8() -> GridSpec:
    return GridSpec(N=8)


@pytest.fixture(scope="session")
def grid16() -> GridSpec:
    return GridSpec(N=16)


@pytest.fixture(scope="session")
def unit_profile8(grid8) -> "SpectralField":
    prof = build_profile(grid8, [((0, 1, 0), np.array([0.6, 0, 0.8], dtype=complex))])
    return prof * (1.0 / norm_h(prof))


@pytest.fixture(scope="session")
def forcing_catalog(grid8, unit_profile8):
    """One instance of every forcing variant, duty-cycle edges on the lattice."""
    constant = ConstantForcing(profile=unit_profile8, scale=2.0)
    periodic = TimePeriodicForcing(profile=unit_profile8, period=1.3,
                                   amplitude=0.35 * math.sqrt(2))
    quasi = QuasiperiodicForcing(
        profile_a=unit_profile8, period_a=1.0,
        profile_b=unit_profile8 * 0.5, period_b=math.sqrt(2.0),
    )
    windowed = WindowedForcing(base=constant, on_time=0.5, off_time=0.5)
    return {
        "constant": constant,
        "time_periodic": periodic,
        "quasiperiodic": quasi,
        "windowed": windowed,
    }
