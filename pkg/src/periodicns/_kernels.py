"""Fused per-lattice-point kernels for the hot stepping path.

Every kernel has a pure-numpy twin (suffix _np) used when numba is missing
and in tests that pin the two paths against each other. All kernels are
elementwise over distinct output slots, so parallel execution stays
deterministic.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def deco(fn):
            return fn

        return deco

    prange = range


# --------------------------------------------------------------------------
# velocity-product assembly: the 6 unique entries of u_i u_j
# --------------------------------------------------------------------------

def products_np(phys: np.ndarray, out: np.ndarray) -> None:
    pairs = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
    for m, (a, b) in enumerate(pairs):
        np.multiply(phys[:, a], phys[:, b], out=out[:, m])


@njit(parallel=True, cache=True)
def _products_nb(phys, out):  # pragma: no cover - exercised via products()
    nb, _, n1, n2, n3 = phys.shape
    for b in prange(nb):
        for x in range(n1):
            for y in range(n2):
                for z in range(n3):
                    u0 = phys[b, 0, x, y, z]
                    u1 = phys[b, 1, x, y, z]
                    u2 = phys[b, 2, x, y, z]
                    out[b, 0, x, y, z] = u0 * u0
                    out[b, 1, x, y, z] = u0 * u1
                    out[b, 2, x, y, z] = u0 * u2
                    out[b, 3, x, y, z] = u1 * u1
                    out[b, 4, x, y, z] = u1 * u2
                    out[b, 5, x, y, z] = u2 * u2


def products(phys: np.ndarray, out: np.ndarray) -> None:
    """out[:, m] = phys[:, a_m] * phys[:, b_m] over the 6 symmetric pairs."""
    if HAVE_NUMBA:
        _products_nb(phys, out)
    else:
        products_np(phys, out)


# --------------------------------------------------------------------------
# divergence-form rows + dealias/scale + Leray projection + negation
# --------------------------------------------------------------------------

def rows_project_np(t_hat, k, inv_ksq, scale, out) -> None:
    k0, k1, k2 = k[0], k[1], k[2]
    r0 = (k0 * t_hat[:, 0] + k1 * t_hat[:, 1] + k2 * t_hat[:, 2]) * (1j * scale)
    r1 = (k0 * t_hat[:, 1] + k1 * t_hat[:, 3] + k2 * t_hat[:, 4]) * (1j * scale)
    r2 = (k0 * t_hat[:, 2] + k1 * t_hat[:, 4] + k2 * t_hat[:, 5]) * (1j * scale)
    s = (k0 * r0 + k1 * r1 + k2 * r2) * inv_ksq
    out[:, 0] = k0 * s - r0
    out[:, 1] = k1 * s - r1
    out[:, 2] = k2 * s - r2


@njit(parallel=True, cache=True)
def _rows_project_nb(t_hat, k0, k1, k2, inv_ksq, scale, out):  # pragma: no cover
    nb, _, n1, n2, n3 = t_hat.shape
    for b in prange(nb):
        for x in range(n1):
            for y in range(n2):
                for z in range(n3):
                    a0 = k0[x, y, z]
                    a1 = k1[x, y, z]
                    a2 = k2[x, y, z]
                    f = 1j * scale[x, y, z]
                    r0 = (a0 * t_hat[b, 0, x, y, z] + a1 * t_hat[b, 1, x, y, z]
                          + a2 * t_hat[b, 2, x, y, z]) * f
                    r1 = (a0 * t_hat[b, 1, x, y, z] + a1 * t_hat[b, 3, x, y, z]
                          + a2 * t_hat[b, 4, x, y, z]) * f
                    r2 = (a0 * t_hat[b, 2, x, y, z] + a1 * t_hat[b, 4, x, y, z]
                          + a2 * t_hat[b, 5, x, y, z]) * f
                    s = (a0 * r0 + a1 * r1 + a2 * r2) * inv_ksq[x, y, z]
                    out[b, 0, x, y, z] = a0 * s - r0
                    out[b, 1, x, y, z] = a1 * s - r1
                    out[b, 2, x, y, z] = a2 * s - r2


def rows_project(t_hat, k, inv_ksq, scale, out) -> None:
    """
    out = -P(i scale k_j T_{ij}): contract the symmetric product tensor with
    the wavevector, apply the (dealias x normalization) scale, Leray-project,
    and negate, all in one pass.
    """
    if HAVE_NUMBA:
        _rows_project_nb(t_hat, k[0], k[1], k[2], inv_ksq, scale, out)
    else:
        rows_project_np(t_hat, k, inv_ksq, scale, out)


# --------------------------------------------------------------------------
# RK4 stage assembly and final combination (+ projection)
# --------------------------------------------------------------------------

def stage_np(c, x, f, g, out) -> None:
    np.multiply(x, g, out=out)
    out += f * c


@njit(parallel=True, cache=True)
def _stage_nb(c, x, f, g, out):  # pragma: no cover
    nb, nc, n1, n2, n3 = c.shape
    for b in prange(nb):
        for i in range(nc):
            for xx in range(n1):
                for y in range(n2):
                    for z in range(n3):
                        out[b, i, xx, y, z] = (f[xx, y, z] * c[b, i, xx, y, z]
                                               + g[xx, y, z] * x[b, i, xx, y, z])


def stage(c, x, f, g, out) -> None:
    """out = f * c + g * x with (N, N, Nh) factor arrays broadcast."""
    if HAVE_NUMBA:
        _stage_nb(c, x, f, g, out)
    else:
        stage_np(c, x, f, g, out)


def combine_np(c, a, b, cc, d, e, e2, h, k, inv_ksq, out) -> None:
    r = e2 * c + (h / 6.0) * (e2 * a + 2.0 * e * (b + cc) + d)
    k0, k1, k2 = k[0], k[1], k[2]
    s = (k0 * r[:, 0] + k1 * r[:, 1] + k2 * r[:, 2]) * inv_ksq
    out[:, 0] = r[:, 0] - k0 * s
    out[:, 1] = r[:, 1] - k1 * s
    out[:, 2] = r[:, 2] - k2 * s


@njit(parallel=True, cache=True)
def _combine_nb(c, a, b, cc, d, e, e2, h, k0, k1, k2, inv_ksq, out):  # pragma: no cover
    nb, _, n1, n2, n3 = c.shape
    h6 = h / 6.0
    for bb in prange(nb):
        for x in range(n1):
            for y in range(n2):
                for z in range(n3):
                    ee = e[x, y, z]
                    ee2 = e2[x, y, z]
                    r0 = ee2 * c[bb, 0, x, y, z] + h6 * (
                        ee2 * a[bb, 0, x, y, z]
                        + 2.0 * ee * (b[bb, 0, x, y, z] + cc[bb, 0, x, y, z])
                        + d[bb, 0, x, y, z])
                    r1 = ee2 * c[bb, 1, x, y, z] + h6 * (
                        ee2 * a[bb, 1, x, y, z]
                        + 2.0 * ee * (b[bb, 1, x, y, z] + cc[bb, 1, x, y, z])
                        + d[bb, 1, x, y, z])
                    r2 = ee2 * c[bb, 2, x, y, z] + h6 * (
                        ee2 * a[bb, 2, x, y, z]
                        + 2.0 * ee * (b[bb, 2, x, y, z] + cc[bb, 2, x, y, z])
                        + d[bb, 2, x, y, z])
                    a0 = k0[x, y, z]
                    a1 = k1[x, y, z]
                    a2 = k2[x, y, z]
                    s = (a0 * r0 + a1 * r1 + a2 * r2) * inv_ksq[x, y, z]
                    out[bb, 0, x, y, z] = r0 - a0 * s
                    out[bb, 1, x, y, z] = r1 - a1 * s
                    out[bb, 2, x, y, z] = r2 - a2 * s


def combine(c, a, b, cc, d, e, e2, h, k, inv_ksq, out) -> None:
    """Final RK4 combination followed by re-projection, in one pass."""
    if HAVE_NUMBA:
        _combine_nb(c, a, b, cc, d, e, e2, h, k[0], k[1], k[2], inv_ksq, out)
    else:
        combine_np(c, a, b, cc, d, e, e2, h, k, inv_ksq, out)
