"""Spatial operators in Fourier space: projection, Stokes powers, advection, norms."""

from __future__ import annotations

import functools

import numpy as np

from .field import (
    FieldInvariantError,
    SpectralField,
    irfftn_raw,
    rfftn_raw,
    symmetrize_rfft_planes,
)
from .grid import GridSpec

STOKES_POWERS = (-1.0, -0.5, 0.5, 1.0)


# --------------------------------------------------------------------------
# Leray projection
# --------------------------------------------------------------------------

def leray_project_coeffs(coeffs: np.ndarray, grid: GridSpec, in_place: bool = False) -> np.ndarray:
    """
    Remove the gradient part mode by mode: c_k - k (k.c_k)/|k|^2.
    Accepts leading batch axes before the trailing (3, N, N, N//2+1).
    """
    k = grid.k_int
    s = np.einsum("ixyz,...ixyz->...xyz", k, coeffs)
    s *= grid.inv_ksq_int
    grad = k * s[..., None, :, :, :]
    if in_place:
        coeffs -= grad
        return coeffs
    return coeffs - grad


def leray_project(coeffs: np.ndarray, grid: GridSpec) -> SpectralField:
    """
    Project raw half-spectrum coefficients onto the divergence-free,
    zero-mean, dealiased subspace. Rejects inputs whose self-conjugate
    planes break reality symmetry (corrupted input), and nonzero means.
    """
    if coeffs.shape != grid.spectral_shape:
        raise FieldInvariantError(
            f"coefficient shape {coeffs.shape} != {grid.spectral_shape}"
        )
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    scale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    tol = 1e-12 * max(scale, 1e-300)
    rev = grid.rev_index
    for j in (0, grid.N // 2):
        plane = coeffs[..., j]
        mirror = np.conj(plane[..., rev, :][..., :, rev])
        if np.max(np.abs(plane - mirror)) > 2 * tol:
            raise FieldInvariantError(
                "input coefficients violate reality symmetry (corrupted field)"
            )
    if np.max(np.abs(coeffs[:, 0, 0, 0])) > tol:
        raise FieldInvariantError("input coefficients have a nonzero mean mode")
    out = leray_project_coeffs(coeffs * grid.dealias_mask, grid)
    return SpectralField(grid, out)


# --------------------------------------------------------------------------
# Stokes operator powers
# --------------------------------------------------------------------------

def stokes_apply(u: SpectralField, power: float) -> SpectralField:
    """
    Apply A^power, diagonal with eigenvalues (|k| 2pi/L)^2. The zero mode is
    annihilated for every power (it is zero by the zero-mean invariant).
    """
    if float(power) not in STOKES_POWERS:
        raise ValueError(f"power must be one of {STOKES_POWERS}, got {power}")
    g = u.grid
    eig = g.ksq_int * g.lambda1
    factor = np.zeros_like(eig)
    nz = eig > 0
    factor[nz] = eig[nz] ** float(power)
    return SpectralField(g, u.coeffs * factor)


# --------------------------------------------------------------------------
# Norms and inner products (mean-value Fourier convention: |u|^2 = L^3 sum |u_k|^2)
# --------------------------------------------------------------------------

def _sum_sq(coeffs: np.ndarray, grid: GridSpec, weight: np.ndarray | None = None) -> np.ndarray:
    """sum_k w_k |c_k|^2 over the full lattice, batched over leading axes."""
    sq = coeffs.real ** 2 + coeffs.imag ** 2
    sq = sq.sum(axis=-4)  # velocity components
    if weight is not None:
        sq = sq * weight
    sq = sq * grid.parseval_mult
    return sq.sum(axis=(-3, -2, -1))


def norm_h_sq_batch(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    return grid.L ** 3 * _sum_sq(coeffs, grid)


def norm_v_sq_batch(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    return grid.L ** 3 * _sum_sq(coeffs, grid, grid.ksq_int * grid.lambda1)


def norm_vprime_sq_batch(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    return grid.L ** 3 * _sum_sq(coeffs, grid, grid.inv_ksq_int / grid.lambda1)


def inner_product_l2(u: SpectralField, v: SpectralField) -> float:
    """L^2 inner product <u, v> over the box."""
    u.grid.require_compatible(v.grid)
    prod = (u.coeffs * np.conj(v.coeffs)).real.sum(axis=0)
    return float(u.grid.L ** 3 * (prod * u.grid.parseval_mult).sum())


def norm_h(u: SpectralField) -> float:
    """|u|, the L^2 norm."""
    return float(np.sqrt(norm_h_sq_batch(u.coeffs, u.grid)))


def norm_v(u: SpectralField) -> float:
    """||u|| = |A^(1/2) u|, the enstrophy norm."""
    return float(np.sqrt(norm_v_sq_batch(u.coeffs, u.grid)))


def norm_vprime(u: SpectralField) -> float:
    """||u||_{V'} = |A^(-1/2) u|."""
    return float(np.sqrt(norm_vprime_sq_batch(u.coeffs, u.grid)))


# --------------------------------------------------------------------------
# Advection B(u, v) = P(u . grad v)
# --------------------------------------------------------------------------

def bilinear_term(u: SpectralField, v: SpectralField) -> SpectralField:
    """
    Pseudo-spectral projected advection: transform u and grad(v) to the
    collocation grid, multiply pointwise, transform back, dealias, project.
    """
    u.grid.require_compatible(v.grid)
    g = u.grid
    ikappa = 1j * g.base_wavenumber
    grad = ikappa * (g.k_int[None, :] * v.coeffs[:, None])  # [i, j] = d_j v_i
    stack = np.concatenate([u.coeffs[None], grad], axis=0)  # (4, 3, ...)
    phys = irfftn_raw(stack, g.N)  # collocation values / N^3
    adv = np.einsum("jxyz,ijxyz->ixyz", phys[0], phys[1:])
    w_hat = rfftn_raw(adv)
    w_hat *= float(g.N) ** 3 * g.dealias_mask  # undo the two 1/N^3 factors
    return SpectralField(g, leray_project_coeffs(w_hat, g))


_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
_ROW_INDEX = ((0, 1, 2), (1, 3, 4), (2, 4, 5))


def self_advection_coeffs(
    coeffs: np.ndarray, grid: GridSpec, work: dict | None = None
) -> np.ndarray:
    """
    B(u, u) in divergence form, P(d_j (u_j u_i)), batched over leading axes.
    Identical to the convective form for divergence-free input on the
    alias-free dealiased band (the 2/3 rule with 3 not dividing N).
    `work` is an optional scratch-buffer dict reused across calls.
    """
    g = grid
    n = g.N
    phys = irfftn_raw(np.ascontiguousarray(coeffs), n)  # u / N^3
    batch = phys.shape[:-4]
    key = ("prods", batch, n)
    prods = None if work is None else work.get(key)
    if prods is None or prods.shape != batch + (6, n, n, n):
        prods = np.empty(batch + (6, n, n, n))
        if work is not None:
            work[key] = prods
    for m, (a, b) in enumerate(_PAIRS):
        np.multiply(phys[..., a, :, :, :], phys[..., b, :, :, :],
                    out=prods[..., m, :, :, :])
    t_hat = rfftn_raw(prods)  # T_hat / N^3
    k = g.k_int
    rows = np.empty(batch + g.spectral_shape, dtype=np.complex128)
    for i, (ma, mb, mc) in enumerate(_ROW_INDEX):
        row = rows[..., i, :, :, :]
        np.multiply(k[0], t_hat[..., ma, :, :, :], out=row)
        row += k[1] * t_hat[..., mb, :, :, :]
        row += k[2] * t_hat[..., mc, :, :, :]
    rows *= _advection_scale(g)
    return leray_project_coeffs(rows, g, in_place=True)


@functools.lru_cache(maxsize=8)
def _advection_scale_cached(n: int, l: float, frac: float) -> np.ndarray:
    g = GridSpec(L=l, N=n, dealias_fraction=frac)
    scale = (1j * g.base_wavenumber * float(n) ** 3) * g.dealias_mask
    scale.setflags(write=False)
    return scale


def _advection_scale(grid: GridSpec) -> np.ndarray:
    return _advection_scale_cached(grid.N, grid.L, grid.dealias_fraction)


@functools.lru_cache(maxsize=8)
def _advection_scale_real_cached(n: int, l: float, frac: float) -> np.ndarray:
    g = GridSpec(L=l, N=n, dealias_fraction=frac)
    scale = (g.base_wavenumber * float(n) ** 3) * g.dealias_mask
    scale.setflags(write=False)
    return scale


def _advection_scale_real(grid: GridSpec) -> np.ndarray:
    """kappa0 * N^3 * dealias mask; the fused kernels multiply by 1j themselves."""
    return _advection_scale_real_cached(grid.N, grid.L, grid.dealias_fraction)


def self_advection(u: SpectralField) -> SpectralField:
    """B(u, u); uses the divergence-form fast path when it is exact."""
    if u.grid.alias_free:
        return SpectralField(u.grid, self_advection_coeffs(u.coeffs, u.grid))
    return bilinear_term(u, u)


def bilinear_term_direct(u: SpectralField, v: SpectralField, chunk: int = 128) -> SpectralField:
    """
    Reference semantics for bilinear_term: the exact truncated convolution
    over all retained wavenumber pairs, then dealias and project. O(N^6);
    guarded to N <= 16.
    """
    u.grid.require_compatible(v.grid)
    g = u.grid
    if g.N > 16:
        raise ValueError("direct convolution oracle is limited to N <= 16")
    n, kmax = g.N, g.kmax

    full_u = u.full_spectrum()
    full_v = v.full_spectrum()

    axis = np.arange(-kmax, kmax + 1)
    kk1, kk2, kk3 = np.meshgrid(axis, axis, axis, indexing="ij")
    kvecs = np.stack([kk1.ravel(), kk2.ravel(), kk3.ravel()], axis=1)  # (P, 3)
    idx = tuple((kvecs % n).T)
    uc = full_u[:, idx[0], idx[1], idx[2]].T  # (P, 3)
    vc = full_v[:, idx[0], idx[1], idx[2]].T

    out = np.zeros((3, n, n, n), dtype=np.complex128)
    p_total = kvecs.shape[0]
    for lo in range(0, p_total, chunk):
        hi = min(lo + chunk, p_total)
        # s[p, q] = i kappa0 (u_p . q): the spectral symbol of u . grad
        s = 1j * g.base_wavenumber * np.einsum("pj,qj->pq", uc[lo:hi], kvecs.astype(np.float64))
        ksum = kvecs[lo:hi, None, :] + kvecs[None, :, :]  # (chunk, P, 3)
        keep = np.all(np.abs(ksum) <= kmax, axis=2)
        contrib = s[:, :, None] * vc[None, :, :]  # (chunk, P, 3)
        tgt = ksum[keep] % n
        lin = (tgt[:, 0] * n + tgt[:, 1]) * n + tgt[:, 2]
        vals = contrib[keep]
        for comp in range(3):
            np.add.at(out[comp].reshape(-1), lin, vals[:, comp])

    half = out[:, :, :, : n // 2 + 1]
    half = symmetrize_rfft_planes(half, g) * g.dealias_mask
    return SpectralField(g, leray_project_coeffs(half, g))


# --------------------------------------------------------------------------
# Weak metric
# --------------------------------------------------------------------------

def dw_distance(u: SpectralField, v: SpectralField) -> float:
    """
    Coefficient-weighted weak metric over the retained lattice:
    sum_k 2^{-|k|} |u_k - v_k| / (1 + |u_k - v_k|), |k| Euclidean,
    |.| on each coefficient the C^3 magnitude.
    """
    u.grid.require_compatible(v.grid)
    g = u.grid
    d = u.coeffs - v.coeffs
    mag = np.sqrt((d.real ** 2 + d.imag ** 2).sum(axis=0))
    w = _dw_weights(g)
    return float((w * mag / (1.0 + mag)).sum())


@functools.lru_cache(maxsize=8)
def _dw_weights_cached(n: int, l: float, frac: float) -> np.ndarray:
    g = GridSpec(L=l, N=n, dealias_fraction=frac)
    w = np.exp2(-np.sqrt(g.ksq_int)) * g.parseval_mult * g.dealias_mask
    w.setflags(write=False)
    return w


def _dw_weights(grid: GridSpec) -> np.ndarray:
    return _dw_weights_cached(grid.N, grid.L, grid.dealias_fraction)


def dw_max_value(grid: GridSpec) -> float:
    """Upper bound for dw_distance on this grid: sum of retained weights."""
    return float(_dw_weights(grid).sum())


@functools.lru_cache(maxsize=8)
def _dw_tail_cached(kmax: int) -> float:
    half_width = kmax + 64
    total = 0.0
    axis = np.arange(-half_width, half_width + 1, dtype=np.float64)
    kk2, kk3 = np.meshgrid(axis, axis, indexing="ij")
    base = kk2 ** 2 + kk3 ** 2
    for k1 in axis:
        r = np.sqrt(k1 ** 2 + base)
        total += float(np.exp2(-r)[r > kmax].sum())
    return total


def dw_tail_bound(grid: GridSpec) -> float:
    """
    Upper bound on the part of the weak metric lost to lattice truncation:
    sum over |k| > kmax of 2^{-|k|}. Terms beyond the summation box are
    below double-precision resolution of the result.
    """
    return _dw_tail_cached(grid.kmax)
