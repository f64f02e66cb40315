"""Divergence-free, zero-mean velocity fields stored as Fourier coefficients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .grid import GridSpec

_FFT_WORKERS = 2

try:  # torch's CPU FFT is markedly faster for small batched 3D transforms
    import torch as _torch

    _HAVE_TORCH = True
except ImportError:  # pragma: no cover - exercised only without torch
    _HAVE_TORCH = False


def _writable(a: np.ndarray) -> np.ndarray:
    return a if a.flags.writeable else a.copy()


def rfftn_raw(values: np.ndarray) -> np.ndarray:
    """Unnormalized real-to-complex transform over the last three axes."""
    if _HAVE_TORCH:
        return _torch.fft.rfftn(_torch.from_numpy(_writable(values)), dim=(-3, -2, -1)).numpy()
    return sfft.rfftn(values, axes=(-3, -2, -1), workers=_FFT_WORKERS)


def irfftn_raw(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Unnormalized inverse (carries the usual 1/N^3) over the last three axes."""
    if _HAVE_TORCH:
        return _torch.fft.irfftn(
            _torch.from_numpy(_writable(coeffs)), s=(n, n, n), dim=(-3, -2, -1)
        ).numpy()
    return sfft.irfftn(coeffs, s=(n, n, n), axes=(-3, -2, -1), workers=_FFT_WORKERS)


class FieldInvariantError(ValueError):
    """A coefficient array violates a SpectralField invariant."""


@dataclass(frozen=True)
class SpectralField:
    """
    Velocity field on the periodic box, held as mean-value Fourier
    coefficients in rfft half-spectrum layout, shape (3, N, N, N//2+1).

    Invariants (enforced by `validate`, preserved by all operators):
    reality of the physical field, zero spatial mean, divergence-free,
    and zero outside the dealiased band.
    """

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        if self.coeffs.shape != self.grid.spectral_shape:
            raise FieldInvariantError(
                f"coefficient shape {self.coeffs.shape} != {self.grid.spectral_shape}"
            )
        if self.coeffs.dtype != np.complex128:
            raise FieldInvariantError("coefficients must be complex128")
        self.coeffs.setflags(write=False)

    # -- arithmetic (same-grid fields form a vector space) ------------------

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self.grid.require_compatible(other.grid)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self.grid.require_compatible(other.grid)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, a: float) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * float(a))

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coeffs)

    # -- invariant checks ----------------------------------------------------

    def validate(self, rtol: float = 1e-12) -> None:
        """Raise FieldInvariantError if any invariant is broken."""
        c = self.coeffs
        g = self.grid
        if not np.all(np.isfinite(c.view(np.float64))):
            raise FieldInvariantError("non-finite coefficients")
        scale = float(np.max(np.abs(c))) if c.size else 0.0
        tol = rtol * max(scale, 1.0e-300)

        if np.max(np.abs(c[:, 0, 0, 0])) > tol:
            raise FieldInvariantError("nonzero mean mode")

        if np.any(np.abs(c[:, :, :, :][..., ~g.dealias_mask]) > 0):
            raise FieldInvariantError("energy outside the dealiased band")

        div = np.einsum("ixyz,ixyz->xyz", g.k_int, c)
        if np.max(np.abs(div)) > tol * max(g.kmax * np.sqrt(3.0), 1.0):
            raise FieldInvariantError("field is not divergence-free")

        rev = g.rev_index
        plane = c[:, :, :, 0]
        mirror = np.conj(plane[:, rev][:, :, rev])
        if np.max(np.abs(plane - mirror)) > 2 * tol:
            raise FieldInvariantError("reality symmetry broken on the k3=0 plane")

    # -- transforms ------------------------------------------------------------

    def to_physical(self) -> np.ndarray:
        """Collocation values, shape (3, N, N, N), float64."""
        return spectral_to_physical(self.coeffs, self.grid)

    def full_spectrum(self) -> np.ndarray:
        """
        Full-cube coefficients (3, N, N, N) in numpy fft ordering,
        reconstructed from the stored half spectrum by conjugate symmetry.
        """
        g = self.grid
        n, nh = g.N, g.N // 2 + 1
        rev = g.rev_index
        full = np.empty((3, n, n, n), dtype=np.complex128)
        full[:, :, :, :nh] = self.coeffs
        # k3 in N//2+1 .. N-1 stands for negative k3; mirror-conjugate.
        neg = np.conj(self.coeffs[:, rev][:, :, rev])  # index (i1,i2,j) -> (-k1,-k2,j)
        full[:, :, :, nh:] = neg[:, :, :, 1 : n - nh + 1][:, :, :, ::-1]
        return full


def spectral_to_physical(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Inverse transform of mean-value coefficients; batched over leading axes."""
    out = irfftn_raw(np.ascontiguousarray(coeffs), grid.N)
    out *= float(grid.N) ** 3
    return out


def physical_to_spectral(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Forward transform to mean-value coefficients; batched over leading axes."""
    out = rfftn_raw(np.ascontiguousarray(values))
    out *= 1.0 / float(grid.N) ** 3
    return out


def from_physical(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    return physical_to_spectral(values, grid)


def zero_field(grid: GridSpec) -> SpectralField:
    return SpectralField(grid, np.zeros(grid.spectral_shape, dtype=np.complex128))


def symmetrize_rfft_planes(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    """
    Enforce conjugate symmetry on the self-conjugate rfft planes (k3 = 0 and,
    for completeness, k3 = N/2) so the represented field is exactly real.
    """
    rev = grid.rev_index
    out = coeffs.copy()
    for j in (0, grid.N // 2):
        plane = out[..., j]
        mirror = np.conj(plane[..., rev, :][..., :, rev])
        out[..., j] = 0.5 * (plane + mirror)
    return out


def random_divfree(
    grid: GridSpec,
    seed: int,
    energy_target: float,
    spectrum_slope: float = -2.0,
) -> SpectralField:
    """
    Deterministic random divergence-free field with |u|^2 = energy_target.

    Coefficient magnitudes are shaped as |k|^spectrum_slope before projection;
    the field is rescaled after projection so the energy is met to rounding.
    """
    if energy_target < 0:
        raise ValueError("energy_target must be nonnegative")
    if energy_target == 0.0:
        return zero_field(grid)

    from .operators import leray_project_coeffs, norm_h  # local import, no cycle at module load

    rng = np.random.default_rng(seed)
    shape = grid.spectral_shape
    raw = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    raw = symmetrize_rfft_planes(raw, grid)

    shaping = np.zeros_like(grid.ksq_int)
    nz = grid.ksq_int > 0
    shaping[nz] = grid.ksq_int[nz] ** (spectrum_slope / 2.0)
    raw *= shaping
    raw[:, 0, 0, 0] = 0.0
    raw *= grid.dealias_mask

    coeffs = leray_project_coeffs(raw, grid)
    field = SpectralField(grid, coeffs)
    e = norm_h(field)
    if e == 0.0:
        raise ValueError("random field projected to zero; cannot meet energy target")
    return field * float(np.sqrt(energy_target) / e)
