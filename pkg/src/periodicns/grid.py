"""Wavenumber lattice and dealiasing for a periodic cubic box."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_THIRDS = 2.0 / 3.0


@dataclass(frozen=True)
class GridSpec:
    """
    Pre-computed spectral quantities for the periodic box [0, L]^3.

    Velocity fields live in Fourier space in the half-spectrum (rfft) layout:
    complex arrays of shape (3, N, N, N//2 + 1), with the mean-value
    normalization (the k=0 coefficient is the spatial mean).

    Parameters
    ----------
    L : float
        Edge length of the box.
    N : int
        Collocation points per dimension; must be even and >= 4.
    dealias_fraction : float
        Fraction of the Nyquist range retained; modes with any
        |k_i| > kmax = floor(dealias_fraction * N/2) are zeroed.
    """

    L: float = 2.0 * np.pi
    N: int = 32
    dealias_fraction: float = TWO_THIRDS

    # derived, filled in __post_init__
    base_wavenumber: float = field(init=False, repr=False)
    lambda1: float = field(init=False, repr=False)
    kmax: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.L <= 0:
            raise ValueError("grid.L must be positive")
        if self.N < 4 or self.N % 2 != 0:
            raise ValueError("grid.N must be an even integer >= 4")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError("grid.dealias_fraction must lie in (0, 1]")
        kmax = int(np.floor(self.dealias_fraction * self.N / 2))
        if kmax < 1:
            raise ValueError("dealias cutoff must retain at least |k| = 1")

        object.__setattr__(self, "base_wavenumber", 2.0 * np.pi / self.L)
        object.__setattr__(self, "lambda1", self.base_wavenumber ** 2)
        object.__setattr__(self, "kmax", kmax)

        n, nh = self.N, self.N // 2 + 1
        k1 = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)  # 0..N/2-1, -N/2..-1
        k3 = np.arange(nh, dtype=np.int64)                  # rfft axis: 0..N/2
        kx = k1[:, None, None]
        ky = k1[None, :, None]
        kz = k3[None, None, :]
        k_int = np.stack(np.broadcast_arrays(kx, ky, kz)).astype(np.float64)
        ksq_int = kx.astype(np.float64) ** 2 + ky ** 2 + kz ** 2

        mask = (np.abs(kx) <= kmax) & (np.abs(ky) <= kmax) & (np.abs(kz) <= kmax)
        mask = np.broadcast_to(mask, (n, n, nh)).copy()

        inv_ksq = np.zeros_like(ksq_int)
        nz = ksq_int > 0
        inv_ksq[nz] = 1.0 / ksq_int[nz]

        # Parseval multiplicity of each stored column: interior rfft columns
        # stand for a +/-k pair, the k3=0 and k3=N/2 planes store themselves.
        mult = np.full(nh, 2.0)
        mult[0] = 1.0
        mult[-1] = 1.0

        # index reversal (k -> -k) within an axis of length N
        rev = (-np.arange(n)) % n

        for name, arr in (
            ("k_int", k_int),
            ("ksq_int", ksq_int),
            ("dealias_mask", mask),
            ("inv_ksq_int", inv_ksq),
            ("parseval_mult", mult),
            ("rev_index", rev),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def spectral_shape(self) -> tuple[int, int, int, int]:
        return (3, self.N, self.N, self.N // 2 + 1)

    @property
    def alias_free(self) -> bool:
        """
        True when quadratic products of retained modes cannot alias back
        onto retained modes, i.e. N - 2*kmax > kmax. Holds for the 2/3 rule
        whenever 3 does not divide N.
        """
        return self.N - 2 * self.kmax > self.kmax

    def compatible(self, other: "GridSpec") -> bool:
        return (
            self.N == other.N
            and self.L == other.L
            and self.dealias_fraction == other.dealias_fraction
        )

    def require_compatible(self, other: "GridSpec") -> None:
        if not self.compatible(other):
            raise ValueError(
                f"grid mismatch: (L={self.L}, N={self.N}) vs (L={other.L}, N={other.N})"
            )
