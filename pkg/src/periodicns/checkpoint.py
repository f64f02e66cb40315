"""Binary trajectory checkpoints.

Layout (little-endian):
  magic   4 bytes  b"PNS1"
  L       float64  box edge length
  N       uint32   modes per dimension
  frac    float64  dealias fraction
  t       float64  trajectory time
  coeffs  N^3 * 3 complex values as interleaved (re, im) float64 pairs,
          lattice points in lexicographic order over (k1, k2, k3) with
          each k_i running -N/2 .. N/2-1, components innermost.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .field import SpectralField
from .grid import GridSpec
from .stepper import TrajectoryState

MAGIC = b"PNS1"
_HEADER = struct.Struct("<4sdIdd")


class CheckpointError(RuntimeError):
    """Unreadable or incompatible checkpoint file."""


def save_checkpoint(path: str | Path, state: TrajectoryState) -> None:
    grid = state.u.grid
    full = state.u.full_spectrum()  # (3, N, N, N), numpy fft ordering
    # numpy fft index ordering -> signed lexicographic via fftshift
    shifted = np.fft.fftshift(full, axes=(1, 2, 3))
    lex = np.ascontiguousarray(np.moveaxis(shifted, 0, -1))  # (N, N, N, 3)
    header = _HEADER.pack(MAGIC, grid.L, grid.N, grid.dealias_fraction, state.t)
    payload = lex.astype("<c16", copy=False).tobytes()
    Path(path).write_bytes(header + payload)


def load_checkpoint(path: str | Path) -> TrajectoryState:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise CheckpointError("truncated checkpoint: header incomplete")
    magic, L, n, frac, t = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointError(
            f"bad magic {magic!r}: not a version-1 checkpoint (expected {MAGIC!r})"
        )
    expected = _HEADER.size + int(n) ** 3 * 3 * 16
    if len(raw) != expected:
        raise CheckpointError(
            f"truncated or oversized checkpoint: {len(raw)} bytes, expected {expected}"
        )
    grid = GridSpec(L=L, N=int(n), dealias_fraction=frac)
    lex = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).reshape(n, n, n, 3)
    shifted = np.moveaxis(lex, -1, 0)
    full = np.fft.ifftshift(shifted, axes=(1, 2, 3))
    half = np.ascontiguousarray(full[:, :, :, : n // 2 + 1])
    return TrajectoryState(t, SpectralField(grid, half))
