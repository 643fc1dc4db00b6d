"""Dyadic frequency blocks on the torus lattice.

Block q >= 0 multiplies the half-spectrum by the shell profile at scale 2^q;
block -1 is the ball cutoff.  Multiplier stacks are precomputed per
(grid, cutoff pair) and shared through an lru cache, so repeated norm and
block evaluations cost one masked array product each.

The decomposition runs through ``grid.q_max`` (the last shell meeting the
wavenumber lattice), which makes reconstruction exact for arbitrary fields.
Band-limited fields have empty blocks above ``grid.q_band``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .cutoffs import CutoffPair, build_cutoffs
from .errors import ContractError
from .fields import Field, VectorField
from .grid import TorusGrid


class DyadicBlocks:
    """Cached block multipliers for one grid and cutoff pair."""

    def __init__(self, grid: TorusGrid, cutoffs: CutoffPair):
        self.grid = grid
        self.cutoffs = cutoffs
        k = grid.k_mag
        rows = [cutoffs.low_pass(k)]
        for q in range(grid.q_max + 1):
            rows.append(cutoffs.band_pass(k / 2.0 ** q))
        self.multipliers = np.stack(rows)  # index 0 is block -1
        self.multipliers.flags.writeable = False

    @property
    def q_max(self) -> int:
        return self.grid.q_max

    def multiplier(self, q: int) -> np.ndarray:
        if q < -1:
            raise ContractError(f"block index must be >= -1, got {q}")
        if q > self.q_max:
            # shell entirely outside the lattice
            return np.zeros(self.grid.spectral_shape)
        return self.multipliers[q + 1]

    def block_spectrum(self, spectrum: np.ndarray, q: int) -> np.ndarray:
        return spectrum * self.multiplier(q)

    def low_cutoff_spectrum(self, spectrum: np.ndarray, q: int) -> np.ndarray:
        """S_q as the literal sum of blocks -1 .. q-1 (so S_0 = block -1)."""
        if q < 0:
            raise ContractError(f"low-frequency cutoff index must be >= 0, got {q}")
        top = min(q - 1, self.q_max)
        mult = self.multipliers[: top + 2].sum(axis=0)
        return spectrum * mult

    @property
    def _mult_sq_flat(self) -> np.ndarray:
        cached = getattr(self, "_msf", None)
        if cached is None:
            cached = (self.multipliers ** 2).reshape(self.multipliers.shape[0], -1)
            self._msf = cached
        return cached

    def block_l2_norms(self, spectrum: np.ndarray) -> np.ndarray:
        """L2 norms of all blocks -1..q_max straight from the half-spectrum."""
        g = self.grid
        power = g.hermitian_weight * (spectrum.real ** 2 + spectrum.imag ** 2)
        s = self._mult_sq_flat @ power.ravel()
        return np.sqrt(s * g.length ** g.dim) / g.n ** g.dim

    def block_grad_l2_norms(self, spectrum: np.ndarray) -> np.ndarray:
        """L2 norms of the gradient of each block, via the |k| weight."""
        g = self.grid
        power = g.k_sq * g.hermitian_weight * (spectrum.real ** 2 + spectrum.imag ** 2)
        s = self._mult_sq_flat @ power.ravel()
        return np.sqrt(s * g.length ** g.dim) / g.n ** g.dim


@lru_cache(maxsize=32)
def get_blocks(grid: TorusGrid, cutoffs: CutoffPair | None = None) -> DyadicBlocks:
    return DyadicBlocks(grid, cutoffs if cutoffs is not None else build_cutoffs())


def dyadic_block(f: Field, q: int, cutoffs: CutoffPair | None = None) -> Field:
    """Frequency block of f: shell q for q >= 0, the low ball for q = -1."""
    op = get_blocks(f.grid, cutoffs)
    return Field.from_spectrum(f.grid, op.block_spectrum(f.spectrum, q))


def low_freq_cutoff(f: Field, q: int, cutoffs: CutoffPair | None = None) -> Field:
    op = get_blocks(f.grid, cutoffs)
    return Field.from_spectrum(f.grid, op.low_cutoff_spectrum(f.spectrum, q))


@dataclass(frozen=True)
class DyadicDecomposition:
    """Ordered blocks (q, Field) for q = -1 .. q_max."""

    blocks: tuple[tuple[int, Field], ...]
    q_max: int

    def reconstruct(self) -> Field:
        total = self.blocks[0][1]
        for _, blk in self.blocks[1:]:
            total = total + blk
        return total

    def __iter__(self):
        return iter(self.blocks)


def decompose(f: Field, cutoffs: CutoffPair | None = None) -> DyadicDecomposition:
    op = get_blocks(f.grid, cutoffs)
    blocks = tuple(
        (q, Field.from_spectrum(f.grid, op.block_spectrum(f.spectrum, q)))
        for q in range(-1, op.q_max + 1)
    )
    return DyadicDecomposition(blocks, op.q_max)


def reconstruction_defect(f: Field, cutoffs: CutoffPair | None = None) -> float:
    """Relative L2 error of summing all blocks back together."""
    rec = decompose(f, cutoffs).reconstruct()
    denom = f.l2()
    if denom == 0.0:
        return (rec - f).l2()
    return (rec - f).l2() / denom


def bernstein_ratios(f: Field, cutoffs: CutoffPair | None = None) -> dict[int, float]:
    """||grad block_q f||_2 / ||block_q f||_2 for each nonempty shell q >= 0.

    Computed spectrally, so each ratio is a |k|-weighted mean over the shell
    support and sits inside [0.75 * 2^q, (8/3) * 2^q] exactly.
    """
    op = get_blocks(f.grid, cutoffs)
    base = op.block_l2_norms(f.spectrum)
    grad = op.block_grad_l2_norms(f.spectrum)
    out = {}
    for q in range(0, op.q_max + 1):
        if base[q + 1] > 0.0:
            out[q] = float(grad[q + 1] / base[q + 1])
    return out


@dataclass(frozen=True)
class OrthogonalityReport:
    """Worst-case norms for block products that must vanish."""

    max_block_product: float
    worst_block_pair: tuple[int, int]
    max_shifted_product: float
    worst_shifted_pair: tuple[int, int]


def check_almost_orthogonality(
    f: Field,
    g: Field | None = None,
    cutoffs: CutoffPair | None = None,
) -> OrthogonalityReport:
    """Verify the two support-separation identities on the lattice.

    1. block_p(block_q(f)) = 0 whenever |p - q| >= 2.
    2. block_q(S_{p-1} f * block_p g) = 0 whenever |p - q| >= 5 (the
       paraproduct terms of the product f*g), products dealiased.
    """
    if g is None:
        g = f
    if f.grid != g.grid:
        raise ContractError("fields live on different grids")
    op = get_blocks(f.grid, cutoffs)
    grid = f.grid

    worst_bp, arg_bp = 0.0, (0, 0)
    for p in range(-1, op.q_max + 1):
        bp = op.block_spectrum(f.spectrum, p)
        for q in range(-1, op.q_max + 1):
            if abs(p - q) < 2:
                continue
            val = grid.l2_from_spectrum(op.block_spectrum(bp, q))
            if val > worst_bp:
                worst_bp, arg_bp = val, (p, q)

    worst_sh, arg_sh = 0.0, (0, 0)
    for p in range(1, op.q_max + 1):
        low = op.low_cutoff_spectrum(f.spectrum, p - 1)
        shell = op.block_spectrum(g.spectrum, p)
        prod = grid.dealiased_product(low, shell)
        for q in range(-1, op.q_max + 1):
            if abs(p - q) < 5:
                continue
            val = grid.l2_from_spectrum(op.block_spectrum(prod, q))
            if val > worst_sh:
                worst_sh, arg_sh = val, (p, q)

    return OrthogonalityReport(worst_bp, arg_bp, worst_sh, arg_sh)


def vector_block(v: VectorField, q: int, cutoffs: CutoffPair | None = None) -> VectorField:
    return VectorField(tuple(dyadic_block(c, q, cutoffs) for c in v.components))
