"""Dyadic (Besov-type) norms and their time-integrated variants.

The stationary norm weights per-block Lp norms by 2^(q*s) and combines them
in little-l^r.  The time-integrated variant takes the Lebesgue time norm of
each block *before* the l^r sum; by Minkowski it dominates the plain
"norm of the time norm" when r <= theta and is dominated by it when
r >= theta, and the tests pin both orderings.

Vector-valued arguments use the sum-of-components convention; gradients of
a single scalar use the Euclidean magnitude inside Lp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blocks import get_blocks
from .cutoffs import CutoffPair
from .errors import ContractError
from .fields import Field, TimeSeriesField, VectorField


@dataclass(frozen=True)
class BesovIndex:
    """Regularity / integrability / summation triple (s, p, r)."""

    s: float
    p: float = 2.0
    r: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.s):
            raise ContractError(f"regularity s must be finite, got {self.s}")
        for name, v in (("p", self.p), ("r", self.r)):
            if v != np.inf and not v >= 1.0:
                raise ContractError(f"exponent {name} must be in [1, inf], got {v}")


def _lr_combine(values: np.ndarray, weights: np.ndarray, r: float) -> float:
    a = weights * values
    if r == np.inf:
        return float(np.max(a)) if a.size else 0.0
    return float(np.sum(a ** r) ** (1.0 / r))


def block_lp_norms(f: Field, p: float, cutoffs: CutoffPair | None = None) -> np.ndarray:
    """Lp norms of blocks -1..q_max; p=2 goes through Parseval directly."""
    op = get_blocks(f.grid, cutoffs)
    if p == 2.0:
        return op.block_l2_norms(f.spectrum)
    out = np.empty(op.q_max + 2)
    for q in range(-1, op.q_max + 1):
        blk = f.grid.inverse(op.block_spectrum(f.spectrum, q))
        out[q + 1] = f.grid.lp_norm(blk, p)
    return out


def _vector_block_lp_norms(v: VectorField, p: float, cutoffs: CutoffPair | None) -> np.ndarray:
    """Per-block Lp norms of the Euclidean magnitude of a vector field."""
    op = get_blocks(v.grid, cutoffs)
    if p == 2.0:
        sq = None
        for c in v.components:
            n = op.block_l2_norms(c.spectrum)
            sq = n ** 2 if sq is None else sq + n ** 2
        return np.sqrt(sq)
    out = np.empty(op.q_max + 2)
    for q in range(-1, op.q_max + 1):
        mags = [v.grid.inverse(op.block_spectrum(c.spectrum, q)) for c in v.components]
        out[q + 1] = v.grid.lp_norm(np.sqrt(sum(m ** 2 for m in mags)), p)
    return out


def _weights(q_max: int, s: float) -> np.ndarray:
    return 2.0 ** (s * np.arange(-1, q_max + 1))


def besov_norm(
    f: Field | VectorField,
    idx: BesovIndex,
    cutoffs: CutoffPair | None = None,
) -> float:
    """Weighted l^r sum of per-block Lp norms.

    Vector fields contribute the sum of their component norms.
    """
    if isinstance(f, VectorField):
        return sum(besov_norm(c, idx, cutoffs) for c in f.components)
    norms = block_lp_norms(f, idx.p, cutoffs)
    op = get_blocks(f.grid, cutoffs)
    return _lr_combine(norms, _weights(op.q_max, idx.s), idx.r)


def gradient_besov_norm(
    f: Field,
    idx: BesovIndex,
    cutoffs: CutoffPair | None = None,
) -> float:
    """Besov norm of grad f, Euclidean magnitude inside Lp."""
    return besov_norm_magnitude(f.gradient(), idx, cutoffs)


def besov_norm_magnitude(
    v: VectorField,
    idx: BesovIndex,
    cutoffs: CutoffPair | None = None,
) -> float:
    norms = _vector_block_lp_norms(v, idx.p, cutoffs)
    op = get_blocks(v.grid, cutoffs)
    return _lr_combine(norms, _weights(op.q_max, idx.s), idx.r)


def sobolev_norm(f: Field, s: float) -> float:
    """Direct spectral comparator with weight max(1/2, |k|)^s.

    The 1/2 floor makes the zero mode compare consistently with the
    2^(-s) weight the ball block carries in the dyadic norm.
    """
    g = f.grid
    w = np.maximum(0.5, g.k_mag) ** (2.0 * s)
    power = g.hermitian_weight * (f.spectrum.real ** 2 + f.spectrum.imag ** 2)
    return float(math.sqrt(np.sum(w * power) * g.length ** g.dim) / g.n ** g.dim)


# -- time-integrated norms ----------------------------------------------


def _time_norm(values: np.ndarray, times: np.ndarray, theta: float) -> float:
    if theta == np.inf:
        return float(np.max(values))
    powers = values ** theta
    integral = np.sum(0.5 * np.diff(times) * (powers[1:] + powers[:-1]))
    return float(integral ** (1.0 / theta))


def chemin_lerner_norm(
    series: TimeSeriesField,
    idx: BesovIndex,
    theta: float,
    cutoffs: CutoffPair | None = None,
) -> float:
    """Time norm per block first, weighted l^r sum second."""
    if theta != np.inf and not theta >= 1.0:
        raise ContractError(f"time exponent must be in [1, inf], got {theta}")
    op = get_blocks(series.grid, cutoffs)
    per_block = np.stack(
        [block_lp_norms(snap, idx.p, cutoffs) for snap in series.snapshots]
    )  # shape (time, q)
    time_collapsed = np.array(
        [_time_norm(per_block[:, j], series.times, theta) for j in range(per_block.shape[1])]
    )
    return _lr_combine(time_collapsed, _weights(op.q_max, idx.s), idx.r)


def besov_time_norm(
    series: TimeSeriesField,
    idx: BesovIndex,
    theta: float,
    cutoffs: CutoffPair | None = None,
) -> float:
    """Plain ordering: spatial Besov norm per instant, then the time norm."""
    vals = np.array([besov_norm(snap, idx, cutoffs) for snap in series.snapshots])
    return _time_norm(vals, series.times, theta)


def time_lebesgue_norm(series: TimeSeriesField, theta: float, p: float) -> float:
    """L^theta in time of the spatial Lp norm."""
    vals = np.array([snap.lp(p) for snap in series.snapshots])
    return _time_norm(vals, series.times, theta)


# -- embeddings ----------------------------------------------------------


def _check_embedding_admissible(src: BesovIndex, dst: BesovIndex, dim: int) -> None:
    inv = lambda e: 0.0 if e == np.inf else 1.0 / e
    tol = 1e-12
    if dst.p == src.p:
        ok = dst.s < src.s or (dst.s == src.s and inv(dst.r) <= inv(src.r) + tol)
    elif dst.p > src.p:
        shift = src.s - dim * (inv(src.p) - inv(dst.p))
        ok = dst.s <= shift + tol and inv(dst.r) <= inv(src.r) + tol
    else:
        ok = False
    if not ok:
        raise ContractError(
            f"embedding {src} -> {dst} is not admissible in dimension {dim}"
        )


@dataclass(frozen=True)
class EmbeddingReport:
    source: BesovIndex
    target: BesovIndex
    source_norm: float
    target_norm: float

    @property
    def ratio(self) -> float:
        return self.target_norm / self.source_norm if self.source_norm else 0.0


def check_embeddings(
    f: Field,
    pairs: list[tuple[BesovIndex, BesovIndex]],
    cutoffs: CutoffPair | None = None,
) -> list[EmbeddingReport]:
    """Norm ratios for admissible embedding pairs (target over source)."""
    out = []
    for src, dst in pairs:
        _check_embedding_admissible(src, dst, f.grid.dim)
        out.append(
            EmbeddingReport(src, dst, besov_norm(f, src, cutoffs), besov_norm(f, dst, cutoffs))
        )
    return out


def sup_norm_ratio(f: Field, idx: BesovIndex, cutoffs: CutoffPair | None = None) -> float:
    """||f||_inf over the Besov norm; requires the continuous embedding
    (s > d/p, or s = d/p with r = 1)."""
    inv_p = 0.0 if idx.p == np.inf else 1.0 / idx.p
    critical = f.grid.dim * inv_p
    if not (idx.s > critical or (idx.s == critical and idx.r == 1.0)):
        raise ContractError(f"{idx} does not embed into bounded continuous functions")
    return f.lp(np.inf) / besov_norm(f, idx, cutoffs)
