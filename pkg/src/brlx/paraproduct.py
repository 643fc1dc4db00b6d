"""Paraproduct splitting of pointwise products and its mapping bounds.

The product is split into two paraproducts plus a resonant remainder:
the paraproduct pairs each shell of one factor with strictly lower
frequencies of the other (blocks at distance >= 2), and the remainder
collects the diagonal interactions (blocks within one unit).  Summed, the
three parts reproduce the dealiased product exactly, because every pairwise
block product is computed with the same 3/2-padded rule and the splitting
is a rearrangement of the same bilinear form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .besov import (
    BesovIndex,
    besov_norm,
    chemin_lerner_norm,
    time_lebesgue_norm,
)
from .blocks import get_blocks
from .cutoffs import CutoffPair
from .errors import ContractError
from .fields import Field, TimeSeriesField
from .grid import TorusGrid
from .reports import FitReport


@dataclass(frozen=True)
class BonySplit:
    """Low-high, high-low, and resonant parts of a product f*g."""

    para_fg: Field  # low f against high g
    para_gf: Field  # low g against high f
    remainder: Field

    def total(self) -> Field:
        return self.para_fg + self.para_gf + self.remainder


def para_spectrum_raw(grid: TorusGrid, op, a_spec: np.ndarray, b_spec: np.ndarray) -> np.ndarray:
    """Paraproduct on raw half-spectra: sum_q S_{q-1} a * block_q b."""
    acc = np.zeros(grid.spectral_shape, dtype=complex)
    for q in range(1, op.q_max + 1):
        low = op.low_cutoff_spectrum(a_spec, q - 1)
        shell = op.block_spectrum(b_spec, q)
        acc += grid.dealiased_product(low, shell)
    return acc


def remainder_spectrum_raw(grid: TorusGrid, op, a_spec: np.ndarray, b_spec: np.ndarray) -> np.ndarray:
    """Resonant part on raw half-spectra: blocks of a against the widened
    (three-shell) blocks of b."""
    acc = np.zeros(grid.spectral_shape, dtype=complex)
    for q in range(-1, op.q_max + 1):
        aq = op.block_spectrum(a_spec, q)
        wide = np.zeros(grid.spectral_shape, dtype=complex)
        for j in (q - 1, q, q + 1):
            if j >= -1:
                wide += op.block_spectrum(b_spec, j)
        acc += grid.dealiased_product(aq, wide)
    return acc


def paraproduct_spectrum(
    f: Field, g: Field, cutoffs: CutoffPair | None = None
) -> np.ndarray:
    """Spectrum of sum_q S_{q-1} f * block_q g (low f modulating high g)."""
    return para_spectrum_raw(f.grid, get_blocks(f.grid, cutoffs), f.spectrum, g.spectrum)


def remainder_spectrum(
    f: Field, g: Field, cutoffs: CutoffPair | None = None
) -> np.ndarray:
    """Spectrum of the resonant part of f*g."""
    return remainder_spectrum_raw(f.grid, get_blocks(f.grid, cutoffs), f.spectrum, g.spectrum)


def bony_decompose(f: Field, g: Field, cutoffs: CutoffPair | None = None) -> BonySplit:
    if f.grid != g.grid:
        raise ContractError("fields live on different grids")
    grid = f.grid
    return BonySplit(
        Field.from_spectrum(grid, paraproduct_spectrum(f, g, cutoffs)),
        Field.from_spectrum(grid, paraproduct_spectrum(g, f, cutoffs)),
        Field.from_spectrum(grid, remainder_spectrum(f, g, cutoffs)),
    )


def bony_defect(f: Field, g: Field, cutoffs: CutoffPair | None = None) -> float:
    """Relative L2 gap between the recombined split and the dealiased product."""
    split = bony_decompose(f, g, cutoffs)
    prod = Field.from_spectrum(f.grid, f.grid.dealiased_product(f.spectrum, g.spectrum))
    denom = prod.l2()
    gap = (split.total() - prod).l2()
    return gap / denom if denom else gap


# -- mapping bounds ------------------------------------------------------


def _inv(e: float) -> float:
    return 0.0 if e == np.inf else 1.0 / e


def remainder_bound_report(
    pairs: list[tuple[Field, Field]],
    idx1: BesovIndex,
    idx2: BesovIndex,
    target_p: float = 2.0,
    target_r: float | None = None,
    cutoffs: CutoffPair | None = None,
) -> FitReport:
    """Fit the constant in the remainder mapping bound over an ensemble.

    The remainder lands in regularity s1 + s2 - d*(1/p1 + 1/p2 - 1/p),
    which requires s1 + s2 > 0 and compatible integrability exponents.
    """
    if not pairs:
        raise ContractError("empty ensemble")
    if idx1.s + idx2.s <= 0:
        raise ContractError("remainder bound needs s1 + s2 > 0")
    hol = _inv(idx1.p) + _inv(idx2.p)
    if hol > 1.0 + 1e-12 or _inv(target_p) > hol + 1e-12:
        raise ContractError("integrability exponents violate 1/p <= 1/p1 + 1/p2 <= 1")
    if target_r is None:
        target_r = max(1.0, 1.0 / min(1.0, _inv(idx1.r) + _inv(idx2.r)))
    dim = pairs[0][0].grid.dim
    s_out = idx1.s + idx2.s - dim * (hol - _inv(target_p))
    out_idx = BesovIndex(s_out, target_p, target_r)
    ratios = []
    for f, g in pairs:
        rem = Field.from_spectrum(f.grid, remainder_spectrum(f, g, cutoffs))
        denom = besov_norm(f, idx1, cutoffs) * besov_norm(g, idx2, cutoffs)
        ratios.append(besov_norm(rem, out_idx, cutoffs) / denom)
    return FitReport(
        "remainder bound",
        np.asarray(ratios),
        {"idx1": idx1, "idx2": idx2, "target": out_idx},
    )


def product_series(u: TimeSeriesField, v: TimeSeriesField) -> TimeSeriesField:
    if u.grid != v.grid or not np.array_equal(u.times, v.times):
        raise ContractError("series must share grid and time axis")
    grid = u.grid
    snaps = [
        Field.from_spectrum(grid, grid.dealiased_product(a.spectrum, b.spectrum))
        for a, b in zip(u.snapshots, v.snapshots)
    ]
    return TimeSeriesField(u.times, snaps)


def product_bound_report(
    members: list[tuple[TimeSeriesField, TimeSeriesField]],
    idx: BesovIndex,
    theta: float,
    theta_split: tuple[float, float],
    theta_split_sym: tuple[float, float] | None = None,
    cutoffs: CutoffPair | None = None,
) -> FitReport:
    """Fit the time-split product bound

        ||uv|| <= C (||u||_{L^t1 Linf} ||v||_{B, t2} + ||v||_{L^t3 Linf} ||u||_{B, t4})

    where the B-norms are block-first time norms at ``idx``.  Both splits
    must satisfy 1/theta = 1/t_a + 1/t_b.
    """
    if theta_split_sym is None:
        theta_split_sym = theta_split
    for a, b in (theta_split, theta_split_sym):
        if abs(_inv(a) + _inv(b) - _inv(theta)) > 1e-12:
            raise ContractError(
                f"time exponents ({a}, {b}) do not split 1/{theta}"
            )
    t1, t2 = theta_split
    t3, t4 = theta_split_sym
    ratios = []
    for u, v in members:
        lhs = chemin_lerner_norm(product_series(u, v), idx, theta, cutoffs)
        rhs = time_lebesgue_norm(u, t1, np.inf) * chemin_lerner_norm(v, idx, t2, cutoffs)
        rhs += time_lebesgue_norm(v, t3, np.inf) * chemin_lerner_norm(u, idx, t4, cutoffs)
        ratios.append(lhs / rhs)
    return FitReport(
        "time-split product bound",
        np.asarray(ratios),
        {"idx": idx, "theta": theta, "splits": (theta_split, theta_split_sym)},
    )


def sound_speed_deviation(
    gamma: float = 2.0, pressure_const: float = 0.5, rho_ref: float = 1.0
) -> Callable[[np.ndarray], np.ndarray]:
    """Default composition map: the sound speed at rho_ref + u, shifted to
    vanish at u = 0.  Smooth on u > -rho_ref and F(0) = 0."""

    def F(u: np.ndarray) -> np.ndarray:
        rho = rho_ref + u
        if np.any(rho <= 0):
            raise ContractError("composition argument leaves the positive-density domain")
        return np.sqrt(pressure_const * gamma * rho ** (gamma - 1.0)) - math.sqrt(
            pressure_const * gamma * rho_ref ** (gamma - 1.0)
        )

    return F


def composition_bound_report(
    members: list[TimeSeriesField],
    idx: BesovIndex,
    theta: float,
    F: Callable[[np.ndarray], np.ndarray] | None = None,
    cutoffs: CutoffPair | None = None,
) -> FitReport:
    """Fit the composition bound

        ||F(v)|| <= C (1 + ||v||_{Linf Linf})^(floor(s)+1) ||v||

    in the block-first time norm at ``idx``.  F must vanish at 0."""
    if F is None:
        F = sound_speed_deviation()
    probe = np.asarray(F(np.zeros(2)))
    if np.max(np.abs(probe)) > 1e-14:
        raise ContractError("composition map must satisfy F(0) = 0")
    power = math.floor(idx.s) + 1
    ratios = []
    for v in members:
        grid = v.grid
        fv = TimeSeriesField(
            v.times, [Field(grid, F(snap.samples)) for snap in v.snapshots]
        )
        lhs = chemin_lerner_norm(fv, idx, theta, cutoffs)
        sup = max(snap.lp(np.inf) for snap in v.snapshots)
        rhs = (1.0 + sup) ** power * chemin_lerner_norm(v, idx, theta, cutoffs)
        ratios.append(lhs / rhs)
    return FitReport(
        "composition bound",
        np.asarray(ratios),
        {"idx": idx, "theta": theta},
    )


def two_mode_remainder_reference(
    grid: TorusGrid,
    k1: tuple[int, ...],
    k2: tuple[int, ...],
    cutoffs: CutoffPair | None = None,
) -> Field:
    """Closed-form remainder of cos(k1.x) * cos(k2.x) via profile values.

    Independent path used by the tests: blocks of a single cosine are the
    cosine scaled by the profile value at its radius, so the remainder sum
    collapses to a weighted combination of the two product cosines.
    """
    from .cutoffs import build_cutoffs

    pair = cutoffs if cutoffs is not None else build_cutoffs()
    xs = grid.meshgrid()
    two_pi = 2.0 * math.pi / grid.length
    phase1 = sum(two_pi * k * x for k, x in zip(k1, xs))
    phase2 = sum(two_pi * k * x for k, x in zip(k2, xs))
    r1 = two_pi * math.sqrt(sum(k * k for k in k1))
    r2 = two_pi * math.sqrt(sum(k * k for k in k2))

    def profile(radius: float, q: int) -> float:
        if q == -1:
            return float(pair.low_pass(radius))
        return float(pair.band_pass(radius / 2.0 ** q))

    total = 0.0
    for q in range(-1, grid.q_max + 1):
        w1 = profile(r1, q)
        if w1 == 0.0:
            continue
        w2 = sum(profile(r2, j) for j in (q - 1, q, q + 1) if j >= -1)
        total += w1 * w2
    samples = total * np.cos(phase1) * np.cos(phase2)
    return Field(grid, samples)
