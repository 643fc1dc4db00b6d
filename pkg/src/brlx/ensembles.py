"""Reproducible random field ensembles for the verification suites.

Fields are mean-zero Gaussian random fields with an isotropic power-law
spectrum |k|^(-(s + d/2 + 0.1)), truncated to the radial dealiased band and
normalized to unit L2 norm.  Drawing the coefficients on a coarse lattice
and embedding them into a finer grid reproduces the same continuum field at
both resolutions, which is what the refinement-stability protocols compare.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError
from .fields import Field, TimeSeriesField, VectorField
from .grid import TorusGrid

DEFAULT_SEED = 1234
DEFAULT_COUNT = 20


def spectral_slope(s: float, dim: int) -> float:
    return s + dim / 2.0 + 0.1


def embed_spectrum(src: TorusGrid, dst: TorusGrid, spectrum: np.ndarray) -> np.ndarray:
    """Place a coarse half-spectrum inside a finer grid's layout.

    Preserves the continuum field (coefficients rescale with the forward
    transform's N^d factor).  Per-axis Nyquist entries of the source are
    dropped.
    """
    if src.dim != dst.dim or src.length != dst.length or dst.n < src.n:
        raise ContractError("destination grid must refine the source grid")
    if dst.n == src.n:
        return spectrum.copy()
    n, m = src.n, dst.n
    idx_src, idx_dst = [], []
    for ax in range(src.dim):
        if ax == src.dim - 1:
            idx_src.append(np.arange(n // 2))
            idx_dst.append(np.arange(n // 2))
        else:
            idx_src.append(np.concatenate([np.arange(n // 2), np.arange(n // 2 + 1, n)]))
            idx_dst.append(np.concatenate([np.arange(n // 2), np.arange(m - n // 2 + 1, m)]))
    out = np.zeros(dst.spectral_shape, dtype=complex)
    out[np.ix_(*idx_dst)] = spectrum[np.ix_(*idx_src)] * (m / n) ** src.dim
    return out


def gaussian_field(
    grid: TorusGrid,
    s: float,
    rng: np.random.Generator,
    base_n: int | None = None,
) -> Field:
    """One unit-L2 random field with the |k|^-(s + d/2 + 0.1) spectrum."""
    base = grid if base_n is None else TorusGrid(grid.dim, base_n, grid.length)
    noise = rng.standard_normal(base.shape)
    spec = base.forward(noise)
    k = base.k_mag
    weight = np.zeros_like(k)
    nonzero = k > 0
    weight[nonzero] = k[nonzero] ** (-spectral_slope(s, grid.dim))
    weight[~base.band_mask] = 0.0
    spec = spec * weight
    if base is not grid:
        spec = embed_spectrum(base, grid, spec)
    f = Field.from_spectrum(grid, spec)
    norm = f.l2()
    if norm == 0.0:
        raise ContractError("degenerate random field (zero norm)")
    return f * (1.0 / norm)


def gaussian_vector(
    grid: TorusGrid,
    s: float,
    rng: np.random.Generator,
    base_n: int | None = None,
) -> VectorField:
    return VectorField(tuple(gaussian_field(grid, s, rng, base_n) for _ in range(grid.dim)))


def scalar_ensemble(
    grid: TorusGrid,
    s: float,
    count: int = DEFAULT_COUNT,
    seed: int = DEFAULT_SEED,
    base_n: int | None = None,
) -> list[Field]:
    rng = np.random.default_rng(seed)
    return [gaussian_field(grid, s, rng, base_n) for _ in range(count)]


def pair_ensemble(
    grid: TorusGrid,
    s1: float,
    s2: float,
    count: int = DEFAULT_COUNT,
    seed: int = DEFAULT_SEED,
    base_n: int | None = None,
) -> list[tuple[Field, Field]]:
    rng = np.random.default_rng(seed)
    return [
        (gaussian_field(grid, s1, rng, base_n), gaussian_field(grid, s2, rng, base_n))
        for _ in range(count)
    ]


def scalar_vector_ensemble(
    grid: TorusGrid,
    s: float,
    count: int = DEFAULT_COUNT,
    seed: int = DEFAULT_SEED,
    base_n: int | None = None,
) -> list[tuple[Field, VectorField]]:
    rng = np.random.default_rng(seed)
    return [
        (gaussian_field(grid, s, rng, base_n), gaussian_vector(grid, s, rng, base_n))
        for _ in range(count)
    ]


def modulated_series(
    grid: TorusGrid,
    s: float,
    rng: np.random.Generator,
    times: np.ndarray | None = None,
    base_n: int | None = None,
) -> TimeSeriesField:
    """Smoothly rotating combination of two random fields, for time norms."""
    if times is None:
        times = np.linspace(0.0, 1.0, 9)
    f = gaussian_field(grid, s, rng, base_n)
    g = gaussian_field(grid, s, rng, base_n)
    omega = float(rng.uniform(1.0, 3.0))
    snaps = [np.cos(omega * t) * f + np.sin(omega * t) * g for t in times]
    return TimeSeriesField(times, snaps)


def series_ensemble(
    grid: TorusGrid,
    s: float,
    count: int = DEFAULT_COUNT,
    seed: int = DEFAULT_SEED,
    times: np.ndarray | None = None,
    base_n: int | None = None,
) -> list[TimeSeriesField]:
    rng = np.random.default_rng(seed)
    return [modulated_series(grid, s, rng, times, base_n) for _ in range(count)]


def series_pair_ensemble(
    grid: TorusGrid,
    s: float,
    count: int = DEFAULT_COUNT,
    seed: int = DEFAULT_SEED,
    times: np.ndarray | None = None,
    base_n: int | None = None,
) -> list[tuple[TimeSeriesField, list[TimeSeriesField]]]:
    """Scalar series paired with one series per velocity component."""
    rng = np.random.default_rng(seed)
    return [
        (
            modulated_series(grid, s, rng, times, base_n),
            [modulated_series(grid, s, rng, times, base_n) for _ in range(grid.dim)],
        )
        for _ in range(count)
    ]


def band_limited_bump(
    grid: TorusGrid,
    seed: int,
    k_cap: float,
    amplitude: float = 1.0,
) -> Field:
    """Mean-zero random field with modes only at 0 < |k| <= k_cap, sup norm
    scaled to ``amplitude``.  Used as initial data for the flow solvers."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(grid.shape)
    spec = grid.forward(noise)
    mask = (grid.k_mag > 0) & (grid.k_mag <= k_cap + 1e-12)
    spec = np.where(mask, spec, 0.0)
    f = Field.from_spectrum(grid, spec)
    peak = f.lp(np.inf)
    if peak == 0.0:
        raise ContractError(f"no modes inside |k| <= {k_cap}")
    return f * (amplitude / peak)
