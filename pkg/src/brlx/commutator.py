"""Block commutators [f, block_q] A g and their fitted mapping bounds.

The commutator of a multiplication by f with a frequency block, applied to
div g or grad g, measures how far the block is from commuting with the
material coefficients of the flow equations.  Four shapes occur:

* f scalar, g vector, A = div   -> scalar      (pressure against dilation)
* f vector, g scalar, A = grad  -> scalar      (advection of a scalar)
* f vector, g vector, A = grad  -> vector      (advection of velocity)
* f scalar, g scalar, A = grad  -> vector      (pressure gradient coupling)

All pointwise products are dealiased.  ``six_term_split`` realizes the
low/high splitting of the commutator into six structurally localized terms
whose sum reproduces it exactly, which is the backbone of the fitted
bounds below.

The fitting protocols report, per ensemble member, the smallest constant C
with  sum_q LHS_q <= C * RHS,  plus the normalized per-shell profile
c_q = LHS_q / (C * RHS), which sums to one by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .besov import (
    BesovIndex,
    besov_norm,
    besov_norm_magnitude,
)
from .blocks import DyadicBlocks, get_blocks
from .cutoffs import CutoffPair
from .errors import ContractError
from .fields import Field, TimeSeriesField, VectorField
from .grid import TorusGrid
from .paraproduct import para_spectrum_raw, remainder_spectrum_raw


class CommutatorKernel:
    """All-shell evaluator for one commutator, padded factors cached."""

    def __init__(
        self,
        f: Field | VectorField,
        g: Field | VectorField,
        op: str = "div",
        cutoffs: CutoffPair | None = None,
    ):
        if op not in ("div", "grad"):
            raise ContractError(f"operator must be 'div' or 'grad', got {op!r}")
        grid = f.grid
        if grid != g.grid:
            raise ContractError("fields live on different grids")
        self.grid = grid
        self.blocks: DyadicBlocks = get_blocks(grid, cutoffs)

        # output components as lists of (padded a, spectrum of A g piece)
        if op == "div":
            if not isinstance(g, VectorField) or not isinstance(f, Field):
                raise ContractError("div commutator takes scalar f and vector g")
            div_spec = np.zeros(grid.spectral_shape, dtype=complex)
            for ax, comp in enumerate(g.components):
                div_spec += comp.spectrum * grid.derivative_multiplier(ax)
            structure = [[(f, div_spec)]]
        else:
            if isinstance(g, Field):
                grads = [
                    g.spectrum * grid.derivative_multiplier(ax) for ax in range(grid.dim)
                ]
                if isinstance(f, Field):
                    structure = [[(f, grads[ax])] for ax in range(grid.dim)]
                else:
                    structure = [[(f.components[ax], grads[ax]) for ax in range(grid.dim)]]
            else:
                if not isinstance(f, VectorField):
                    raise ContractError("vector g with grad requires vector f")
                structure = [
                    [
                        (
                            f.components[ax],
                            comp.spectrum * grid.derivative_multiplier(ax),
                        )
                        for ax in range(grid.dim)
                    ]
                    for comp in g.components
                ]

        pads: dict[int, np.ndarray] = {}
        self._terms = []
        for comp_pairs in structure:
            entries = []
            for a, b_spec in comp_pairs:
                key = id(a)
                if key not in pads:
                    pads[key] = grid.to_padded_physical(a.spectrum)
                pad_a = pads[key]
                ab = grid.from_padded_physical(pad_a * grid.to_padded_physical(b_spec))
                entries.append((pad_a, b_spec, ab))
            self._terms.append(entries)

    @property
    def n_components(self) -> int:
        return len(self._terms)

    def component_spectra(self, q: int) -> list[np.ndarray]:
        grid, blk = self.grid, self.blocks
        out = []
        for entries in self._terms:
            acc = np.zeros(grid.spectral_shape, dtype=complex)
            for pad_a, b_spec, ab in entries:
                direct = grid.from_padded_physical(
                    pad_a * grid.to_padded_physical(blk.block_spectrum(b_spec, q))
                )
                acc += direct - blk.block_spectrum(ab, q)
            out.append(acc)
        return out

    def at(self, q: int) -> Field | VectorField:
        specs = self.component_spectra(q)
        fields = [Field.from_spectrum(self.grid, s) for s in specs]
        return fields[0] if len(fields) == 1 else VectorField(tuple(fields))

    def lp_norm(self, q: int, p: float) -> float:
        """Lp norm of the commutator at shell q (Euclidean magnitude for
        vector-valued results)."""
        specs = self.component_spectra(q)
        if p == 2.0:
            return math.sqrt(sum(self.grid.l2_from_spectrum(s) ** 2 for s in specs))
        mags = sum(self.grid.inverse(s) ** 2 for s in specs)
        return self.grid.lp_norm(np.sqrt(mags), p)

    def lp_norms(self, p: float) -> np.ndarray:
        return np.array([self.lp_norm(q, p) for q in range(-1, self.blocks.q_max + 1)])


def commutator(
    f: Field | VectorField,
    g: Field | VectorField,
    q: int,
    op: str = "div",
    cutoffs: CutoffPair | None = None,
) -> Field | VectorField:
    """f * block_q(A g) - block_q(f * A g) with dealiased products."""
    return CommutatorKernel(f, g, op, cutoffs).at(q)


# -- six-term splitting --------------------------------------------------


@dataclass(frozen=True)
class SixTermSplit:
    """The six localized pieces of a div-type commutator at shell q."""

    terms: tuple[Field, Field, Field, Field, Field, Field]
    q: int

    def total(self) -> Field:
        out = self.terms[0]
        for t in self.terms[1:]:
            out = out + t
        return out


def six_term_split(
    f: Field,
    g: VectorField,
    q: int,
    cutoffs: CutoffPair | None = None,
) -> SixTermSplit:
    """Split [f, block_q] div g into six exactly-summing pieces.

    f is cut into its low ball part and the rest; the high part goes through
    the paraproduct/remainder splitting of both products, the derivative is
    moved across the remainder, and the ball part keeps its own commutator.
    """
    grid = f.grid
    if grid != g.grid:
        raise ContractError("fields live on different grids")
    blk = get_blocks(grid, cutoffs)
    low = blk.block_spectrum(f.spectrum, -1)
    high = f.spectrum - low

    div_spec = np.zeros(grid.spectral_shape, dtype=complex)
    for ax, comp in enumerate(g.components):
        div_spec += comp.spectrum * grid.derivative_multiplier(ax)
    div_q = blk.block_spectrum(div_spec, q)

    # paraproduct-type pieces
    t1 = para_spectrum_raw(grid, blk, high, div_q) - blk.block_spectrum(
        para_spectrum_raw(grid, blk, high, div_spec), q
    )
    t2 = para_spectrum_raw(grid, blk, div_q, high)
    t3 = -blk.block_spectrum(para_spectrum_raw(grid, blk, div_spec, high), q)

    # remainder-type pieces, derivative moved across
    t4 = np.zeros(grid.spectral_shape, dtype=complex)
    t5 = np.zeros(grid.spectral_shape, dtype=complex)
    for ax, comp in enumerate(g.components):
        d_ax = grid.derivative_multiplier(ax)
        gq = blk.block_spectrum(comp.spectrum, q)
        t4 += d_ax * remainder_spectrum_raw(grid, blk, high, gq)
        t4 -= d_ax * blk.block_spectrum(remainder_spectrum_raw(grid, blk, high, comp.spectrum), q)
        dh = d_ax * high
        t5 += blk.block_spectrum(remainder_spectrum_raw(grid, blk, dh, comp.spectrum), q)
        t5 -= remainder_spectrum_raw(grid, blk, dh, gq)

    # ball part keeps its own commutator
    low_field = Field.from_spectrum(grid, low)
    t6 = CommutatorKernel(low_field, g, "div", cutoffs).component_spectra(q)[0]

    terms = tuple(Field.from_spectrum(grid, t) for t in (t1, t2, t3, t4, t5, t6))
    return SixTermSplit(terms, q)


def six_term_defect(
    f: Field, g: VectorField, q: int, cutoffs: CutoffPair | None = None
) -> float:
    """Relative L2 gap between the six-term sum and the direct commutator."""
    split = six_term_split(f, g, q, cutoffs)
    direct = commutator(f, g, q, "div", cutoffs)
    denom = direct.l2()
    gap = (split.total() - direct).l2()
    return gap / denom if denom else gap


# -- fitted bounds -------------------------------------------------------


@dataclass(frozen=True)
class CommutatorReport:
    """Fitted constants and shell profiles for one commutator bound."""

    label: str
    constants: np.ndarray           # per ensemble member
    shell_profiles: np.ndarray      # (member, shell), rows sum to 1
    notes: dict = field(default_factory=dict)

    @property
    def fitted(self) -> float:
        return float(np.max(self.constants))

    @property
    def mean(self) -> float:
        return float(np.mean(self.constants))

    def summary(self) -> str:
        return (
            f"{self.label}: fitted C = {self.fitted:.6g} "
            f"(mean {self.mean:.6g}, n = {len(self.constants)})"
        )


def _inv(e: float) -> float:
    return 0.0 if e == np.inf else 1.0 / e


def _shell_weights(q_max: int, s: float) -> np.ndarray:
    return 2.0 ** (s * np.arange(-1, q_max + 1))


def _fit(label: str, lhs_rows: list[np.ndarray], rhs_vals: list[float], notes: dict) -> CommutatorReport:
    constants, profiles = [], []
    for lhs, rhs in zip(lhs_rows, rhs_vals):
        if rhs <= 0:
            raise ContractError("degenerate right-hand side in commutator fit")
        c = float(np.sum(lhs)) / rhs
        constants.append(c)
        profiles.append(lhs / (c * rhs) if c > 0 else np.zeros_like(lhs))
    return CommutatorReport(label, np.asarray(constants), np.stack(profiles), notes)


def stationary_commutator_fit(
    members: list[tuple[Field, VectorField]],
    s: float,
    p: float,
    p1: float,
    p2: float,
    r: float = 1.0,
    cutoffs: CutoffPair | None = None,
) -> CommutatorReport:
    """Fit the gradient-weighted commutator bound (div shape).

    LHS_q = 2^(qs) ||[f, block_q] div g||_Lp ; the right-hand side couples
    the intersection norm of grad f (sum of the three component norms) with
    ||g||_B + ||grad g||_Lp1.  Requires s > 0 and 1/p = 1/p1 + 1/p2.
    """
    if not members:
        raise ContractError("empty ensemble")
    if s <= 0:
        raise ContractError("commutator bound needs s > 0")
    if abs(_inv(p) - _inv(p1) - _inv(p2)) > 1e-12:
        raise ContractError("exponents must satisfy 1/p = 1/p1 + 1/p2")
    idx_mid = BesovIndex(s - 1.0, p2, r)
    idx_zero = BesovIndex(0.0, p1, r)
    idx_g = BesovIndex(s, p2, r)
    lhs_rows, rhs_vals = [], []
    for f, g in members:
        kern = CommutatorKernel(f, g, "div", cutoffs)
        w = _shell_weights(kern.blocks.q_max, s)
        lhs_rows.append(w * kern.lp_norms(p))
        grad_f = f.gradient()
        grad_norm = (
            grad_f.grid.lp_norm(grad_f.magnitude(), p1)
            + besov_norm_magnitude(grad_f, idx_mid, cutoffs)
            + besov_norm_magnitude(grad_f, idx_zero, cutoffs)
        )
        jac = np.sqrt(
            sum(
                comp.derivative(ax).samples ** 2
                for comp in g.components
                for ax in range(g.grid.dim)
            )
        )
        g_norm = besov_norm(g, idx_g, cutoffs) + g.grid.lp_norm(jac, p1)
        rhs_vals.append(grad_norm * g_norm)
    return _fit(
        "gradient-weighted commutator bound",
        lhs_rows,
        rhs_vals,
        {"s": s, "p": p, "p1": p1, "p2": p2, "r": r},
    )


def _critical_exponents(dim: int) -> tuple[float, float]:
    if dim < 2:
        raise ContractError("critical commutator bound needs dimension >= 2")
    return 1.0 + dim / 2.0, 2.0 * dim / (dim + 2.0)


def critical_commutator_fit(
    members: list[tuple[Field, VectorField]],
    cutoffs: CutoffPair | None = None,
) -> tuple[CommutatorReport, CommutatorReport]:
    """Fit both critical-index commutator bounds (stationary form).

    Clause one handles the dilation commutator [rho, block_q] div v, clause
    two the advection commutator [v, block_q] . grad rho; both are measured
    in L^(2d/(d+2)) with the 2^(q(1+d/2)) weight against the product of the
    natural energy norms.
    """
    if not members:
        raise ContractError("empty ensemble")
    dim = members[0][0].grid.dim
    sigma, p = _critical_exponents(dim)
    idx_lo = BesovIndex(sigma - 1.0, 2.0, 1.0)
    idx_hi = BesovIndex(sigma, 2.0, 1.0)
    lhs1, rhs1, lhs2, rhs2 = [], [], [], []
    for rho, v in members:
        kern1 = CommutatorKernel(rho, v, "div", cutoffs)
        w = _shell_weights(kern1.blocks.q_max, sigma)
        lhs1.append(w * kern1.lp_norms(p))
        rhs1.append(
            besov_norm_magnitude(rho.gradient(), idx_lo, cutoffs)
            * besov_norm(v, idx_hi, cutoffs)
        )
        kern2 = CommutatorKernel(v, rho, "grad", cutoffs)
        lhs2.append(w * kern2.lp_norms(p))
        grad_v = sum(
            besov_norm_magnitude(comp.gradient(), idx_lo, cutoffs) for comp in v.components
        )
        rhs2.append(grad_v * besov_norm(rho, idx_hi, cutoffs))
    notes = {"sigma": sigma, "p": p}
    return (
        _fit("critical dilation commutator", lhs1, rhs1, notes),
        _fit("critical advection commutator", lhs2, rhs2, notes),
    )


# -- time-integrated protocols ------------------------------------------


def _series_checks(rho: TimeSeriesField, v: list[TimeSeriesField]) -> None:
    for comp in v:
        if comp.grid != rho.grid or not np.array_equal(comp.times, rho.times):
            raise ContractError("series must share grid and time axis")


def _time_norm_rows(rows: np.ndarray, times: np.ndarray, theta: float) -> np.ndarray:
    """Collapse the time axis of (time, shell) rows with an L^theta norm."""
    if theta == np.inf:
        return rows.max(axis=0)
    powers = rows ** theta
    weights = 0.5 * np.diff(times)[:, None]
    return np.sum(weights * (powers[1:] + powers[:-1]), axis=0) ** (1.0 / theta)


def _cl_norm_spectral(
    series_specs: list[np.ndarray],
    times: np.ndarray,
    blk: DyadicBlocks,
    s: float,
    theta: float,
    grad: bool = False,
) -> float:
    """Block-first time norm in (s, 2, 1) straight from spectra."""
    fn = blk.block_grad_l2_norms if grad else blk.block_l2_norms
    rows = np.stack([fn(spec) for spec in series_specs])
    collapsed = _time_norm_rows(rows, times, theta)
    return float(np.sum(_shell_weights(blk.q_max, s) * collapsed))


def critical_commutator_time_fit(
    members: list[tuple[TimeSeriesField, list[TimeSeriesField]]],
    theta: float = 2.0,
    theta_split: tuple[float, float] = (4.0, 4.0),
    cutoffs: CutoffPair | None = None,
) -> tuple[CommutatorReport, CommutatorReport]:
    """Time-integrated critical commutator bounds.

    The left side takes L^theta in time of each shell's Lp norm before the
    shell sum; the right side uses block-first time norms with exponents
    splitting 1/theta = 1/theta1 + 1/theta2.
    """
    t1, t2 = theta_split
    if abs(_inv(t1) + _inv(t2) - _inv(theta)) > 1e-12:
        raise ContractError(f"time exponents ({t1}, {t2}) do not split 1/{theta}")
    if not members:
        raise ContractError("empty ensemble")
    dim = members[0][0].grid.dim
    sigma, p = _critical_exponents(dim)
    lhs1, rhs1, lhs2, rhs2 = [], [], [], []
    for rho, v in members:
        _series_checks(rho, v)
        grid = rho.grid
        blk = get_blocks(grid, cutoffs)
        w = _shell_weights(blk.q_max, sigma)
        times = rho.times
        rows1, rows2 = [], []
        for i in range(len(times)):
            vf = VectorField(tuple(comp.snapshots[i] for comp in v))
            rows1.append(CommutatorKernel(rho.snapshots[i], vf, "div", cutoffs).lp_norms(p))
            rows2.append(CommutatorKernel(vf, rho.snapshots[i], "grad", cutoffs).lp_norms(p))
        lhs1.append(w * _time_norm_rows(np.stack(rows1), times, theta))
        lhs2.append(w * _time_norm_rows(np.stack(rows2), times, theta))

        rho_specs = [snap.spectrum for snap in rho.snapshots]
        v_specs = [[comp.snapshots[i].spectrum for i in range(len(times))] for comp in v]
        grad_rho = _cl_norm_spectral(rho_specs, times, blk, sigma - 1.0, t1, grad=True)
        v_norm = sum(_cl_norm_spectral(cs, times, blk, sigma, t2) for cs in v_specs)
        rhs1.append(grad_rho * v_norm)
        grad_v = sum(
            _cl_norm_spectral(cs, times, blk, sigma - 1.0, t1, grad=True) for cs in v_specs
        )
        rho_norm = _cl_norm_spectral(rho_specs, times, blk, sigma, t2)
        rhs2.append(grad_v * rho_norm)
    notes = {"sigma": sigma, "p": p, "theta": theta, "split": theta_split}
    return (
        _fit("critical dilation commutator (time)", lhs1, rhs1, notes),
        _fit("critical advection commutator (time)", lhs2, rhs2, notes),
    )


def transport_commutator_time_fit(
    members: list[tuple[TimeSeriesField, list[TimeSeriesField]]],
    p: float = 2.0,
    theta: float = 2.0,
    theta_split: tuple[float, float] = (4.0, 4.0),
    cutoffs: CutoffPair | None = None,
) -> CommutatorReport:
    """Fit the transport-algebra commutator bound at s = 1 + d/p.

    Both factors are measured in the same regularity; the div shape is used
    with f the scalar series and g the vector series.  For p = 2 the right
    side is evaluated spectrally.
    """
    t1, t2 = theta_split
    if abs(_inv(t1) + _inv(t2) - _inv(theta)) > 1e-12:
        raise ContractError(f"time exponents ({t1}, {t2}) do not split 1/{theta}")
    if p != 2.0:
        raise ContractError("only p = 2 is wired for the transport protocol")
    if not members:
        raise ContractError("empty ensemble")
    dim = members[0][0].grid.dim
    s = 1.0 + dim / p
    lhs_rows, rhs_vals = [], []
    for f, g in members:
        _series_checks(f, g)
        grid = f.grid
        blk = get_blocks(grid, cutoffs)
        w = _shell_weights(blk.q_max, s)
        times = f.times
        rows = []
        for i in range(len(times)):
            gv = VectorField(tuple(comp.snapshots[i] for comp in g))
            rows.append(CommutatorKernel(f.snapshots[i], gv, "div", cutoffs).lp_norms(p))
        lhs_rows.append(w * _time_norm_rows(np.stack(rows), times, theta))
        f_specs = [snap.spectrum for snap in f.snapshots]
        g_specs = [[comp.snapshots[i].spectrum for i in range(len(times))] for comp in g]
        f_norm = _cl_norm_spectral(f_specs, times, blk, s, t1)
        g_norm = sum(_cl_norm_spectral(cs, times, blk, s, t2) for cs in g_specs)
        rhs_vals.append(f_norm * g_norm)
    return _fit(
        "transport-algebra commutator bound",
        lhs_rows,
        rhs_vals,
        {"s": s, "p": p, "theta": theta, "split": theta_split},
    )


def transport_consistency_check(
    members: list[tuple[Field, VectorField]],
    p: float = 2.0,
    cutoffs: CutoffPair | None = None,
) -> dict:
    """Stationary cross-check: the gradient-weighted bound specialized to
    p1 = inf, p2 = p, s = 1 + d/p reproduces the transport-algebra shape.

    Returns both fitted constants and their ratio; the ratio should be a
    stable order-one number on smooth ensembles.
    """
    if not members:
        raise ContractError("empty ensemble")
    dim = members[0][0].grid.dim
    s = 1.0 + dim / p
    general = stationary_commutator_fit(members, s, p, np.inf, p, 1.0, cutoffs)
    idx = BesovIndex(s, p, 1.0)
    lhs_rows, rhs_vals = [], []
    for f, g in members:
        kern = CommutatorKernel(f, g, "div", cutoffs)
        w = _shell_weights(kern.blocks.q_max, s)
        lhs_rows.append(w * kern.lp_norms(p))
        rhs_vals.append(besov_norm(f, idx, cutoffs) * besov_norm(g, idx, cutoffs))
    algebra = _fit("transport-algebra commutator bound (stationary)", lhs_rows, rhs_vals, {"s": s, "p": p})
    return {
        "general": general,
        "algebra": algebra,
        "ratio": general.fitted / algebra.fitted,
    }
