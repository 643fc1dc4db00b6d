"""Diffusive-scaling experiment: the damped Euler system on the fast clock
against the limit diffusion equation on the slow clock.

A sweep runs the Euler solver to the fast horizon T = S/tau for each tau,
reindexes snapshots to slow time s = tau t, and compares the physical
density rho^tau(s) with the reference N(s) in a slightly weakened block
norm.  Alongside the error curves the report carries the two
tau-uniformity diagnostics (sup-in-s density norm, time-L2 of the scaled
momentum) and the flux-balance residual rho v / tau + grad P(rho), whose
decay is the quantitative trace of the limit mechanism.

Runs for different tau are independent; they execute serially here so
that reports are reproducible byte for byte.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import euler, pme
from .besov import BesovIndex, besov_norm
from .blocks import get_blocks
from .errors import ConfigurationError, ContractError
from .euler import EulerRun, RelaxConfig
from .fields import Field, VectorField


class BudgetWarning(UserWarning):
    """A scaled run was truncated by the step budget."""


@dataclass(frozen=True)
class SweepConfig:
    """Relaxation sweep: tau list, slow horizon, comparison norm, data.

    The shared initial data descriptor is (seed, eps, k_cap, velocity);
    every run starts from the same physical density bump.  ``base``
    supplies grid and gas constants; its tau, dt and t_final are replaced
    per run.  velocity "random" probes the relaxation layer as well (the
    error then scales like tau); "zero" is the well-prepared case whose
    flux residual trend is cleanest.
    """

    base: RelaxConfig = RelaxConfig(tau=1.0)
    taus: tuple = tuple(2.0 ** -j for j in range(1, 8))
    horizon: float = 1.0
    delta: float = 0.5
    eps: float = 1e-2
    seed: int = 0
    velocity: str = "random"
    k_cap: float | None = None
    snapshots: int = 32
    step_budget: int = 400_000
    reference_refine: int = 2

    def __post_init__(self):
        taus = tuple(float(t) for t in self.taus)
        object.__setattr__(self, "taus", taus)
        if not taus:
            raise ConfigurationError("tau list must not be empty")
        if any(not 0.0 < t <= 1.0 for t in taus):
            raise ConfigurationError("tau values must lie in (0, 1]")
        if any(b <= a for a, b in zip(taus[1:], taus[:-1])):
            raise ConfigurationError("tau values must be strictly decreasing")
        if not 0.0 < self.delta < 1.0:
            raise ConfigurationError(f"delta must be in (0, 1), got {self.delta}")
        if not self.horizon > 0.0:
            raise ConfigurationError("horizon must be positive")
        if self.snapshots < 2:
            raise ConfigurationError("need at least 2 snapshot intervals")
        if self.step_budget < self.snapshots:
            raise ConfigurationError("step budget below one step per snapshot")
        if self.reference_refine < 1:
            raise ConfigurationError("reference_refine must be >= 1")

    @property
    def comparison_index(self) -> BesovIndex:
        return BesovIndex(self.base.smoothness_index - self.delta, 2.0, 1.0)

    @property
    def slow_times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.snapshots + 1)

    def euler_config(self, tau: float) -> RelaxConfig:
        return replace(self.base, tau=tau, t_final=self.horizon / tau, dt=None)

    def initial_state(self, tau: float) -> euler.EulerState:
        return euler.initial_data(
            self.euler_config(tau),
            seed=self.seed,
            eps=self.eps,
            k_cap=self.k_cap,
            velocity=self.velocity,
        )


@dataclass
class ScaledRun:
    """One Euler trajectory reindexed to slow time.

    ``rho`` holds the physical density at the slow snapshot times,
    ``mom_over_tau`` the scaled momentum rho v / tau, and ``flux_l2`` the
    pointwise-in-time L2 norm of rho v / tau + grad P(rho) at those times.
    The three scalars ``uniform_sup``, ``dissipation`` and
    ``flux_space_time`` are accumulated per step on the fast clock, so the
    initial relaxation layer (width tau^2 in slow time, invisible to any
    snapshot grid) is resolved exactly.
    """

    tau: float
    cfg: RelaxConfig
    euler_run: EulerRun
    slow_times: np.ndarray
    rho: list
    mom_over_tau: list
    flux_l2: np.ndarray
    uniform_sup: float
    dissipation: float
    flux_space_time: float
    partial: bool

    @property
    def s_reached(self) -> float:
        return float(self.slow_times[-1])


class _SlowDiagnostics:
    """Per-step accumulator for the tau-uniformity quantities.

    Tracks sup in s of the sigma-index block norm of rho - rho_ref and the
    slow-time L2 norms of the sigma-index block norm of rho v / tau and of
    the L2 flux residual, all by fast-time trapezoid.
    """

    def __init__(self, cfg: RelaxConfig, tau: float):
        self.cfg = cfg
        self.tau = tau
        self.grid = cfg.grid
        self.blocks = get_blocks(self.grid)
        sigma = cfg.smoothness_index
        self.weights = 2.0 ** (sigma * np.arange(-1, self.blocks.q_max + 1))
        self.sup = 0.0
        self.int_mom = 0.0
        self.int_flux = 0.0
        self._prev = None
        self._prev_t = None

    def __call__(self, t, r_spec, v_specs):
        grid = self.grid
        rho = euler.desymmetrize(Field.from_spectrum(grid, r_spec), self.cfg)
        rho_spec = rho.spectrum
        dev = rho_spec.copy()
        dev[(0,) * grid.dim] -= self.cfg.rho_ref * grid.n ** grid.dim
        self.sup = max(
            self.sup, float(np.sum(self.weights * self.blocks.block_l2_norms(dev)))
        )

        pad_rho = grid.to_padded_physical(rho_spec)
        p_spec = grid.from_padded_physical(self.cfg.pressure_const * pad_rho ** self.cfg.gamma)
        mom_sq = None
        flux_sq = 0.0
        for ax, v_spec in enumerate(v_specs):
            m_spec = grid.from_padded_physical(pad_rho * grid.to_padded_physical(v_spec))
            m_spec /= self.tau
            norms = self.blocks.block_l2_norms(m_spec)
            mom_sq = norms ** 2 if mom_sq is None else mom_sq + norms ** 2
            resid = m_spec + grid.derivative_multiplier(ax) * p_spec
            flux_sq += grid.l2_from_spectrum(resid) ** 2
        mom_norm = float(np.sum(self.weights * np.sqrt(mom_sq)))
        if self._prev is not None:
            dt = t - self._prev_t
            pm, pf = self._prev
            self.int_mom += 0.5 * dt * (pm ** 2 + mom_norm ** 2)
            self.int_flux += 0.5 * dt * (pf ** 2 + flux_sq)
        self._prev = (mom_norm, math.sqrt(flux_sq))
        self._prev_t = t

    def totals(self) -> tuple:
        # slow-time L2: ds = tau dt
        return (
            self.sup,
            math.sqrt(self.tau * self.int_mom),
            math.sqrt(self.tau * self.int_flux),
        )


def _pressure_spec(grid, cfg: RelaxConfig, rho_spec):
    pad = grid.to_padded_physical(rho_spec)
    return grid.from_padded_physical(cfg.pressure_const * pad ** cfg.gamma)


def _scaled_snapshot(state, cfg: RelaxConfig, tau: float):
    """Physical density, scaled momentum and flux residual for one state."""
    grid = state.rho.grid
    rho = euler.desymmetrize(state.rho, cfg)
    rho_spec = rho.spectrum
    mom = []
    flux_sq = 0.0
    p_spec = _pressure_spec(grid, cfg, rho_spec)
    for ax, comp in enumerate(state.v.components):
        m_spec = grid.dealiased_product(rho_spec, comp.spectrum) / tau
        mom.append(Field.from_spectrum(grid, m_spec))
        resid = m_spec + grid.derivative_multiplier(ax) * p_spec
        flux_sq += grid.l2_from_spectrum(resid) ** 2
    return rho, VectorField(tuple(mom)), math.sqrt(flux_sq)


def run_scaled(tau: float, sweep: SweepConfig) -> ScaledRun:
    """Integrate one tau to fast time S/tau and reindex to slow time.

    The step count is rounded up so snapshots land exactly on the uniform
    slow grid.  If it would exceed the budget the run is truncated to the
    affordable prefix of that grid and flagged partial (with a warning).
    """
    cfg = sweep.euler_config(tau)
    state0 = sweep.initial_state(tau)
    vmax0 = float(np.max(state0.v.magnitude()))
    dt_auto = euler.default_dt(cfg, vmax0)
    m = sweep.snapshots
    per_snap = max(1, math.ceil(cfg.t_final / (m * dt_auto) - 1e-9))
    n_steps = per_snap * m
    partial = False
    if n_steps > sweep.step_budget:
        partial = True
        intervals = max(1, sweep.step_budget // per_snap)
        n_steps = per_snap * intervals
        warnings.warn(
            f"tau={tau:g} needs {per_snap * m} steps, budget {sweep.step_budget}; "
            f"truncating to slow time {tau * n_steps * cfg.t_final / (per_snap * m):g}",
            BudgetWarning,
            stacklevel=2,
        )
    dt = cfg.t_final / (per_snap * m)
    cfg_run = replace(cfg, t_final=n_steps * dt, dt=dt)
    diag = _SlowDiagnostics(cfg, tau)
    out = euler.run(cfg_run, state=state0, dt=dt, snapshot_stride=per_snap, observer=diag)

    slow_times, rho, mom, flux = [], [], [], []
    for st in out.states:
        r, mv, f = _scaled_snapshot(st, cfg, tau)
        slow_times.append(tau * st.t)
        rho.append(r)
        mom.append(mv)
        flux.append(f)
    sup, dissipation, flux_st = diag.totals()
    return ScaledRun(
        tau=tau,
        cfg=cfg,
        euler_run=out,
        slow_times=np.asarray(slow_times),
        rho=rho,
        mom_over_tau=mom,
        flux_l2=np.asarray(flux),
        uniform_sup=sup,
        dissipation=dissipation,
        flux_space_time=flux_st,
        partial=partial,
    )


def reference_solution(sweep: SweepConfig) -> pme.PmeRun:
    """Limit equation solved on the full slow grid from the same density."""
    cfg0 = sweep.euler_config(sweep.taus[0])
    rho0 = euler.desymmetrize(sweep.initial_state(sweep.taus[0]).rho, cfg0)
    pcfg = pme.PmeConfig.from_relax(cfg0, s_final=sweep.horizon)
    pcfg = replace(pcfg, ds=pcfg.default_ds / sweep.reference_refine)
    return pme.run(pcfg, state=pme.PmeState(rho0, 0.0), s_values=sweep.slow_times)


@dataclass
class ConvergenceReport:
    """Error curves and uniformity diagnostics for one sweep.

    ``uniform_sup`` is sup over s of the B^sigma norm of rho - rho_ref;
    ``uniform_dissipation`` the slow-time L2 norm of the B^sigma norm of
    rho v / tau; both come from per-step fast-clock quadrature and must
    admit one tau-independent bound.  ``limit_bound_constant`` is the
    fitted constant of the reference bound |N(s) - rho_ref| <= C
    |(rho0, v0)| in the same block norms.
    """

    taus: np.ndarray
    slow_times: np.ndarray
    error_curves: list
    sup_errors: np.ndarray
    fitted_order: float | None
    uniform_sup: np.ndarray
    uniform_dissipation: np.ndarray
    flux_space_time: np.ndarray
    limit_bound_constant: float
    initial_norm: float
    partial: np.ndarray

    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.sup_errors) < 0.0))

    def rows(self) -> list:
        out = []
        for tau, curve in zip(self.taus, self.error_curves):
            for s, e in zip(self.slow_times[: len(curve)], curve):
                out.append((float(tau), float(s), float(e)))
        return out

    def summary(self) -> str:
        lines = ["tau        sup error      uniform sup    dissipation    flux L2"]
        for i, tau in enumerate(self.taus):
            flag = " (partial)" if self.partial[i] else ""
            lines.append(
                f"{tau:<10.6g} {self.sup_errors[i]:<14.6g} {self.uniform_sup[i]:<14.6g} "
                f"{self.uniform_dissipation[i]:<14.6g} {self.flux_space_time[i]:.6g}{flag}"
            )
        order = "n/a" if self.fitted_order is None else f"{self.fitted_order:.3f}"
        lines.append(f"fitted order {order}; limit bound constant {self.limit_bound_constant:.6g}")
        return "\n".join(lines)


def compare(runs: list, reference: pme.PmeRun, sweep: SweepConfig) -> ConvergenceReport:
    """Error curves against the reference plus Theorem-style diagnostics."""
    if not runs:
        raise ContractError("no runs to compare")
    grid = reference.states[0].N.grid
    rho0 = runs[0].rho[0]
    gap = float(np.max(np.abs(rho0.samples - reference.states[0].N.samples)))
    if gap > 1e-10 * sweep.base.rho_ref:
        raise ContractError(f"initial data mismatch: sup gap {gap:g}")

    idx_cmp = sweep.comparison_index
    idx_full = BesovIndex(sweep.base.smoothness_index, 2.0, 1.0)

    error_curves, sup_errors = [], []
    for rn in runs:
        curve = np.empty(len(rn.rho))
        for j in range(len(rn.rho)):
            curve[j] = besov_norm(rn.rho[j] - reference.states[j].N, idx_cmp)
        error_curves.append(curve)
        sup_errors.append(float(np.max(curve)))
    uniform_sup = [rn.uniform_sup for rn in runs]
    uniform_diss = [rn.dissipation for rn in runs]
    flux_st = [rn.flux_space_time for rn in runs]

    sup_errors = np.asarray(sup_errors)
    taus = np.asarray([rn.tau for rn in runs])
    if np.all(sup_errors > 0.0) and len(runs) >= 2:
        order = float(np.polyfit(np.log(taus), np.log(sup_errors), 1)[0])
    else:
        order = None

    v0 = sweep.initial_state(taus[0]).v
    init = besov_norm(
        Field.from_spectrum(grid, _zero_mean(rho0, sweep.base.rho_ref)), idx_full
    ) + besov_norm(v0, idx_full)
    ref_sup = max(
        besov_norm(Field.from_spectrum(grid, _zero_mean(st.N, sweep.base.rho_ref)), idx_full)
        for st in reference.states
    )
    return ConvergenceReport(
        taus=taus,
        slow_times=sweep.slow_times,
        error_curves=error_curves,
        sup_errors=sup_errors,
        fitted_order=order,
        uniform_sup=np.asarray(uniform_sup),
        uniform_dissipation=np.asarray(uniform_diss),
        flux_space_time=np.asarray(flux_st),
        limit_bound_constant=ref_sup / init if init > 0.0 else 0.0,
        initial_norm=init,
        partial=np.asarray([rn.partial for rn in runs]),
    )


def _zero_mean(f: Field, rho_ref: float) -> np.ndarray:
    spec = f.spectrum.copy()
    spec[(0,) * f.grid.dim] -= rho_ref * f.grid.n ** f.grid.dim
    return spec


def run_sweep(sweep: SweepConfig) -> tuple:
    """All scaled runs, the shared reference, and the comparison report."""
    runs = [run_scaled(tau, sweep) for tau in sweep.taus]
    reference = reference_solution(sweep)
    report = compare(runs, reference, sweep)
    return runs, reference, report
