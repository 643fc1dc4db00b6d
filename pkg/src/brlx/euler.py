"""Relaxed Euler system in sound-speed variables, with friction -v/tau.

The state is the pair (rho, v) where rho is the symmetrized density
variable (a scaled sound-speed deviation; see ``symmetrize``) and v the
velocity.  The evolution is

    d rho/dt + c0 div v = -(v . grad) rho - h rho div v
    d v/dt   + c0 grad rho + v/tau = -(v . grad) v - h rho grad rho

with c0 the reference sound speed and h = (gamma - 1)/2.  Time stepping is
Strang splitting: the friction flow is applied exactly as a factor
exp(-dt/(2 tau)) on either side of an SSP-RK3 step of the remaining terms,
so stiffness in tau never restricts the step size.

All products are evaluated through padded transforms, so the discrete
flow is the exact Galerkin dynamics on the represented modes and the
per-shell energy bookkeeping closes to time-discretization error only.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .blocks import DyadicBlocks, get_blocks
from .ensembles import band_limited_bump
from .errors import ConfigurationError, ContractError, SolverAbort
from .fields import Field, VectorField
from .grid import TorusGrid

# SSP-RK3 is stable on the imaginary axis up to |z| = sqrt(3); the largest
# advective frequency on the grid is (c0 + max|v|) times the corner radius.
_RK3_IMAG_LIMIT = math.sqrt(3.0)


@dataclass(frozen=True)
class RelaxConfig:
    """Physical and numerical parameters of one relaxation run."""

    tau: float
    gamma: float = 2.0
    pressure_const: float = 0.5
    rho_ref: float = 1.0
    dim: int = 2
    n: int = 64
    length: float = 2.0 * math.pi
    dt: float | None = None
    t_final: float = 1.0
    cfl: float = 0.85
    dealias: bool = True
    conserve_mass: bool = True
    allow_dim1: bool = False

    def __post_init__(self):
        if not 0.0 < self.tau <= 1.0:
            raise ConfigurationError(f"tau must lie in (0, 1], got {self.tau}")
        if self.gamma < 1.0:
            raise ConfigurationError(f"gamma must be >= 1, got {self.gamma}")
        if self.pressure_const <= 0.0:
            raise ConfigurationError("pressure constant must be positive")
        if self.rho_ref <= 0.0:
            raise ConfigurationError("reference density must be positive")
        if self.dim == 1 and not self.allow_dim1:
            raise ConfigurationError(
                "dimension 1 is outside the supported regime; "
                "set allow_dim1=True for debugging runs"
            )
        if not 0.0 < self.cfl <= 1.0:
            raise ConfigurationError("cfl must lie in (0, 1]")
        if self.dt is not None and self.dt <= 0.0:
            raise ConfigurationError("dt must be positive")
        if self.t_final <= 0.0:
            raise ConfigurationError("t_final must be positive")

    @property
    def sound_speed(self) -> float:
        """Reference sound speed sqrt(P'(rho_ref)) for P = A rho^gamma."""
        a, g = self.pressure_const, self.gamma
        return math.sqrt(a * g) * self.rho_ref ** ((g - 1.0) / 2.0)

    @property
    def half_slope(self) -> float:
        return 0.5 * (self.gamma - 1.0)

    @property
    def smoothness_index(self) -> float:
        """Critical regularity 1 + d/2 used by the energy functional."""
        return 1.0 + self.dim / 2.0

    @property
    def grid(self) -> TorusGrid:
        return TorusGrid(self.dim, self.n, self.length)


def symmetrize(rho: Field, cfg: RelaxConfig) -> Field:
    """Map the physical density to the sound-speed variable.

    For gamma > 1 this is 2/(gamma-1) (sqrt(P'(rho)) - c0); the isothermal
    case gamma = 1 degenerates to the logarithmic variable sqrt(A) log(rho/rho_ref).
    """
    r = rho.samples
    if np.any(r <= 0.0):
        raise ContractError("density must be positive pointwise")
    a, g = cfg.pressure_const, cfg.gamma
    if g == 1.0:
        out = math.sqrt(a) * (np.log(r) - math.log(cfg.rho_ref))
    else:
        speed = np.sqrt(a * g) * r ** ((g - 1.0) / 2.0)
        out = (speed - cfg.sound_speed) * (2.0 / (g - 1.0))
    return Field(rho.grid, out)


def desymmetrize(rho_sym: Field, cfg: RelaxConfig) -> Field:
    """Exact inverse of ``symmetrize``."""
    a, g = cfg.pressure_const, cfg.gamma
    u = rho_sym.samples
    if g == 1.0:
        out = cfg.rho_ref * np.exp(u / math.sqrt(a))
    else:
        speed = cfg.sound_speed + 0.5 * (g - 1.0) * u
        if np.any(speed <= 0.0):
            raise ContractError("state maps to nonpositive density")
        out = (speed * speed / (a * g)) ** (1.0 / (g - 1.0))
    return Field(rho_sym.grid, out)


@dataclass(frozen=True)
class EulerState:
    """Symmetrized density deviation, velocity, and current time."""

    rho: Field
    v: VectorField
    t: float = 0.0

    def __post_init__(self):
        if self.rho.grid != self.v.grid:
            raise ContractError("rho and v live on different grids")


def vacuum_margin(state: EulerState, cfg: RelaxConfig) -> float:
    """Pointwise minimum of the sound speed (gamma-1)/2 rho + c0.

    Positive means the state stays away from vacuum; the stepper aborts
    below 0.1 c0.  For gamma = 1 the margin is identically c0.
    """
    if cfg.gamma == 1.0:
        return cfg.sound_speed
    return float(np.min(cfg.half_slope * state.rho.samples + cfg.sound_speed))


def mass(state: EulerState, cfg: RelaxConfig) -> float:
    """Integral of the physical density, conserved by the continuum flow."""
    rho = desymmetrize(state.rho, cfg)
    return state.rho.grid.integrate(rho.samples)


def stable_dt(cfg: RelaxConfig, vmax: float = 0.0) -> float:
    """Largest step the transport stage tolerates at velocity bound vmax."""
    grid = cfg.grid
    return _RK3_IMAG_LIMIT / ((cfg.sound_speed + vmax) * grid.corner_radius)


def default_dt(cfg: RelaxConfig, vmax: float = 0.0) -> float:
    """tau/4 unless the advective stability bound is tighter."""
    return min(cfg.tau / 4.0, cfg.cfl * stable_dt(cfg, vmax))


@dataclass(frozen=True)
class RhsParts:
    """Non-stiff tendency plus the stiff friction term kept separate."""

    d_rho: Field
    d_v: VectorField
    stiff: VectorField

    def total_v(self) -> VectorField:
        return self.d_v + self.stiff


class _Stepper:
    """Spectral-space integrator core; owns multipliers and scratch logic."""

    def __init__(self, cfg: RelaxConfig):
        self.cfg = cfg
        self.grid = cfg.grid
        self.deriv = [self.grid.derivative_multiplier(ax) for ax in range(cfg.dim)]

    def _product(self, pa, pb):
        # factors arrive already padded (or plain samples when dealiasing
        # is disabled); the product stays in that representation
        return pa * pb

    def _to_phys(self, spec):
        g = self.grid
        return g.to_padded_physical(spec) if self.cfg.dealias else g.inverse(spec)

    def _from_phys(self, samples):
        g = self.grid
        return g.from_padded_physical(samples) if self.cfg.dealias else g.forward(samples)

    def rhs_spec(self, r_spec, v_specs):
        cfg, d = self.cfg, self.cfg.dim
        c0, h = cfg.sound_speed, cfg.half_slope
        grad_r = [m * r_spec for m in self.deriv]
        jac = [[m * vs for m in self.deriv] for vs in v_specs]
        div_spec = jac[0][0].copy()
        for i in range(1, d):
            div_spec += jac[i][i]

        pr = self._to_phys(r_spec)
        pv = [self._to_phys(vs) for vs in v_specs]
        pgr = [self._to_phys(s) for s in grad_r]
        pjac = [[self._to_phys(jac[i][j]) for j in range(d)] for i in range(d)]

        adv_r = sum(self._product(pv[j], pgr[j]) for j in range(d))
        pdiv = sum(pjac[i][i] for i in range(d))
        d_r = -self._from_phys(adv_r + h * self._product(pr, pdiv)) - c0 * div_spec

        d_v = []
        for i in range(d):
            adv_i = sum(self._product(pv[j], pjac[i][j]) for j in range(d))
            nl = adv_i + h * self._product(pr, pgr[i])
            d_v.append(-self._from_phys(nl) - c0 * grad_r[i])
        return d_r, d_v

    def transport_step(self, r_spec, v_specs, dt):
        # Shu-Osher SSP-RK3
        k1r, k1v = self.rhs_spec(r_spec, v_specs)
        r1 = r_spec + dt * k1r
        v1 = [v + dt * k for v, k in zip(v_specs, k1v)]
        k2r, k2v = self.rhs_spec(r1, v1)
        r2 = 0.75 * r_spec + 0.25 * (r1 + dt * k2r)
        v2 = [0.75 * v + 0.25 * (w + dt * k) for v, w, k in zip(v_specs, v1, k2v)]
        k3r, k3v = self.rhs_spec(r2, v2)
        r_new = r_spec / 3.0 + (2.0 / 3.0) * (r2 + dt * k3r)
        v_new = [v / 3.0 + (2.0 / 3.0) * (w + dt * k) for v, w, k in zip(v_specs, v2, k3v)]
        return r_new, v_new

    def strang_step(self, r_spec, v_specs, dt):
        decay = math.exp(-0.5 * dt / self.cfg.tau)
        v_specs = [decay * v for v in v_specs]
        r_spec, v_specs = self.transport_step(r_spec, v_specs, dt)
        return r_spec, [decay * v for v in v_specs]

    def _density(self, samples):
        cfg = self.cfg
        a, g = cfg.pressure_const, cfg.gamma
        if g == 1.0:
            return cfg.rho_ref * np.exp(samples / math.sqrt(a))
        speed = cfg.sound_speed + cfg.half_slope * samples
        return (speed * speed / (a * g)) ** (1.0 / (g - 1.0))

    def project_mass(self, r_spec, target):
        """Shift the zero mode of rho so the physical mass matches target.

        The exact dynamics conserves the mass; the integrator leaks it at
        third order in dt, and this scalar Newton solve puts it back.  The
        correction is far below the scheme's own local error.
        """
        grid = self.grid
        samples = grid.inverse(r_spec)
        cell = (grid.length / grid.n) ** grid.dim
        shift = 0.0
        for _ in range(6):
            rho = self._density(samples + shift)
            gap = float(np.sum(rho)) * cell - target
            if abs(gap) <= 1e-15 * abs(target):
                break
            # d rho / d varrho is rho/speed for gamma > 1, rho/sqrt(A) at gamma = 1
            if self.cfg.gamma == 1.0:
                deriv = rho / math.sqrt(self.cfg.pressure_const)
            else:
                speed = self.cfg.sound_speed + self.cfg.half_slope * (samples + shift)
                deriv = rho / speed
            shift -= gap / (float(np.sum(deriv)) * cell)
        if shift != 0.0:
            r_spec = r_spec.copy()
            r_spec[(0,) * grid.dim] += shift * grid.n ** grid.dim
        return r_spec

    def advance(self, r_spec, v_specs, dt, mass_target=None):
        r_spec, v_specs = self.strang_step(r_spec, v_specs, dt)
        if self.cfg.conserve_mass and mass_target is not None:
            r_spec = self.project_mass(r_spec, mass_target)
        return r_spec, v_specs


def relaxation_flow(v: VectorField, dt: float, tau: float) -> VectorField:
    """Exact flow of dv/dt = -v/tau over time dt."""
    decay = math.exp(-dt / tau)
    return VectorField(tuple(c * decay for c in v.components))


def _check_step_size(cfg: RelaxConfig, dt: float, vmax: float):
    limit = stable_dt(cfg, vmax)
    if dt > limit * (1.0 + 1e-12):
        raise ConfigurationError(
            f"dt = {dt:.3e} exceeds the transport stability bound {limit:.3e}"
        )


def rhs(state: EulerState, cfg: RelaxConfig) -> RhsParts:
    """Tendency of the system at ``state``; friction reported separately."""
    if vacuum_margin(state, cfg) < 0.1 * cfg.sound_speed:
        raise SolverAbort("state too close to vacuum", t=state.t)
    stepper = _Stepper(cfg)
    d_r, d_v = stepper.rhs_spec(
        state.rho.spectrum, [c.spectrum for c in state.v.components]
    )
    grid = state.rho.grid
    return RhsParts(
        Field.from_spectrum(grid, d_r),
        VectorField(tuple(Field.from_spectrum(grid, s) for s in d_v)),
        VectorField(tuple(c * (-1.0 / cfg.tau) for c in state.v.components)),
    )


def step(state: EulerState, cfg: RelaxConfig, dt: float | None = None) -> EulerState:
    """Advance one Strang step; guards stability, vacuum, and finiteness."""
    if dt is None:
        if cfg.dt is None:
            raise ConfigurationError("no step size: set cfg.dt or pass dt")
        dt = cfg.dt
    vmax = float(np.max(state.v.magnitude())) if state.v.components else 0.0
    _check_step_size(cfg, dt, vmax)
    if vacuum_margin(state, cfg) < 0.1 * cfg.sound_speed:
        raise SolverAbort("state too close to vacuum", t=state.t)
    stepper = _Stepper(cfg)
    target = mass(state, cfg) if cfg.conserve_mass else None
    r, v = stepper.advance(
        state.rho.spectrum, [c.spectrum for c in state.v.components], dt, target
    )
    if not np.all(np.isfinite(r)) or not all(np.all(np.isfinite(c)) for c in v):
        raise SolverAbort("non-finite values produced", t=state.t + dt)
    grid = state.rho.grid
    return EulerState(
        Field.from_spectrum(grid, r),
        VectorField(tuple(Field.from_spectrum(grid, s) for s in v)),
        state.t + dt,
    )


def initial_data(
    cfg: RelaxConfig,
    seed: int = 0,
    eps: float = 1e-2,
    k_cap: float | None = None,
    velocity: str = "random",
) -> EulerState:
    """Small smooth data: rho = rho_ref (1 + eps bump), v = eps bump or 0.

    The perturbation is band-limited to |k| <= k_cap (default: the low
    frequency shells, capped at the grid's dealiasing band).
    """
    grid = cfg.grid
    if k_cap is None:
        k_cap = min(8.0 / 3.0 * 8.0, grid.band_radius)
    bump = band_limited_bump(grid, seed, k_cap, amplitude=eps)
    rho_phys = Field(grid, cfg.rho_ref * (1.0 + bump.samples))
    rho_sym = symmetrize(rho_phys, cfg)
    if velocity == "zero":
        v = VectorField.zero(grid)
    elif velocity == "random":
        v = VectorField(
            tuple(
                band_limited_bump(grid, seed + 101 + ax, k_cap, amplitude=eps)
                for ax in range(cfg.dim)
            )
        )
    else:
        raise ConfigurationError(f"unknown velocity mode {velocity!r}")
    return EulerState(rho_sym, v, 0.0)


# -- runs and online norm accumulation -----------------------------------


@dataclass
class EulerRun:
    """Trajectory snapshots plus the accumulated energy functional."""

    cfg: RelaxConfig
    dt: float
    states: list
    step_count: int
    inst_norms: np.ndarray          # per-step B-norm of (rho, v)
    times: np.ndarray               # per-step times matching inst_norms
    mass_history: np.ndarray        # at snapshot times
    functional: float
    functional_parts: dict

    @property
    def final(self) -> EulerState:
        return self.states[-1]

    def mass_drift(self) -> float:
        m0 = self.mass_history[0]
        scale = max(abs(m0), 1e-300)
        return float(np.max(np.abs(self.mass_history - m0)) / scale)


class _FunctionalAccumulator:
    """Running sup / integral block norms for the damping-uniform functional.

    The three pieces are the per-block sup in time of the (rho, v) block
    norms, the time-L2 of the v block norms against the weight 2^(q sigma),
    and the time-L2 of the grad-rho block norms one weight down, scaled by
    tau^(-1/2) and tau^(1/2) respectively.
    """

    def __init__(self, cfg: RelaxConfig, blocks: DyadicBlocks):
        self.cfg = cfg
        self.blocks = blocks
        q_count = blocks.q_max + 2
        d = cfg.dim
        self.sup_rho = np.zeros(q_count)
        self.sup_v = np.zeros((d, q_count))
        self.int_v = np.zeros((d, q_count))
        self.int_grad_rho = np.zeros(q_count)
        self._prev = None
        self._prev_t = None

    def push(self, t, r_spec, v_specs):
        blk = self.blocks
        rho_norms = blk.block_l2_norms(r_spec)
        v_norms = np.stack([blk.block_l2_norms(s) for s in v_specs])
        grad_norms = blk.block_grad_l2_norms(r_spec)
        np.maximum(self.sup_rho, rho_norms, out=self.sup_rho)
        np.maximum(self.sup_v, v_norms, out=self.sup_v)
        if self._prev is not None:
            dt = t - self._prev_t
            pv, pg = self._prev
            self.int_v += 0.5 * dt * (pv ** 2 + v_norms ** 2)
            self.int_grad_rho += 0.5 * dt * (pg ** 2 + grad_norms ** 2)
        self._prev = (v_norms, grad_norms)
        self._prev_t = t
        sigma = self.cfg.smoothness_index
        w = 2.0 ** (sigma * np.arange(-1, blk.q_max + 1))
        return float(np.sum(w * rho_norms) + np.sum(w * v_norms))

    def totals(self) -> dict:
        sigma = self.cfg.smoothness_index
        tau = self.cfg.tau
        qs = np.arange(-1, self.blocks.q_max + 1)
        w_hi = 2.0 ** (sigma * qs)
        w_lo = 2.0 ** ((sigma - 1.0) * qs)
        sup_part = float(np.sum(w_hi * self.sup_rho) + np.sum(w_hi * self.sup_v))
        v_part = float(np.sum(w_hi * np.sqrt(self.int_v))) / math.sqrt(tau)
        grad_part = math.sqrt(tau) * float(np.sum(w_lo * np.sqrt(self.int_grad_rho)))
        return {
            "sup": sup_part,
            "velocity_dissipation": v_part,
            "density_gradient": grad_part,
            "total": sup_part + v_part + grad_part,
        }


def run(
    cfg: RelaxConfig,
    state: EulerState | None = None,
    dt: float | None = None,
    snapshot_stride: int | None = None,
    seed: int = 0,
    observer=None,
) -> EulerRun:
    """Integrate to cfg.t_final with online functional accumulation.

    ``observer(t, r_spec, v_specs)``, if given, is called on the initial
    state and after every step; the spectra are live views and must not be
    mutated.  It exists for per-step diagnostics that snapshot-grid
    quadrature would resolve too coarsely (relaxation layers).
    """
    if state is None:
        state = initial_data(cfg, seed)
    grid = state.rho.grid
    if grid != cfg.grid:
        raise ConfigurationError("state grid does not match configuration")
    vmax0 = float(np.max(state.v.magnitude()))
    if dt is None:
        dt = cfg.dt if cfg.dt is not None else default_dt(cfg, vmax0)
    n_steps = max(1, math.ceil(cfg.t_final / dt - 1e-9))
    dt = cfg.t_final / n_steps
    _check_step_size(cfg, dt, vmax0)
    if snapshot_stride is None:
        snapshot_stride = max(1, -(-n_steps // 128))

    stepper = _Stepper(cfg)
    blocks = get_blocks(grid)
    acc = _FunctionalAccumulator(cfg, blocks)
    r_spec = state.rho.spectrum.copy()
    v_specs = [c.spectrum.copy() for c in state.v.components]

    states = [state]
    mass0 = mass(state, cfg)
    masses = [mass0]
    target = mass0 if cfg.conserve_mass else None
    inst = [acc.push(state.t, r_spec, v_specs)]
    if observer is not None:
        observer(state.t, r_spec, v_specs)
    times = [state.t]
    t = state.t
    c0 = cfg.sound_speed
    for k in range(1, n_steps + 1):
        r_spec, v_specs = stepper.advance(r_spec, v_specs, dt, target)
        t = state.t + k * dt
        if not np.all(np.isfinite(r_spec)):
            raise SolverAbort("non-finite values produced", t=t)
        inst.append(acc.push(t, r_spec, v_specs))
        if observer is not None:
            observer(t, r_spec, v_specs)
        times.append(t)
        if cfg.gamma != 1.0:
            low = float(np.min(grid.inverse(r_spec)))
            if cfg.half_slope * low + c0 < 0.1 * c0:
                raise SolverAbort("state too close to vacuum", t=t)
        if k % snapshot_stride == 0 or k == n_steps:
            snap = EulerState(
                Field.from_spectrum(grid, r_spec.copy()),
                VectorField(
                    tuple(Field.from_spectrum(grid, s.copy()) for s in v_specs)
                ),
                t,
            )
            states.append(snap)
            masses.append(mass(snap, cfg))
    parts = acc.totals()
    return EulerRun(
        cfg=cfg,
        dt=dt,
        states=states,
        step_count=n_steps,
        inst_norms=np.asarray(inst),
        times=np.asarray(times),
        mass_history=np.asarray(masses),
        functional=parts["total"],
        functional_parts=parts,
    )


# -- per-shell energy bookkeeping ----------------------------------------


def _pair(grid: TorusGrid, a_spec, b_spec) -> float:
    """Exact integral of the product of two grid trig polynomials."""
    s = np.sum(grid.hermitian_weight * (a_spec * np.conj(b_spec)).real)
    return float(s * grid.length ** grid.dim / grid.n ** (2 * grid.dim))


@dataclass
class EnergyLedger:
    """Per-shell energy identity bookkeeping along a trajectory.

    ``rhs_terms[t, q]`` holds the five work terms: the div-v weighted
    energy, the velocity commutator pairings, the grad-rho coupling, and
    the two density commutator pairings.  ``residuals[i, q]`` is the gap
    in the identity over interval i under trapezoid quadrature.
    """

    times: np.ndarray
    block_energy: np.ndarray        # (t, q)
    dissipation: np.ndarray         # (t, q)
    rhs_terms: np.ndarray           # (t, q, 5)
    residuals: np.ndarray           # (t-1, q)
    functional_parts: dict

    @property
    def residual_norm(self) -> float:
        return float(np.max(np.sum(np.abs(self.residuals), axis=1)))


def _ledger_row(grid, blocks, cfg, r_spec, v_specs):
    """Block energies, dissipation, and the five work terms at one time."""
    from .commutator import CommutatorKernel

    d = cfg.dim
    q_count = blocks.q_max + 2
    deriv = [grid.derivative_multiplier(ax) for ax in range(d)]
    div_spec = sum(m * s for m, s in zip(deriv, v_specs))
    rho_f = Field.from_spectrum(grid, r_spec)
    v_f = VectorField(tuple(Field.from_spectrum(grid, s) for s in v_specs))
    grad_rho = [m * r_spec for m in deriv]

    kern_adv_rho = CommutatorKernel(v_f, rho_f, "grad")
    kern_adv_v = [CommutatorKernel(v_f, comp, "grad") for comp in v_f.components]
    h = cfg.half_slope
    if h != 0.0:
        kern_rho_grad = CommutatorKernel(rho_f, rho_f, "grad")
        kern_rho_div = CommutatorKernel(rho_f, v_f, "div")

    energy = np.zeros(q_count)
    dissip = np.zeros(q_count)
    terms = np.zeros((q_count, 5))
    for idx, q in enumerate(range(-1, blocks.q_max + 1)):
        rq = blocks.block_spectrum(r_spec, q)
        vq = [blocks.block_spectrum(s, q) for s in v_specs]
        e_rho = _pair(grid, rq, rq)
        e_v = sum(_pair(grid, s, s) for s in vq)
        energy[idx] = 0.5 * (e_rho + e_v)
        dissip[idx] = e_v / cfg.tau

        sq_spec = grid.dealiased_product(rq, rq)
        for s in vq:
            sq_spec = sq_spec + grid.dealiased_product(s, s)
        terms[idx, 0] = 0.5 * _pair(grid, div_spec, sq_spec)

        t_adv = _pair(grid, kern_adv_rho.component_spectra(q)[0], rq)
        for i in range(d):
            t_adv += _pair(grid, kern_adv_v[i].component_spectra(q)[0], vq[i])
        terms[idx, 1] = t_adv

        coupling = 0.0
        for i in range(d):
            coupling += _pair(grid, grid.dealiased_product(grad_rho[i], rq), vq[i])
        terms[idx, 2] = h * coupling

        if h != 0.0:
            comm_grad = kern_rho_grad.component_spectra(q)
            terms[idx, 3] = h * sum(_pair(grid, comm_grad[i], vq[i]) for i in range(d))
            terms[idx, 4] = h * _pair(grid, kern_rho_div.component_spectra(q)[0], rq)
    return energy, dissip, terms


def energy_budget(states: list, cfg: RelaxConfig) -> EnergyLedger:
    """Evaluate the per-shell energy identity along stored snapshots.

    The identity residual over each interval should shrink at second
    order in the step size (trapezoid quadrature plus splitting error).
    """
    if len(states) < 2:
        raise ContractError("need at least two snapshots")
    times = np.array([s.t for s in states])
    if np.any(np.diff(times) <= 0):
        raise ContractError("snapshot times must be strictly increasing")
    grid = states[0].rho.grid
    blocks = get_blocks(grid)
    acc = _FunctionalAccumulator(cfg, blocks)

    rows = []
    for s in states:
        r_spec = s.rho.spectrum
        v_specs = [c.spectrum for c in s.v.components]
        rows.append(_ledger_row(grid, blocks, cfg, r_spec, v_specs))
        acc.push(s.t, r_spec, v_specs)
    energy = np.stack([r[0] for r in rows])
    dissip = np.stack([r[1] for r in rows])
    terms = np.stack([r[2] for r in rows])

    dts = np.diff(times)[:, None]
    work = terms.sum(axis=2)
    residuals = (
        np.diff(energy, axis=0)
        + 0.5 * dts * (dissip[1:] + dissip[:-1])
        - 0.5 * dts * (work[1:] + work[:-1])
    )
    for arr in (energy, dissip, terms, residuals):
        if not np.all(np.isfinite(arr)):
            raise ContractError("non-finite ledger entry")
    return EnergyLedger(
        times=times,
        block_energy=energy,
        dissipation=dissip,
        rhs_terms=terms,
        residuals=residuals,
        functional_parts=acc.totals(),
    )


# -- linear dispersion ---------------------------------------------------


def linear_rates(cfg: RelaxConfig, k_mag: float) -> tuple[complex, complex]:
    """Roots of lambda^2 + lambda/tau + c0^2 |k|^2 = 0, slow root first."""
    tau, c0 = cfg.tau, cfg.sound_speed
    disc = cmath.sqrt(1.0 - 4.0 * tau * tau * c0 * c0 * k_mag * k_mag)
    slow = (-1.0 + disc) / (2.0 * tau)
    fast = (-1.0 - disc) / (2.0 * tau)
    return slow, fast


def eigenmode_state(
    cfg: RelaxConfig,
    k_vec: tuple[int, ...],
    amplitude: float = 1e-4,
    root: str = "slow",
) -> EulerState:
    """Single-mode initial data on the exact linear eigenvector."""
    grid = cfg.grid
    k = np.asarray(k_vec, dtype=float)
    k_mag = float(np.linalg.norm(k))
    if k_mag == 0.0:
        raise ContractError("need a nonzero wavevector")
    slow, fast = linear_rates(cfg, k_mag)
    lam = slow if root == "slow" else fast
    coeff = amplitude * grid.n ** grid.dim / 2.0

    r_spec = np.zeros(grid.spectral_shape, dtype=complex)
    idx = tuple(int(c) % grid.n for c in k_vec[:-1]) + (int(k_vec[-1]),)
    if not 0 <= idx[-1] <= grid.n // 2:
        raise ContractError("last wavevector component must fit the half spectrum")
    r_spec[idx] = coeff
    ratio = 1j * lam / (cfg.sound_speed * k_mag)
    v_specs = []
    for ax in range(cfg.dim):
        s = np.zeros(grid.spectral_shape, dtype=complex)
        s[idx] = coeff * ratio * (k[ax] / k_mag)
        v_specs.append(s)
    return EulerState(
        Field.from_spectrum(grid, r_spec),
        VectorField(tuple(Field.from_spectrum(grid, s) for s in v_specs)),
        0.0,
    )


def measure_mode_rate(
    cfg: RelaxConfig,
    k_vec: tuple[int, ...],
    amplitude: float = 1e-4,
    root: str = "slow",
    horizon: float | None = None,
    dt: float | None = None,
) -> complex:
    """Evolve one eigenmode and read off its complex rate.

    The rate comes from the complex log of the mode amplitude ratio over
    the run, so both the decay and the oscillation frequency are checked
    at once.  The horizon is kept short enough that the phase cannot wrap.
    """
    grid = cfg.grid
    k_mag = float(np.linalg.norm(np.asarray(k_vec, dtype=float)))
    slow, fast = linear_rates(cfg, k_mag)
    lam = slow if root == "slow" else fast
    if horizon is None:
        if lam.imag != 0.0:
            horizon = min(2.0, 2.5 / abs(lam.imag))
        elif root == "fast":
            horizon = 2.0 * cfg.tau
        else:
            horizon = min(2.0, 0.5 / max(abs(lam.real), 1e-12))
    if dt is None:
        dt = min(cfg.tau / 32.0, cfg.cfl * stable_dt(cfg, amplitude))
    n_steps = max(4, math.ceil(horizon / dt))
    dt = horizon / n_steps

    state = eigenmode_state(cfg, k_vec, amplitude, root)
    idx = tuple(int(c) % grid.n for c in k_vec[:-1]) + (int(k_vec[-1]),)
    u0 = state.rho.spectrum[idx]
    stepper = _Stepper(cfg)
    target = mass(state, cfg) if cfg.conserve_mass else None
    r_spec = state.rho.spectrum.copy()
    v_specs = [c.spectrum.copy() for c in state.v.components]
    for _ in range(n_steps):
        r_spec, v_specs = stepper.advance(r_spec, v_specs, dt, target)
    u1 = r_spec[idx]
    if u1 == 0.0 or u0 == 0.0:
        raise SolverAbort("mode amplitude vanished during rate measurement")
    return cmath.log(u1 / u0) / horizon
