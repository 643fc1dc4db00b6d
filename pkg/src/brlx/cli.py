"""Experiment orchestration for the toolkit.

``brlx <suite> [flags]`` merges built-in defaults, one ``[suite]`` section
of a TOML config, and command-line flags (in that order of precedence),
runs the named verification or simulation suite, and writes an artifact
directory ``out/<suite>/<stamp>/`` containing ``manifest.json``,
``report.csv`` (plus suite-specific extras) and ``fields/`` checkpoints.

Exit status: 0 when every asserted invariant passed, 1 with the failing
invariant named on stderr, 2 for usage errors (unknown suite, malformed
config, bad flag values).

Runs are single-threaded and seeded; two runs with the same manifest
produce byte-identical CSV files.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import sys
from collections import namedtuple
from dataclasses import replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

from . import __version__, euler, golden, pme, relax
from .besov import (
    BesovIndex,
    besov_norm,
    chemin_lerner_norm,
    besov_time_norm,
    sobolev_norm,
)
from .blocks import bernstein_ratios, check_almost_orthogonality, get_blocks, reconstruction_defect
from .commutator import (
    CommutatorKernel,
    critical_commutator_fit,
    six_term_split,
    stationary_commutator_fit,
    transport_consistency_check,
)
from .cutoffs import build_cutoffs
from .ensembles import pair_ensemble, scalar_ensemble, scalar_vector_ensemble, series_ensemble
from .errors import ConfigurationError, ContractError, SolverAbort
from .euler import RelaxConfig
from .fields import save_field
from .grid import TorusGrid
from .paraproduct import bony_defect
from .pme import PmeConfig
from .relax import SweepConfig

Check = namedtuple("Check", "name passed detail")


class UsageError(Exception):
    pass


_DEFAULTS = {
    "seed": 0,
    "grid_n": 64,
    "dim": 2,
    "tau": 0.25,
    "gamma": 2.0,
    "length": 2.0 * math.pi,
    "pressure_const": 0.5,
    "rho_ref": 1.0,
    "cfl": 0.85,
    "dt": None,
    "t_final": 1.0,
    "eps": 1e-2,
    "velocity": "random",
    "k_cap": None,
    "count": 8,
    "s_final": 1.0,
    "ds": None,
    "taus": tuple(2.0 ** -j for j in range(1, 8)),
    "horizon": 1.0,
    "delta": 0.5,
    "snapshots": 32,
    "step_budget": 400_000,
    "reference_refine": 2,
    "conserve_mass": True,
    "dealias": True,
}

_SUITE_KEYS = {
    "verify-partition": ["seed", "grid_n", "dim", "tau", "gamma"],
    "verify-spectral": ["seed", "grid_n", "dim", "tau", "gamma", "count"],
    "verify-besov": ["seed", "grid_n", "dim", "tau", "gamma", "count"],
    "verify-paraproduct": ["seed", "grid_n", "dim", "tau", "gamma", "count"],
    "verify-commutator": ["seed", "grid_n", "dim", "tau", "gamma", "count"],
    "run-euler": [
        "seed", "grid_n", "dim", "tau", "gamma", "length", "pressure_const",
        "rho_ref", "cfl", "dt", "t_final", "eps", "velocity", "k_cap",
        "conserve_mass", "dealias",
    ],
    "run-pme": [
        "seed", "grid_n", "dim", "tau", "gamma", "length", "pressure_const",
        "rho_ref", "eps", "k_cap", "s_final", "ds",
    ],
    "relax-sweep": [
        "seed", "grid_n", "dim", "tau", "gamma", "length", "pressure_const",
        "rho_ref", "cfl", "eps", "velocity", "k_cap", "taus", "horizon",
        "delta", "snapshots", "step_budget", "reference_refine",
    ],
}


def _coerce(key: str, value):
    if key == "taus":
        if isinstance(value, str):
            value = [part for part in value.split(",") if part.strip()]
        return tuple(float(v) for v in value)
    if key == "velocity":
        if value not in ("random", "zero"):
            raise UsageError(f"velocity must be 'random' or 'zero', got {value!r}")
        return value
    default = _DEFAULTS[key]
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        raise UsageError(f"{key} expects a boolean, got {value!r}")
    if isinstance(default, int) and not isinstance(default, bool):
        return int(value)
    if default is None or isinstance(default, float):
        return None if value is None else float(value)
    return value


def _load_config_section(path: str | None, suite: str) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"malformed config {path}: {exc}") from exc
    section = data.get(suite, {})
    if not isinstance(section, dict):
        raise UsageError(f"config section [{suite}] must be a table")
    out = {}
    for raw_key, value in section.items():
        key = raw_key.replace("-", "_")
        if key not in _SUITE_KEYS[suite]:
            raise UsageError(f"unknown key {raw_key!r} in config section [{suite}]")
        out[key] = _coerce(key, value)
    return out


def merge_parameters(suite: str, args: argparse.Namespace) -> dict:
    params = {k: _DEFAULTS[k] for k in _SUITE_KEYS[suite]}
    params.update(_load_config_section(args.config, suite))
    for key in _SUITE_KEYS[suite]:
        value = getattr(args, key, None)
        if value is not None:
            params[key] = _coerce(key, value)
    return params


# -- suite implementations ------------------------------------------------


def _grid(p: dict) -> TorusGrid:
    return TorusGrid(p["dim"], p["grid_n"], p.get("length", 2.0 * math.pi))


def suite_verify_partition(p: dict):
    grid = _grid(p)
    co = build_cutoffs()
    radii = np.unique(grid.k_mag)
    resid = co.partition_defect(radii[radii > 0])
    checks = [Check("partition_residual", resid < 1e-12, f"{resid:.3e} < 1e-12")]
    rows = [("partition_residual", repr(resid), "1e-12", checks[0].passed)]
    return ("check", "value", "threshold", "passed"), rows, checks, {}


def suite_verify_spectral(p: dict):
    grid = _grid(p)
    co = build_cutoffs()
    radii = np.unique(grid.k_mag)
    part = co.partition_defect(radii[radii > 0])
    ens = scalar_ensemble(grid, 2.0, count=p["count"], seed=p["seed"])
    recon = max(reconstruction_defect(f) / f.l2() for f in ens)
    orth = check_almost_orthogonality(ens[0], ens[1 % len(ens)])
    scale = ens[0].l2()
    bern_ok = True
    bern_worst = 0.0
    for f in ens:
        for q, ratio in bernstein_ratios(f).items():
            if q < 0:
                continue
            lo, hi = 0.75 * 2.0 ** q, (8.0 / 3.0) * 2.0 ** q
            if not lo <= ratio <= hi:
                bern_ok = False
            margin = max(lo / ratio, ratio / hi)
            bern_worst = max(bern_worst, margin)
    checks = [
        Check("partition_residual", part < 1e-12, f"{part:.3e} < 1e-12"),
        Check("reconstruction_residual", recon < 1e-12, f"{recon:.3e} < 1e-12"),
        Check(
            "orthogonality_disjoint_blocks",
            orth.max_block_product / scale < 1e-10,
            f"{orth.max_block_product / scale:.3e} < 1e-10",
        ),
        Check(
            "orthogonality_paraproduct_window",
            orth.max_shifted_product / scale < 1e-10,
            f"{orth.max_shifted_product / scale:.3e} < 1e-10",
        ),
        Check("bernstein_sandwich", bern_ok, f"worst edge ratio {bern_worst:.6f}"),
    ]
    rows = [
        ("partition_residual", repr(part), "1e-12", checks[0].passed),
        ("reconstruction_residual", repr(recon), "1e-12", checks[1].passed),
        ("orthogonality_disjoint_blocks", repr(orth.max_block_product / scale), "1e-10", checks[2].passed),
        ("orthogonality_paraproduct_window", repr(orth.max_shifted_product / scale), "1e-10", checks[3].passed),
        ("bernstein_worst_edge", repr(bern_worst), "1", checks[4].passed),
    ]
    return ("check", "value", "threshold", "passed"), rows, checks, {}


def suite_verify_besov(p: dict):
    grid = _grid(p)
    ens = scalar_ensemble(grid, 1.5, count=p["count"], seed=p["seed"])
    idx = BesovIndex(1.5, 2.0, 2.0)
    comp_lo, comp_hi = np.inf, 0.0
    for f in ens:
        r = besov_norm(f, idx) / sobolev_norm(f, 1.5)
        comp_lo, comp_hi = min(comp_lo, r), max(comp_hi, r)
    series = series_ensemble(grid, 1.5, count=2, seed=p["seed"] + 1)
    mink_ok = True
    detail = []
    for sr in series:
        cl1 = chemin_lerner_norm(sr, BesovIndex(1.5, 2.0, 1.0), 2.0)
        pl1 = besov_time_norm(sr, BesovIndex(1.5, 2.0, 1.0), 2.0)
        cl_inf = chemin_lerner_norm(sr, BesovIndex(1.5, 2.0, np.inf), 2.0)
        pl_inf = besov_time_norm(sr, BesovIndex(1.5, 2.0, np.inf), 2.0)
        if pl1 > cl1 * (1 + 1e-12) or cl_inf > pl_inf * (1 + 1e-12):
            mink_ok = False
        detail.append((pl1 / cl1, cl_inf / pl_inf))
    mono_hi = max(besov_norm(f, BesovIndex(1.5, 2.0, 1.0)) / besov_norm(f, BesovIndex(2.0, 2.0, 1.0)) for f in ens)
    r_mono = max(besov_norm(f, BesovIndex(1.5, 2.0, 2.0)) / besov_norm(f, BesovIndex(1.5, 2.0, 1.0)) for f in ens)
    checks = [
        Check("sobolev_comparator", 1.0 / 3.0 <= comp_lo and comp_hi <= 3.0, f"range [{comp_lo:.4f}, {comp_hi:.4f}] in [1/3, 3]"),
        Check("minkowski_orderings", mink_ok, f"ratios {detail}"),
        Check("regularity_monotonicity", mono_hi >= 1.0 - 1e-12, f"lower-index/higher-index norm >= 1: {mono_hi:.4f}"),
        Check("summation_monotonicity", r_mono <= 1.0 + 1e-12, f"l2-sum over l1-sum <= 1: {r_mono:.4f}"),
    ]
    rows = [
        ("sobolev_comparator_low", repr(comp_lo), "1/3", checks[0].passed),
        ("sobolev_comparator_high", repr(comp_hi), "3", checks[0].passed),
        ("minkowski_orderings", repr(1.0 if mink_ok else 0.0), "1", checks[1].passed),
        ("regularity_monotonicity", repr(mono_hi), ">=1", checks[2].passed),
        ("summation_monotonicity", repr(r_mono), "<=1", checks[3].passed),
    ]
    return ("check", "value", "threshold", "passed"), rows, checks, {}


def suite_verify_paraproduct(p: dict):
    grid = _grid(p)
    ens = pair_ensemble(grid, 1.5, 1.5, count=p["count"], seed=p["seed"])
    worst = max(bony_defect(f, g) for f, g in ens)
    checks = [Check("bony_reconstruction", worst < 1e-10, f"{worst:.3e} < 1e-10")]
    rows = [("bony_reconstruction", repr(worst), "1e-10", checks[0].passed)]
    return ("check", "value", "threshold", "passed"), rows, checks, {}


def suite_verify_commutator(p: dict):
    grid = _grid(p)
    ens = scalar_vector_ensemble(grid, 2.0, count=p["count"], seed=p["seed"])
    blocks = get_blocks(grid)
    worst_gap = 0.0
    for f, g in ens:
        fn = f * (1.0 / f.l2())
        gn = g * (1.0 / g.l2())
        kern = CommutatorKernel(fn, gn, "div")
        for q in range(-1, blocks.q_max + 1):
            split = six_term_split(fn, gn, q)
            gap = grid.l2_from_spectrum(split.total() - kern.component_spectra(q)[0])
            worst_gap = max(worst_gap, gap)
    dil, adv = critical_commutator_fit(ens)
    sigma = 1.0 + grid.dim / 2.0
    stat = stationary_commutator_fit(ens, sigma, 2.0, np.inf, 2.0)
    cons = transport_consistency_check(ens)
    named = [
        ("commutator_dilation", dil.fitted),
        ("commutator_advection", adv.fitted),
        ("commutator_stationary", stat.fitted),
        ("transport_consistency_ratio", cons["ratio"]),
    ]
    checks = [Check("six_term_identity", worst_gap < 1e-10, f"{worst_gap:.3e} < 1e-10")]
    rows = [("six_term_identity", repr(worst_gap), "1e-10", checks[0].passed)]
    for name, value in named:
        bound = golden.ceiling(name)
        ok = value <= bound
        checks.append(Check(name, ok, f"{value:.6g} <= frozen {bound:.6g}"))
        rows.append((name, repr(value), repr(bound), ok))
    return ("check", "value", "threshold", "passed"), rows, checks, {}


def _relax_config(p: dict) -> RelaxConfig:
    return RelaxConfig(
        tau=p["tau"],
        gamma=p["gamma"],
        pressure_const=p["pressure_const"],
        rho_ref=p["rho_ref"],
        dim=p["dim"],
        n=p["grid_n"],
        length=p["length"],
        dt=p["dt"],
        t_final=p["t_final"],
        cfl=p["cfl"],
        dealias=p["dealias"],
        conserve_mass=p["conserve_mass"],
    )


def suite_run_euler(p: dict):
    cfg = _relax_config(p)
    state = euler.initial_data(cfg, seed=p["seed"], eps=p["eps"], k_cap=p["k_cap"], velocity=p["velocity"])
    out = euler.run(cfg, state=state)
    drift = out.mass_drift()
    checks = [
        Check("mass_conservation", drift <= 1e-10, f"relative drift {drift:.3e} <= 1e-10"),
        Check("functional_finite", math.isfinite(out.functional), f"functional {out.functional:.6g}"),
    ]
    rows = [
        (repr(int(i)), repr(float(t)), repr(float(v)))
        for i, (t, v) in enumerate(zip(out.times, out.inst_norms))
    ]
    fields = {"rho_final": out.final.rho}
    for ax, comp in enumerate(out.final.v.components):
        fields[f"v{ax}_final"] = comp
    summary = {
        "dt": out.dt,
        "steps": out.step_count,
        "functional": out.functional,
        "functional_parts": out.functional_parts,
        "mass_drift": drift,
        "mass_history": [float(m) for m in out.mass_history],
    }
    return ("step", "t", "functional_norm"), rows, checks, fields, summary


def suite_run_pme(p: dict):
    cfg = PmeConfig(
        gamma=p["gamma"],
        pressure_const=p["pressure_const"],
        rho_ref=p["rho_ref"],
        dim=p["dim"],
        n=p["grid_n"],
        length=p["length"],
        ds=p["ds"],
        s_final=p["s_final"],
    )
    state = pme.initial_data(cfg, seed=p["seed"], eps=p["eps"], k_cap=p["k_cap"])
    out = pme.run(cfg, state=state)
    drift = out.mean_drift()
    l2s = [st.deviation(cfg).l2() for st in out.states]
    checks = [Check("mean_conservation", drift <= 1e-12, f"relative drift {drift:.3e} <= 1e-12")]
    if p["eps"] <= 0.05:
        decays = bool(np.all(np.diff(l2s) <= 1e-12))
        checks.append(Check("l2_contraction", decays, "deviation L2 non-increasing"))
    rows = [
        (repr(float(st.s)), repr(float(l2)), repr(float(m)))
        for st, l2, m in zip(out.states, l2s, out.mean_history)
    ]
    fields = {"n_final": out.final.N}
    summary = {"ds": out.ds, "steps": out.step_count, "mean_drift": drift}
    return ("s", "l2_deviation", "mean"), rows, checks, fields, summary


def suite_relax_sweep(p: dict):
    base = RelaxConfig(
        tau=p["taus"][0],
        gamma=p["gamma"],
        pressure_const=p["pressure_const"],
        rho_ref=p["rho_ref"],
        dim=p["dim"],
        n=p["grid_n"],
        length=p["length"],
        cfl=p["cfl"],
    )
    sweep = SweepConfig(
        base=base,
        taus=p["taus"],
        horizon=p["horizon"],
        delta=p["delta"],
        eps=p["eps"],
        seed=p["seed"],
        velocity=p["velocity"],
        k_cap=p["k_cap"],
        snapshots=p["snapshots"],
        step_budget=p["step_budget"],
        reference_refine=p["reference_refine"],
    )
    runs, reference, report = relax.run_sweep(sweep)

    finite = all(np.all(np.isfinite(c)) for c in report.error_curves)
    checks = [Check("errors_finite", finite, "all error curves finite")]
    if np.all(report.sup_errors == 0.0):
        checks.append(Check("error_decreasing", True, "all curves identically zero (equilibrium)"))
    elif len(report.taus) >= 2:
        checks.append(Check("error_decreasing", report.monotone(), f"sup errors {report.sup_errors.tolist()}"))
    worst = max(float(np.max(report.uniform_sup)), float(np.max(report.uniform_dissipation)))
    if _matches_frozen_protocol(p):
        bound = golden.ceiling("relax_uniform_bound")
        checks.append(
            Check("uniform_diagnostics", worst <= bound, f"max diagnostic {worst:.6g} <= frozen {bound:.6g}")
        )
    else:
        checks.append(
            Check("uniform_diagnostics", True, f"max diagnostic {worst:.6g} (frozen bound not calibrated for this data)")
        )
    if p["velocity"] == "zero" and len(report.taus) >= 2 and np.any(report.sup_errors > 0.0):
        flux_ok = bool(np.all(np.diff(report.flux_space_time) <= 1e-12 + 0.0 * report.flux_space_time[1:]))
        checks.append(Check("flux_balance_trend", flux_ok, f"flux {report.flux_space_time.tolist()}"))

    rows = [(repr(t), repr(s), repr(e)) for t, s, e in report.rows()]
    flux_rows = []
    for rn in runs:
        for s, fl in zip(rn.slow_times, rn.flux_l2):
            flux_rows.append((repr(float(rn.tau)), repr(float(s)), repr(float(fl))))
    fields = {}
    for rn in runs:
        fields[f"rho_tau_{rn.tau:g}_final"] = rn.rho[-1]
    fields["reference_final"] = reference.final.N
    summary = {
        "taus": [float(t) for t in report.taus],
        "sup_errors": report.sup_errors.tolist(),
        "fitted_order": report.fitted_order,
        "uniform_sup": report.uniform_sup.tolist(),
        "uniform_dissipation": report.uniform_dissipation.tolist(),
        "flux_space_time": report.flux_space_time.tolist(),
        "limit_bound_constant": report.limit_bound_constant,
        "initial_norm": report.initial_norm,
        "partial": report.partial.tolist(),
    }
    extra_csv = {"flux.csv": (("tau", "s", "flux_l2"), flux_rows)}
    return ("tau", "s", "error"), rows, checks, fields, summary, extra_csv


def _matches_frozen_protocol(p: dict) -> bool:
    proto = golden.load().get("relax_protocol")
    if not proto:
        return False
    keys = ("eps", "velocity", "seed", "grid_n", "dim", "gamma")
    return all(p.get(k) == proto.get(k) for k in keys)


# -- artifact plumbing ----------------------------------------------------


def _stamp_dir(out_root: str, suite: str, stamp: str | None) -> Path:
    if stamp is None:
        stamp = datetime.datetime.now(datetime.timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    base = Path(out_root) / suite / stamp
    path = base
    counter = 1
    while path.exists():
        counter += 1
        path = Path(str(base) + f"-{counter}")
    path.mkdir(parents=True)
    return path


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _run_suite(suite: str, params: dict):
    table = {
        "verify-partition": suite_verify_partition,
        "verify-spectral": suite_verify_spectral,
        "verify-besov": suite_verify_besov,
        "verify-paraproduct": suite_verify_paraproduct,
        "verify-commutator": suite_verify_commutator,
        "run-euler": suite_run_euler,
        "run-pme": suite_run_pme,
        "relax-sweep": suite_relax_sweep,
    }
    result = table[suite](params)
    header, rows, checks = result[0], result[1], result[2]
    fields = result[3] if len(result) > 3 else {}
    summary = result[4] if len(result) > 4 else None
    extra_csv = result[5] if len(result) > 5 else {}
    return header, rows, checks, fields, summary, extra_csv


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def run_command(suite: str, args: argparse.Namespace) -> int:
    params = merge_parameters(suite, args)
    out_dir = _stamp_dir(args.out, suite, args.stamp)
    status = "pass"
    checks = []
    try:
        header, rows, checks, fields, summary, extra_csv = _run_suite(suite, params)
        _write_csv(out_dir / "report.csv", header, rows)
        for name, (h, r) in extra_csv.items():
            _write_csv(out_dir / name, h, r)
        if fields:
            fdir = out_dir / "fields"
            fdir.mkdir()
            for name, field in fields.items():
                save_field(field, fdir / f"{name}.bin")
        if summary is not None:
            with open(out_dir / "summary.json", "w") as fh:
                json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
                fh.write("\n")
        if not all(c.passed for c in checks):
            status = "fail"
    except (ContractError, ConfigurationError, SolverAbort) as exc:
        checks = list(checks) + [Check("run_completed", False, f"{type(exc).__name__}: {exc}")]
        status = "error"

    manifest = {
        "suite": suite,
        "version": __version__,
        "seed": params.get("seed"),
        "parameters": {k: (list(v) if isinstance(v, tuple) else v) for k, v in params.items()},
        "output_directory": str(out_dir),
        "wall_clock_budget_s": args.budget,
        "generated_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "status": status,
        "checks": [{"name": c.name, "passed": bool(c.passed), "detail": c.detail} for c in checks],
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")

    for c in checks:
        line = f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}"
        print(line, file=sys.stdout if c.passed else sys.stderr)
    print(f"artifacts: {out_dir}")
    return 0 if status == "pass" else 1


def report_command(args: argparse.Namespace) -> int:
    src = Path(args.from_dir)
    manifest_path = src / "manifest.json"
    if not manifest_path.is_file():
        raise UsageError(f"no manifest.json under {src}")
    manifest = json.loads(manifest_path.read_text())
    print(f"suite {manifest['suite']} (version {manifest['version']}, seed {manifest['seed']})")
    print(f"status: {manifest['status']}")
    for c in manifest.get("checks", []):
        print(f"  [{'PASS' if c['passed'] else 'FAIL'}] {c['name']}: {c['detail']}")
    csv_path = src / "report.csv"
    if csv_path.is_file():
        with open(csv_path, newline="") as fh:
            lines = list(csv.reader(fh))
        print(f"report.csv: {len(lines) - 1} data rows, columns {','.join(lines[0])}")
    return 0 if manifest["status"] == "pass" else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brlx",
        description="verification suites and simulation campaigns for the dyadic spectral toolkit",
    )
    sub = parser.add_subparsers(dest="suite", required=True)

    def add_common(sp):
        sp.add_argument("--config", help="TOML file with [suite] sections")
        sp.add_argument("--out", default="out", help="artifact root directory")
        sp.add_argument("--stamp", help="artifact subdirectory name (default: UTC timestamp)")
        sp.add_argument("--budget", type=float, default=1800.0, help="wall-clock budget in seconds (recorded)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--grid-n", dest="grid_n", type=int)
        sp.add_argument("--dim", type=int)
        sp.add_argument("--tau", type=float)
        sp.add_argument("--gamma", type=float)

    for name in _SUITE_KEYS:
        sp = sub.add_parser(name)
        add_common(sp)
        keys = _SUITE_KEYS[name]
        if "count" in keys:
            sp.add_argument("--count", type=int)
        if "length" in keys:
            sp.add_argument("--length", type=float)
            sp.add_argument("--pressure-const", dest="pressure_const", type=float)
            sp.add_argument("--rho-ref", dest="rho_ref", type=float)
            sp.add_argument("--eps", type=float)
            sp.add_argument("--k-cap", dest="k_cap", type=float)
        if "cfl" in keys:
            sp.add_argument("--cfl", type=float)
        if "dt" in keys:
            sp.add_argument("--dt", type=float)
            sp.add_argument("--t-final", dest="t_final", type=float)
        if "velocity" in keys:
            sp.add_argument("--velocity", choices=("random", "zero"))
        if "conserve_mass" in keys:
            sp.add_argument("--conserve-mass", dest="conserve_mass", action=argparse.BooleanOptionalAction)
            sp.add_argument("--dealias", action=argparse.BooleanOptionalAction)
        if "s_final" in keys:
            sp.add_argument("--s-final", dest="s_final", type=float)
            sp.add_argument("--ds", type=float)
        if "taus" in keys:
            sp.add_argument("--taus", help="comma-separated decreasing tau values")
            sp.add_argument("--horizon", type=float)
            sp.add_argument("--delta", type=float)
            sp.add_argument("--snapshots", type=int)
            sp.add_argument("--step-budget", dest="step_budget", type=int)
            sp.add_argument("--reference-refine", dest="reference_refine", type=int)

    rp = sub.add_parser("report")
    rp.add_argument("--from", dest="from_dir", required=True, help="artifact directory to summarize")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.suite == "report":
            return report_command(args)
        return run_command(args.suite, args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
