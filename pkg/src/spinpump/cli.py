"""Command-line front-end: config parsing, run orchestration, export.

Config files are single JSON objects.  Every frequency or rate must be a
unit-keyed object {"value": x, "unit": u} with u one of "rad/s", "1/s",
"(2pi)Hz", "(2pi)kHz", "(2pi)MHz"; bare numbers are rejected.  Times are
plain numbers in seconds.

Exit codes: 0 success, 2 config error (message names the offending key),
3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .experiments import (
    PRESET_NAMES,
    ScanSpec,
    adiabatic_passage,
    compare_engines,
    figure_preset,
    gauss_to_larmor,
    scan_omega,
    scan_theta,
    Scenario,
)
from .integrate import (
    IntegrationError,
    IntegratorConfig,
    integrate_master,
    sample_grid,
)
from .io import (
    atomic_write_text,
    json_document,
    scan_csv_text,
    trajectory_csv_text,
    trajectory_diagnostics,
    trajectory_results,
    write_trajectory_svg,
)
from .operators import BlochMoments, ground_maximally_mixed, pure_state, KET_0
from .darkstate import dark_state
from .params import (
    ArccosSqrtRamp,
    Constant,
    ModulationSchedule,
    PhysicalParams,
    PiecewiseLinear,
)
from .reduced import ReducedVariant, integrate_bloch, resolve_fz_sign

UNIT_FACTORS = {
    "rad/s": 1.0,
    "1/s": 1.0,
    "(2pi)Hz": 2.0 * math.pi,
    "(2pi)kHz": 2.0 * math.pi * 1e3,
    "(2pi)MHz": 2.0 * math.pi * 1e6,
}


def gb_to_larmor(b_gauss: float) -> float:
    """Larmor angular frequency (rad/s) for a magnetic field in gauss,
    using omega_B = 2pi * 0.35 MHz/G * B.

    Note: conventions that define the precession rate as gB/(2 hbar) differ
    by a factor of 2; this helper uses the g*B form throughout.
    """
    return gauss_to_larmor(b_gauss)


class ConfigError(Exception):
    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


def _get(node: dict, key: str, path: str, required=True, default=None):
    if key not in node:
        if required:
            raise ConfigError(f"{path}{key}", "missing")
        return default
    return node[key]


def parse_quantity(node, path: str) -> float:
    """A frequency/rate entry: {"value": x, "unit": u} -> rad/s."""
    if not isinstance(node, dict) or set(node.keys()) != {"value", "unit"}:
        raise ConfigError(path, 'must be {"value": <number>, "unit": <string>}')
    unit = node["unit"]
    if unit not in UNIT_FACTORS:
        raise ConfigError(f"{path}.unit", f"unknown unit {unit!r}; choose from {sorted(UNIT_FACTORS)}")
    value = node["value"]
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise ConfigError(f"{path}.value", "must be a finite number")
    return float(value) * UNIT_FACTORS[unit]


def quantity(value_rad_s: float, unit: str = "rad/s") -> dict:
    value = value_rad_s / UNIT_FACTORS[unit]
    # prefer the shortest decimal that reproduces the same rad/s value
    short = float(f"{value:.12g}")
    if abs(short * UNIT_FACTORS[unit] - value_rad_s) <= 1e-15 * abs(value_rad_s):
        value = short
    return {"value": value, "unit": unit}


def parse_params(node, path="params.") -> PhysicalParams:
    if not isinstance(node, dict):
        raise ConfigError(path.rstrip("."), "must be an object")
    vals = {k: parse_quantity(_get(node, k, path), path + k)
            for k in ("omega_B", "Omega", "gamma_e", "gamma")}
    try:
        return PhysicalParams(**vals)
    except ValueError as exc:
        raise ConfigError(path.rstrip("."), str(exc)) from exc


def parse_profile(node, path="schedule.profile"):
    if not isinstance(node, dict):
        raise ConfigError(path, "must be an object")
    kind = _get(node, "kind", path + ".")
    try:
        if kind == "constant":
            return Constant(float(_get(node, "theta", path + ".")))
        if kind == "arccos_sqrt_ramp":
            return ArccosSqrtRamp(float(_get(node, "T", path + ".")))
        if kind == "piecewise_linear":
            pts = _get(node, "points", path + ".")
            return PiecewiseLinear(tuple((float(t), float(th)) for t, th in pts))
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.kind", f"unknown profile kind {kind!r}")


def parse_schedule(node, path="schedule.") -> ModulationSchedule:
    if not isinstance(node, dict):
        raise ConfigError(path.rstrip("."), "must be an object")
    omega = parse_quantity(_get(node, "omega", path), path + "omega")
    profile = parse_profile(_get(node, "profile", path))
    return ModulationSchedule(omega=omega, profile=profile)


def parse_integrator(node, path="integrator.") -> tuple:
    """Returns (t_final, n_samples, kwargs for IntegratorConfig)."""
    node = node or {}
    if not isinstance(node, dict):
        raise ConfigError(path.rstrip("."), "must be an object")
    t_final = _get(node, "t_final", path)
    if not isinstance(t_final, (int, float)) or t_final <= 0:
        raise ConfigError(path + "t_final", "must be a positive number (seconds)")
    n = int(_get(node, "n_samples", path, required=False, default=801))
    kwargs = {}
    for k in ("method", "rtol", "atol", "max_step", "fixed_dt"):
        if node.get(k) is not None:
            kwargs[k] = node[k]
    try:
        cfg = IntegratorConfig(sample_grid=sample_grid(0.0, float(t_final), n), **kwargs)
    except ValueError as exc:
        raise ConfigError(path.rstrip("."), str(exc)) from exc
    return float(t_final), n, cfg


def parse_variant(node, path="variant.") -> ReducedVariant:
    node = node or {}
    if not isinstance(node, dict):
        raise ConfigError(path.rstrip("."), "must be an object")
    known = {"flavor", "fz_term_sign", "include_fminus_term", "include_alignment_drive"}
    for k in node:
        if k not in known:
            raise ConfigError(path + k, "unknown variant field")
    try:
        return ReducedVariant(**node)
    except ValueError as exc:
        raise ConfigError(path.rstrip("."), str(exc)) from exc


def _xpol_ket():
    """Ground state fully stretched along +x (Fx eigenvalue +1)."""
    from .operators import FX

    w, v = np.linalg.eigh(FX[:3, :3])
    ket = np.zeros(4, dtype=complex)
    ket[:3] = v[:, np.argmax(w)]
    return ket


def initial_rho(selector: str, sched: ModulationSchedule):
    if selector == "mixed":
        return ground_maximally_mixed()
    if selector == "ket0":
        return pure_state(KET_0)
    if selector == "xpol":
        return pure_state(_xpol_ket())
    if selector == "dark_plus":
        return pure_state(dark_state(sched.theta(0.0), 0.0, sched.omega))
    raise ConfigError("initial_state", f"unknown selector {selector!r}")


def initial_moments(selector: str):
    if selector == "mixed":
        return np.array([0.0, 0.0, 0.0, 2.0 / 3.0, 0.0, 0.0])
    if selector == "ket0":
        return BlochMoments.zero().as_array()
    if selector == "xpol":
        from .operators import moments_from_rho

        return moments_from_rho(pure_state(_xpol_ket())).as_array()
    raise ConfigError("initial_state", f"unknown selector {selector!r} for the reduced engine")


def _load_config(path: str) -> dict:
    if path is None:
        raise ConfigError("--config", "this subcommand requires --config <file>")
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from exc


def _write_outputs(base: str, args, config, traj=None, scan=None, scan_param=None,
                   extra_diag=None):
    formats = args.format or ["csv", "json"]
    outdir = args.out or "."
    os.makedirs(outdir, exist_ok=True)
    written = []
    for fmt in formats:
        path = os.path.join(outdir, f"{base}.{fmt}")
        if fmt == "csv":
            if traj is not None:
                atomic_write_text(path, trajectory_csv_text(traj))
            else:
                atomic_write_text(path, scan_csv_text(scan, scan_param))
        elif fmt == "json":
            if traj is not None:
                results = trajectory_results(traj)
                diag = trajectory_diagnostics(traj)
            else:
                results = {scan_param: scan.grid, "Fz": scan.Fz,
                           "failed": scan.failed.astype(int)}
                diag = {
                    "n_failed": int(scan.failed.sum()),
                    "peaks": [dataclasses.asdict(pk) for pk in scan.peaks],
                }
            if extra_diag:
                diag.update(extra_diag)
            atomic_write_text(path, json_document(config, results, diag))
        elif fmt == "svg":
            if traj is None:
                continue  # projections are defined for trajectories only
            write_trajectory_svg(traj, path, title=base)
        else:
            raise ConfigError("--format", f"unknown format {fmt!r}")
        written.append(path)
    for path in written:
        print(path)


def cmd_master(args):
    cfg_doc = _load_config(args.config)
    p = parse_params(_get(cfg_doc, "params", ""))
    sched = parse_schedule(_get(cfg_doc, "schedule", ""))
    _, _, icfg = parse_integrator(_get(cfg_doc, "integrator", ""))
    rho0 = initial_rho(cfg_doc.get("initial_state", "mixed"), sched)
    traj = integrate_master(rho0, p, sched, icfg)
    _write_outputs("master", args, cfg_doc, traj=traj)
    return 0


def cmd_bloch(args):
    cfg_doc = _load_config(args.config)
    p = parse_params(_get(cfg_doc, "params", ""))
    sched = parse_schedule(_get(cfg_doc, "schedule", ""))
    _, _, icfg = parse_integrator(_get(cfg_doc, "integrator", ""))
    variant = parse_variant(cfg_doc.get("variant"))
    m0 = initial_moments(cfg_doc.get("initial_state", "mixed"))
    traj = integrate_bloch(m0, p, sched, icfg, variant)
    _write_outputs("bloch", args, cfg_doc, traj=traj)
    return 0


def _parse_scan_grid(node, parameter, path="scan."):
    if "values" in node:
        vals = node["values"]
        if parameter == "omega":
            return np.array([parse_quantity(v, f"{path}values[{i}]")
                             for i, v in enumerate(vals)])
        return np.asarray(vals, dtype=float)
    n = int(_get(node, "n", path))
    if n < 1:
        raise ConfigError(path + "n", "must be >= 1")
    if parameter == "omega":
        start = parse_quantity(_get(node, "start", path), path + "start")
        stop = parse_quantity(_get(node, "stop", path), path + "stop")
    else:
        start = float(_get(node, "start", path))
        stop = float(_get(node, "stop", path))
    if stop <= start:
        raise ConfigError(path + "stop", "must exceed scan.start")
    return np.linspace(start, stop, n)


def _cmd_scan(args, parameter):
    cfg_doc = _load_config(args.config)
    p = parse_params(_get(cfg_doc, "params", ""))
    sched = parse_schedule(_get(cfg_doc, "schedule", ""))
    scan_node = _get(cfg_doc, "scan", "")
    if not isinstance(scan_node, dict):
        raise ConfigError("scan", "must be an object")
    declared = scan_node.get("parameter", parameter)
    if declared != parameter:
        raise ConfigError("scan.parameter", f"must be {parameter!r} for this subcommand")
    grid = _parse_scan_grid(scan_node, parameter)
    t_final = scan_node.get("t_final")
    if not isinstance(t_final, (int, float)) or t_final <= 0:
        raise ConfigError("scan.t_final", "must be a positive number (seconds)")
    icfg = None
    if cfg_doc.get("integrator"):
        _, _, icfg = parse_integrator(cfg_doc["integrator"])
    n_jobs = args.threads if args.threads else 1
    if args.threads == 0:
        n_jobs = os.cpu_count() or 1
    try:
        spec = ScanSpec(
            parameter=parameter,
            grid=grid,
            t_final=float(t_final),
            params=p,
            schedule=sched,
            engine=cfg_doc.get("engine", "master"),
            variant=parse_variant(cfg_doc.get("variant")),
            cfg=icfg,
            readout=scan_node.get("readout", "fixed_time"),
            n_jobs=n_jobs,
        )
    except ValueError as exc:
        raise ConfigError("scan", str(exc)) from exc
    result = scan_omega(spec) if parameter == "omega" else scan_theta(spec)
    _write_outputs(f"scan_{parameter}", args, cfg_doc, scan=result, scan_param=parameter)
    return 0


def cmd_scan_omega(args):
    return _cmd_scan(args, "omega")


def cmd_scan_theta(args):
    return _cmd_scan(args, "theta")


def cmd_passage(args):
    cfg_doc = _load_config(args.config)
    p = parse_params(_get(cfg_doc, "params", ""))
    node = _get(cfg_doc, "passage", "")
    if not isinstance(node, dict):
        raise ConfigError("passage", "must be an object")
    T = _get(node, "T", "passage.")
    if not isinstance(T, (int, float)) or T <= 0:
        raise ConfigError("passage.T", "must be a positive number (seconds)")
    omega = p.omega_B
    if "omega" in node:
        omega = parse_quantity(node["omega"], "passage.omega")
    icfg = None
    if cfg_doc.get("integrator"):
        _, _, icfg = parse_integrator(cfg_doc["integrator"])
    traj = adiabatic_passage(
        float(T), p, omega, cfg=icfg,
        engine=cfg_doc.get("engine", "master"),
        init=node.get("init", "exact"),
    )
    _write_outputs("passage", args, cfg_doc, traj=traj)
    return 0


def cmd_compare(args):
    cfg_doc = _load_config(args.config)
    p = parse_params(_get(cfg_doc, "params", ""))
    sched = parse_schedule(_get(cfg_doc, "schedule", ""))
    t_final, n, icfg = parse_integrator(_get(cfg_doc, "integrator", ""))
    scenario = Scenario(name="compare", params=p, schedule=sched,
                        t_final=t_final, n_samples=n)
    report = compare_engines(scenario, icfg, parse_variant(cfg_doc.get("variant")))
    print(report.summary())
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        doc = json_document(cfg_doc, {"max_abs": report.max_abs, "rms": report.rms},
                            {"in_regime": report.in_regime,
                             "theta_max": report.theta_max,
                             "saturation": report.saturation})
        path = os.path.join(args.out, "compare.json")
        atomic_write_text(path, doc)
        print(path)
    return 0


def preset_config(name: str) -> dict:
    """Emit a runnable config for a named figure preset."""
    sc = figure_preset(name)
    p = sc.params
    profile = sc.schedule.profile
    if isinstance(profile, Constant):
        prof_node = {"kind": "constant", "theta": profile.theta}
    else:
        prof_node = {"kind": "arccos_sqrt_ramp", "T": profile.T}
    doc = {
        "preset": sc.name,
        "engine": "master",
        "params": {
            "omega_B": quantity(p.omega_B, "(2pi)kHz"),
            "Omega": quantity(p.Omega, "rad/s"),
            "gamma_e": quantity(p.gamma_e, "rad/s"),
            "gamma": quantity(p.gamma, "1/s"),
        },
        "schedule": {
            "omega": quantity(sc.schedule.omega, "(2pi)kHz"),
            "profile": prof_node,
        },
        "integrator": {"t_final": sc.t_final, "n_samples": sc.n_samples},
        "initial_state": "ket0" if sc.ramp_T else "mixed",
        "notes": sc.notes,
    }
    if sc.ramp_T:
        doc["passage"] = {"T": sc.ramp_T, "init": "exact"}
    if sc.scan_parameter:
        grid = sc.scan_grid
        if sc.scan_parameter == "omega":
            start = quantity(float(grid[0]), "(2pi)kHz")
            stop = quantity(float(grid[-1]), "(2pi)kHz")
        else:
            start, stop = float(grid[0]), float(grid[-1])
        doc["scan"] = {
            "parameter": sc.scan_parameter,
            "start": start,
            "stop": stop,
            "n": len(grid),
            "t_final": sc.t_final,
        }
    return doc


def cmd_preset(args):
    try:
        doc = preset_config(args.name)
    except ValueError as exc:
        raise ConfigError("preset", str(exc)) from exc
    from .io import dumps17

    text = dumps17(doc) + "\n"
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"{args.name}.json")
        atomic_write_text(path, text)
        print(path)
    else:
        sys.stdout.write(text)
    return 0


def cmd_resolve_sign(args):
    res = resolve_fz_sign()
    print(res.summary())
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        doc = json_document(
            {"scenario_hash": res.scenario_hash, "scenario": res.scenario},
            {"rms_supplement_s13": res.rms_supplement_s13,
             "rms_main_text_eq4": res.rms_main_text_eq4},
            {"winner": res.winner, "ambiguous": res.ambiguous},
        )
        path = os.path.join(args.out, "resolve_sign.json")
        atomic_write_text(path, doc)
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="spinpump",
        description="Transverse optical pumping simulator: master-equation "
        "oracle, reduced Bloch model, scans, and passage ramps.",
    )
    ap.add_argument("--version", action="version", version=f"spinpump {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON scenario config")
        sp.add_argument("--out", help="output directory (default: cwd)")
        sp.add_argument("--format", action="append", choices=("csv", "json", "svg"),
                        help="output format(s); repeatable (default: csv,json)")
        sp.add_argument("--threads", type=int, default=1,
                        help="parallel scan workers (0 = auto)")
        sp.add_argument("--seed", type=int, default=None,
                        help="reserved; no stochastic components currently")

    for name, fn in (
        ("master", cmd_master),
        ("bloch", cmd_bloch),
        ("scan-omega", cmd_scan_omega),
        ("scan-theta", cmd_scan_theta),
        ("passage", cmd_passage),
        ("compare", cmd_compare),
        ("resolve-sign", cmd_resolve_sign),
    ):
        sp = sub.add_parser(name)
        common(sp)
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("preset")
    sp.add_argument("name", choices=PRESET_NAMES)
    common(sp)
    sp.set_defaults(fn=cmd_preset)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
