"""Configuration-driven command line front end.

Each subcommand maps onto one module operation, reads an optional strict
JSON config (unknown keys rejected), lets flags override config values,
writes artifacts atomically into the output directory and prints a
one-line summary of the key scalars.  Exit status: 0 success, 2 config
or validation failure, 3 numerical failure (step underflow, missing
collapse, residual blowup).

Config layout (all sections optional):

    {
      "command": "cylinder-flow",
      "parameters": {"h0sq": 0.5},
      "tolerances": {"rtol": 1e-11, "atol": 1e-13, "grid": 64},
      "output": {"directory": "out", "csv": true, "json": true}
    }

The output directory defaults to $GRFLAB_OUTPUT_DIR, then "grflab_out".
A sweep file fans out independent runs, each into its own subdirectory:

    {"runs": [{"name": "a", "parameters": {"h0sq": 0.1}}, ...]}
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from . import cylinder, entropy, hodge, shooting, warped
from .ioutil import atomic_write_text, to_json_text

ENV_OUTPUT_DIR = "GRFLAB_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "grflab_out"

COMMANDS = (
    "cylinder-flow",
    "blowup",
    "torsion",
    "shoot",
    "soliton-residual",
    "entropy",
    "heat-check",
    "hodge-check",
)


class ConfigError(Exception):
    """Rejected configuration; maps to exit status 2."""


class NumericalError(Exception):
    """Computation failed or did not reach its goal; exit status 3."""


@dataclass(frozen=True)
class Param:
    kind: str  # float | int | str | flag
    default: object
    help: str
    choices: tuple = ()
    optional: bool = False  # None allowed


_TOL = {"rtol": Param("float", 1e-11, "relative tolerance"),
        "atol": Param("float", 1e-13, "absolute tolerance")}

SCHEMAS: Dict[str, Dict[str, Param]] = {
    "cylinder-flow": {
        "h0sq": Param("float", 0.1, "initial torsion h0^2"),
        "lam0": Param("float", 1.0, "initial sphere scale"),
        "beta0": Param("float", 1.0, "initial circle scale"),
        "tmax": Param("float", 10.0, "latest flow time"),
        "lam_floor": Param("float", 1e-8, "collapse detection floor"),
        "dt_out": Param("float", 0.01, "uniform CSV sample step"),
        **_TOL,
    },
    "blowup": {
        "h0sq": Param("float", 0.3, "initial torsion h0^2"),
        "lam0": Param("float", 1.0, "initial sphere scale"),
        "beta0": Param("float", 1.0, "initial circle scale"),
        "samples": Param("int", 18, "geometric sample count"),
        "tmax": Param("float", 10.0, "latest flow time"),
        **_TOL,
    },
    "torsion": {
        "h0sq": Param("float", 0.5, "initial torsion h0^2, nonzero"),
        "lam0": Param("float", 1.0, "initial sphere scale"),
        "beta0": Param("float", 1.0, "initial circle scale"),
        "psi0": Param("float", None, "crossing threshold", optional=True),
        "fit_points": Param("int", 200, "points for the log fit"),
        "tmax": Param("float", 10.0, "latest flow time"),
        **_TOL,
    },
    "shoot": {
        "r_switch": Param("float", 0.05, "series-to-integrator handoff radius"),
        "delta_floor": Param("float", 1e-8, "terminal u floor"),
        "r_max": Param("float", 12.0, "integration ceiling in r"),
        "csv": Param("flag", False, "also write the phase trajectory CSV"),
        **_TOL,
    },
    "soliton-residual": {
        "soliton": Param("str", "cylinder", "which explicit soliton",
                         choices=("cylinder", "gaussian")),
        "points": Param("int", 200, "grid points"),
        "r_min": Param("float", 0.1, "grid start"),
        "r_max": Param("float", 3.0, "grid end"),
    },
    "entropy": {
        "h0sq": Param("float", 0.0, "initial torsion h0^2"),
        "lam0": Param("float", 1.0, "initial sphere scale"),
        "beta0": Param("float", 1.0, "initial circle scale"),
        "u0": Param("float", None, "initial weight; default normalizes mass to 1",
                    optional=True),
        "T_ref": Param("float", None, "reference time; default detected T_sing",
                       optional=True),
        "dt": Param("float", 1e-4, "derivative-check step; 0 skips the check"),
        "t_max": Param("float", None, "cap on sample times", optional=True),
        **_TOL,
    },
    "heat-check": {
        "soliton": Param("str", "cylinder", "which explicit soliton",
                         choices=("cylinder", "gaussian")),
        "dt": Param("float", 1e-4, "central time step"),
        "dr": Param("float", 2e-3, "radial stencil step"),
        "r_max": Param("float", 3.0, "grid half-width"),
        "points": Param("int", 200, "grid points"),
    },
    "hodge-check": {
        "identity": Param("str", "all", "which identity to check",
                          choices=("all", "suobing", "twisted", "integral",
                                   "divh2", "adjointness")),
        "dim": Param("int", 3, "torus dimension, 3 or 4"),
        "size": Param("int", 32, "grid points per axis"),
        "f_amp": Param("float", 1.0, "scalar field amplitude"),
        "h_amp": Param("float", 1.0, "3-form amplitude"),
        "data": Param("str", "example", "trigonometric data family",
                      choices=("example", "closed")),
        "refine": Param("flag", False, "also run doubled resolution, report rates"),
        "seed": Param("int", 7, "seed for the adjointness fields"),
    },
}


# --------------------------------------------------------------------------
# config resolution


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        )
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def _coerce(command: str, name: str, value, spec: Param):
    if value is None:
        if spec.optional or spec.default is None:
            return None
        raise ConfigError(f"{command}: parameter '{name}' must not be null")
    if spec.kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{command}: parameter '{name}' must be a number")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"{command}: parameter '{name}' must be finite")
        return value
    if spec.kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{command}: parameter '{name}' must be an integer")
        return int(value)
    if spec.kind == "flag":
        if not isinstance(value, bool):
            raise ConfigError(f"{command}: parameter '{name}' must be a boolean")
        return bool(value)
    if spec.kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{command}: parameter '{name}' must be a string")
        if spec.choices and value not in spec.choices:
            raise ConfigError(
                f"{command}: parameter '{name}' must be one of {list(spec.choices)}"
            )
        return value
    raise AssertionError(spec.kind)


_GRID_PARAM = {"hodge-check": "size", "soliton-residual": "points",
               "heat-check": "points"}


def resolve_config(
    command: str,
    file_cfg: Optional[dict],
    cli_params: Dict[str, object],
    out_flag: Optional[str],
) -> dict:
    """Merge defaults, config file and flags into a validated run config."""
    schema = SCHEMAS[command]
    params = {name: spec.default for name, spec in schema.items()}
    out_dir = None
    formats = {"csv": True, "json": True}

    if file_cfg is not None:
        unknown = set(file_cfg) - {"command", "parameters", "tolerances", "output"}
        if unknown:
            raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
        declared = file_cfg.get("command")
        if declared is None and not file_cfg:
            raise ConfigError("empty config: no command and no parameters")
        if declared is not None and declared != command:
            raise ConfigError(
                f"config declares command '{declared}' but '{command}' was invoked"
            )
        section = file_cfg.get("parameters", {})
        if not isinstance(section, dict):
            raise ConfigError("'parameters' must be an object")
        for key, value in section.items():
            if key not in schema:
                raise ConfigError(f"{command}: unknown parameter '{key}'")
            params[key] = _coerce(command, key, value, schema[key])
        tols = file_cfg.get("tolerances", {})
        if not isinstance(tols, dict):
            raise ConfigError("'tolerances' must be an object")
        for key, value in tols.items():
            if key in ("rtol", "atol"):
                if key not in schema:
                    raise ConfigError(f"{command}: no tolerance '{key}'")
                params[key] = _coerce(command, key, value, schema[key])
            elif key == "grid":
                target = _GRID_PARAM.get(command)
                if target is None:
                    raise ConfigError(f"{command}: no grid tolerance")
                params[target] = _coerce(command, target, value, schema[target])
            else:
                raise ConfigError(f"unknown tolerance '{key}'")
        output = file_cfg.get("output", {})
        if not isinstance(output, dict):
            raise ConfigError("'output' must be an object")
        for key, value in output.items():
            if key == "directory":
                if not isinstance(value, str):
                    raise ConfigError("output directory must be a string")
                out_dir = value
            elif key in ("csv", "json"):
                if not isinstance(value, bool):
                    raise ConfigError(f"output flag '{key}' must be a boolean")
                formats[key] = value
            else:
                raise ConfigError(f"unknown output key '{key}'")

    for name, value in cli_params.items():
        if value is None:
            continue
        params[name] = _coerce(command, name, value, schema[name])

    if out_flag is not None:
        out_dir = out_flag
    if out_dir is None:
        out_dir = os.environ.get(ENV_OUTPUT_DIR, DEFAULT_OUTPUT_DIR)

    return {
        "command": command,
        "parameters": params,
        "output": {"directory": out_dir, **formats},
    }


# --------------------------------------------------------------------------
# command runners; each returns a one-line summary string


def _artifact(cfg: dict, name: str) -> str:
    return os.path.join(cfg["output"]["directory"], name)


def _run_cylinder_flow(cfg: dict) -> str:
    p = cfg["parameters"]
    try:
        state = cylinder.CylinderState(
            lam=p["lam0"], h=math.sqrt(p["h0sq"]), beta=p["beta0"]
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    traj = cylinder.run_flow(
        state, rtol=p["rtol"], atol=p["atol"], tmax=p["tmax"],
        lam_floor=p["lam_floor"],
    )
    if traj.termination in ("blowup", "step_underflow"):
        raise NumericalError(f"flow terminated with {traj.termination}")
    path = None
    if cfg["output"]["csv"]:
        path = _artifact(cfg, "cylinder_flow.csv")
        traj.to_csv(path, dt_out=p["dt_out"] if p["dt_out"] > 0 else None)
    drift = float(np.max(np.abs(traj.lambda_h_beta - traj.lambda_h_beta[0])))
    tsing = "none" if traj.T_sing is None else f"{traj.T_sing:.6f}"
    dest = f" -> {path}" if path else ""
    return (
        f"cylinder-flow h0sq={p['h0sq']:g}: T_sing={tsing} "
        f"conserved_drift={drift:.3e} steps={traj.times.size}{dest}"
    )


def _collapsed_flow(p: dict) -> cylinder.CylinderTrajectory:
    try:
        state = cylinder.CylinderState(
            lam=p["lam0"], h=math.sqrt(p["h0sq"]), beta=p["beta0"]
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    traj = cylinder.run_flow(state, rtol=p["rtol"], atol=p["atol"], tmax=p["tmax"])
    if traj.termination == "step_underflow":
        raise NumericalError("flow terminated with step_underflow")
    if traj.T_sing is None:
        raise NumericalError("flow did not reach the collapse event")
    return traj


def _run_blowup(cfg: dict) -> str:
    p = cfg["parameters"]
    traj = _collapsed_flow(p)
    try:
        report = cylinder.blowup_analysis(traj, n_samples=p["samples"])
    except ValueError as exc:
        raise NumericalError(str(exc))
    path = None
    if cfg["output"]["json"]:
        path = _artifact(cfg, "blowup.json")
        report.to_json(path)
    dest = f" -> {path}" if path else ""
    return (
        f"blowup h0sq={p['h0sq']:g}: limit={report.limit:.6f} "
        f"err={report.limit_error:.2e} opening_max={report.opening_max:.3e}{dest}"
    )


def _run_torsion(cfg: dict) -> str:
    p = cfg["parameters"]
    if p["h0sq"] == 0:
        raise ConfigError("torsion: h0sq must be nonzero for a divergence witness")
    traj = _collapsed_flow(p)
    try:
        report = cylinder.torsion_divergence(
            traj, psi0=p["psi0"], fit_points=p["fit_points"]
        )
    except ValueError as exc:
        raise NumericalError(str(exc))
    path = None
    if cfg["output"]["json"]:
        path = _artifact(cfg, "torsion.json")
        report.to_json(path)
    cross = "none" if report.crossing_time is None else f"{report.crossing_time:.6f}"
    dest = f" -> {path}" if path else ""
    return (
        f"torsion h0sq={p['h0sq']:g}: log_coefficient={report.log_coefficient:.4f} "
        f"I_end={report.I_end:.4f} crossing={cross}{dest}"
    )


def _run_shoot(cfg: dict) -> str:
    p = cfg["parameters"]
    try:
        report = shooting.shoot_r3_branch(
            r_switch=p["r_switch"], delta_floor=p["delta_floor"],
            r_max=p["r_max"], rtol=p["rtol"], atol=p["atol"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    if report.termination == "step_underflow":
        raise NumericalError("phase integration hit step_underflow")
    if not report.terminated_at_zero:
        raise NumericalError("orbit did not return to the u floor")
    paths = []
    if cfg["output"]["json"]:
        path = _artifact(cfg, "shoot.json")
        report.to_json(path)
        paths.append(path)
    if p["csv"] and cfg["output"]["csv"]:
        path = _artifact(cfg, "shoot_trajectory.csv")
        report.trajectory_csv(path)
        paths.append(path)
    ms = ",".join("none" if m is None else f"{m:.6f}" for m in report.milestones)
    dest = f" -> {', '.join(paths)}" if paths else ""
    return (
        f"shoot: milestones=[{ms}] u_max={report.u_max:.6f} "
        f"drift={report.invariant_drift:.2e}{dest}"
    )


def _soliton(name: str) -> warped.WarpedSolitonData:
    return warped.cylinder_soliton() if name == "cylinder" else warped.gaussian_shrinker()


def _run_soliton_residual(cfg: dict) -> str:
    p = cfg["parameters"]
    if not p["r_max"] > p["r_min"]:
        raise ConfigError("soliton-residual: r_max must exceed r_min")
    if p["points"] < 2:
        raise ConfigError("soliton-residual: need at least 2 points")
    data = _soliton(p["soliton"])
    grid = np.linspace(p["r_min"], p["r_max"], p["points"])
    ode = warped.ode_residuals(data, grid)
    tensor = warped.tensor_residuals(data, grid)
    conv = warped.convention_check(data, grid)
    path = None
    if cfg["output"]["json"]:
        path = _artifact(cfg, "soliton_residual.json")
        payload = {
            "soliton": p["soliton"],
            "grid": {"r_min": p["r_min"], "r_max": p["r_max"], "points": p["points"]},
            "ode_sup": ode.sup,
            "tensor_sup": tensor.sup,
            "convention_ok": conv.ok,
            "factor_gap": conv.factor_gap,
            "lambda_ode": data.lambda_ode,
            "lambda_soliton": data.lambda_soliton,
        }
        atomic_write_text(path, to_json_text(payload))
    worst = max(ode.max_abs, tensor.max_abs)
    dest = f" -> {path}" if path else ""
    return (
        f"soliton-residual {p['soliton']}: max_residual={worst:.3e} "
        f"convention_ok={conv.ok}{dest}"
    )


def _run_entropy(cfg: dict) -> str:
    p = cfg["parameters"]
    try:
        state = cylinder.CylinderState(
            lam=p["lam0"], h=math.sqrt(p["h0sq"]), beta=p["beta0"]
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    traj = cylinder.run_flow(state, rtol=p["rtol"], atol=p["atol"])
    if traj.termination == "step_underflow":
        raise NumericalError("flow terminated with step_underflow")
    if p["T_ref"] is None and traj.T_sing is None:
        raise NumericalError("flow did not collapse; pass an explicit T_ref")
    T_ref = p["T_ref"] if p["T_ref"] is not None else traj.T_sing
    u0 = p["u0"]
    if u0 is None:
        # normalize the conserved total weight to 1
        u0 = 1.0 / (entropy.SPHERE_AREA * 2.0 * np.pi * p["lam0"] * p["beta0"])
    try:
        weights = entropy.conjugate_heat_homogeneous(traj, u0=u0, T_ref=T_ref)
        config = entropy.EntropyConfig(T_ref=T_ref)
        times = None
        if p["t_max"] is not None:
            times = traj.times[traj.times <= p["t_max"]]
        if p["dt"] > 0:
            if times is not None:
                keep = (times - p["dt"] >= traj.times[0]) & (
                    times + p["dt"] <= traj.t_end
                )
                times = times[keep]
            trace = entropy.entropy_derivative_check(
                traj, weights, config=config, dt=p["dt"], times=times
            )
        else:
            trace = entropy.entropy_eval(traj, weights, config=config, times=times)
    except (ValueError, RuntimeError) as exc:
        raise NumericalError(str(exc))
    path = None
    if cfg["output"]["csv"]:
        path = _artifact(cfg, "entropy.csv")
        trace.to_csv(path)
    drift = float(np.max(np.abs(trace.mass - trace.mass[0])) / trace.mass[0])
    gap = float(np.nanmax(trace.gap)) if np.any(np.isfinite(trace.gap)) else float("nan")
    dW_min = (
        float(np.nanmin(trace.dW_formula))
        if np.any(np.isfinite(trace.dW_formula))
        else float("nan")
    )
    dest = f" -> {path}" if path else ""
    return (
        f"entropy h0sq={p['h0sq']:g}: W0={trace.W[0]:.6f} mass_drift={drift:.2e} "
        f"gap_max={gap:.2e} dW_formula_min={dW_min:.4f}{dest}"
    )


def _run_heat_check(cfg: dict) -> str:
    p = cfg["parameters"]
    if not p["r_max"] > 0:
        raise ConfigError("heat-check: r_max must be positive")
    data = _soliton(p["soliton"])
    # the gaussian warp vanishes at r = 0; keep the grid one-sided there
    lo = 0.1 if p["soliton"] == "gaussian" else -p["r_max"]
    grid = np.linspace(lo, p["r_max"], p["points"])
    try:
        heat = entropy.soliton_heat_check(grid, dt=p["dt"], data=data)
        mono = entropy.pointwise_monotonicity_check(
            grid, dt=p["dt"], data=data, dr=p["dr"]
        )
    except ValueError as exc:
        raise NumericalError(str(exc))
    paths = []
    if cfg["output"]["json"]:
        a = _artifact(cfg, "heat_check.json")
        heat.to_json(a)
        b = _artifact(cfg, "monotonicity_check.json")
        mono.to_json(b)
        paths = [a, b]
    dest = f" -> {', '.join(paths)}" if paths else ""
    return (
        f"heat-check {p['soliton']}: heat_sup={heat.max_abs:.3e} "
        f"monotonicity_sup={mono.max_abs:.3e}{dest}"
    )


def _hodge_data(grid: hodge.PeriodicGrid, p: dict):
    f, H, ref = hodge.example_fields(grid, p["f_amp"], p["h_amp"])
    if p["data"] == "closed":
        H = hodge.closed_three_form(grid, (p["h_amp"], 0.8 * p["h_amp"]))
        ref = None
    return f, H, ref


def _integral_closed_form(p: dict, dim: int) -> float:
    from scipy.special import iv

    a, b = p["f_amp"], p["h_amp"]
    return float(
        b * b * 4.0 * np.pi**3 * (2.0 * np.pi) ** (dim - 3) * (iv(0, a) + a * iv(1, a))
    )


def _one_hodge_report(identity: str, grid: hodge.PeriodicGrid, p: dict):
    if identity == "adjointness":
        rng = np.random.default_rng(p["seed"])
        x = grid.coords()
        gaps = {}
        for k in range(grid.dim):
            alpha = _random_trig_form(grid, k, rng, x)
            beta = _random_trig_form(grid, k + 1, rng, x)
            gaps[f"degree_{k}"] = hodge.adjointness_gap(alpha, beta)
        return hodge.HodgeReport(
            identity="adjointness", grid_spec=grid.spec(), residuals=gaps
        )
    f, H, ref = _hodge_data(grid, p)
    if identity == "suobing":
        return hodge.check_suobing(f, H, reference=ref)
    if identity == "twisted":
        return hodge.check_twisted_codiff(f, H)
    if identity == "integral":
        report = hodge.check_integral_identity(f, H)
        if p["data"] == "example":
            exact = _integral_closed_form(p, grid.dim)
            report.values["closed_form"] = exact
            report.residuals["value_error"] = abs(report.values["left"] - exact)
        return report
    if identity == "divh2":
        return hodge.check_divH2(H)
    raise AssertionError(identity)


def _random_trig_form(grid, degree, rng, x):
    if degree > grid.dim:
        return hodge.FormField.zero(grid, degree)
    comps = {}
    for idx in _increasing_indices(grid.dim, degree):
        field = np.zeros(grid.sizes)
        for axis in range(grid.dim):
            c, s, ph = rng.normal(size=3)
            field = field + c * np.cos(x[axis] + ph) + s * np.sin(2.0 * x[axis])
        comps[idx] = field
    return hodge.FormField(grid, degree, comps)


def _increasing_indices(n, k):
    import itertools

    return itertools.combinations(range(n), k)


def _run_hodge_check(cfg: dict) -> str:
    p = cfg["parameters"]
    if p["dim"] not in (3, 4):
        raise ConfigError("hodge-check: dim must be 3 or 4")
    if p["size"] < 16:
        raise ConfigError("hodge-check: size must be at least 16")
    identities = (
        ("suobing", "twisted", "integral", "divh2", "adjointness")
        if p["identity"] == "all"
        else (p["identity"],)
    )
    grid = hodge.PeriodicGrid.cube(p["dim"], p["size"])
    bits = []
    paths = []
    for identity in identities:
        report = _one_hodge_report(identity, grid, p)
        if p["refine"] and identity != "adjointness":
            fine = _one_hodge_report(identity, grid.refined(), p)
            key = max(report.residuals, key=lambda k: report.residuals[k])
            coarse_r, fine_r = report.residuals[key], fine.residuals[key]
            if fine_r > 0 and coarse_r > 0:
                report.rate = float(np.log2(coarse_r / fine_r))
            report.residuals = {
                **report.residuals,
                **{f"refined_{k}": v for k, v in fine.residuals.items()},
            }
        if cfg["output"]["json"]:
            path = _artifact(cfg, f"hodge_{identity}.json")
            report.to_json(path)
            paths.append(path)
        rate = f" rate={report.rate:.2f}" if report.rate is not None else ""
        bits.append(f"{identity}={report.sup:.3e}{rate}")
    dest = f" -> {paths[-1] if len(paths) == 1 else cfg['output']['directory']}" if paths else ""
    return f"hodge-check {p['dim']}d n={p['size']}: " + " ".join(bits) + dest


RUNNERS = {
    "cylinder-flow": _run_cylinder_flow,
    "blowup": _run_blowup,
    "torsion": _run_torsion,
    "shoot": _run_shoot,
    "soliton-residual": _run_soliton_residual,
    "entropy": _run_entropy,
    "heat-check": _run_heat_check,
    "hodge-check": _run_hodge_check,
}


# --------------------------------------------------------------------------
# argument parsing and dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grflab",
        description="numerical laboratory for shrinking generalized Ricci solitons",
    )
    sub = parser.add_subparsers(dest="command")
    for command in COMMANDS + ("run",):
        sp = sub.add_parser(command)
        sp.add_argument("--config", help="strict JSON config file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--dump-config", action="store_true",
                        help="print the resolved config and exit")
        sp.add_argument("--sweep", help="JSON sweep file: independent runs")
        if command == "run":
            continue
        for name, spec in SCHEMAS[command].items():
            flag = "--" + name.replace("_", "-")
            if spec.kind == "flag":
                sp.add_argument(flag, dest=name, action="store_const", const=True,
                                default=None, help=spec.help)
            elif spec.kind == "int":
                sp.add_argument(flag, dest=name, type=int, default=None,
                                help=spec.help)
            elif spec.kind == "float":
                sp.add_argument(flag, dest=name, type=float, default=None,
                                help=spec.help)
            else:
                sp.add_argument(flag, dest=name, type=str, default=None,
                                choices=spec.choices or None, help=spec.help)
    return parser


def _single_run(cfg: dict) -> str:
    os.makedirs(cfg["output"]["directory"], exist_ok=True)
    return RUNNERS[cfg["command"]](cfg)


def _run_sweep(command: str, file_cfg, cli_params, out_flag, sweep_path) -> int:
    sweep = _load_json(sweep_path)
    unknown = set(sweep) - {"runs"}
    if unknown:
        raise ConfigError(f"sweep file: unknown key(s) {sorted(unknown)}")
    runs = sweep.get("runs")
    if not isinstance(runs, list) or not runs:
        raise ConfigError("sweep file needs a non-empty 'runs' list")
    configs = []
    for i, run in enumerate(runs):
        if not isinstance(run, dict):
            raise ConfigError(f"sweep run {i} must be an object")
        unknown = set(run) - {"name", "parameters"}
        if unknown:
            raise ConfigError(f"sweep run {i}: unknown key(s) {sorted(unknown)}")
        name = run.get("name", f"run{i:03d}")
        if not isinstance(name, str) or not name or os.sep in name:
            raise ConfigError(f"sweep run {i}: bad name")
        cfg = resolve_config(command, file_cfg, cli_params, out_flag)
        overrides = run.get("parameters", {})
        if not isinstance(overrides, dict):
            raise ConfigError(f"sweep run {i}: 'parameters' must be an object")
        for key, value in overrides.items():
            if key not in SCHEMAS[command]:
                raise ConfigError(f"sweep run {i}: unknown parameter '{key}'")
            cfg["parameters"][key] = _coerce(command, key, value, SCHEMAS[command][key])
        cfg["output"]["directory"] = os.path.join(cfg["output"]["directory"], name)
        configs.append((name, cfg))

    def job(item):
        name, cfg = item
        try:
            return name, 0, _single_run(cfg)
        except ConfigError as exc:
            return name, 2, f"config error: {exc}"
        except NumericalError as exc:
            return name, 3, f"numerical failure: {exc}"

    worst = 0
    with ThreadPoolExecutor(max_workers=min(4, len(configs))) as pool:
        for name, code, message in pool.map(job, configs):
            print(f"[{name}] {message}")
            worst = max(worst, code)
    return worst


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        file_cfg = _load_json(args.config) if args.config else None
        if args.command == "run":
            if file_cfg is None:
                raise ConfigError("run: --config is required")
            command = file_cfg.get("command")
            if command is None:
                raise ConfigError("config has no 'command'")
            if command not in SCHEMAS:
                raise ConfigError(f"unknown command '{command}'")
            cli_params = {}
        else:
            command = args.command
            cli_params = {
                name: getattr(args, name) for name in SCHEMAS[command]
            }
        if args.sweep:
            return _run_sweep(command, file_cfg, cli_params, args.out, args.sweep)
        cfg = resolve_config(command, file_cfg, cli_params, args.out)
        if args.dump_config:
            sys.stdout.write(to_json_text(cfg))
            return 0
        print(_single_run(cfg))
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
