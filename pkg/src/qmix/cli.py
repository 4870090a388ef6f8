"""Command-line front end.

Subcommands: evolve, exponent, pdp, fractal, classical, render, repro.
Each takes an optional JSON config document (--config) whose keys are
schema-checked (unknown keys are rejected) plus per-field flags that
override the file.  The fully resolved configuration and its hash are
embedded in every output file, and rerunning any recipe with the same
seed reproduces the outputs byte for byte.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from . import boxdim, circle, pdp, render
from .exponent import (
    classify_mixing,
    default_fit_horizon,
    default_horizon,
    default_probe_set,
    lambda_q_analytic,
    lambda_q_numeric,
)
from .io import (
    header_comments,
    read_cloud_csv,
    atomic_write_bytes,
    write_cloud_csv,
    write_json,
    write_jsonl,
    FLOAT_FMT,
)
from .lindblad import (
    Fluorescence,
    NonUniqueStationaryError,
    SigmaXConjugation,
    Tetrahedron,
    Zeno,
    build_model,
    evolve,
    stationary_state,
)
from .states import from_bloch, to_bloch, trace_norm

PRESET_NAMES = ("tetrahedron", "zeno", "fluorescence", "sigma_x_conjugation")


class ConfigError(ValueError):
    """Bad or unknown configuration; maps to exit code 2."""


@dataclass(frozen=True)
class Field:
    type: type
    default: Any = None
    required: bool = False
    choices: Optional[tuple] = None


def _coerce(name: str, field: Field, value):
    if field.type is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        value = float(value)
    if field.type is int and isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, field.type):
        raise ConfigError(f"field '{name}' expects {field.type.__name__}, got {value!r}")
    if field.choices is not None and value not in field.choices:
        raise ConfigError(f"field '{name}' must be one of {field.choices}, got {value!r}")
    return value


def resolve_config(schema: dict[str, Field], config_path: Optional[str],
                   overrides: dict[str, Any]) -> dict[str, Any]:
    """Merge defaults, config file, and flag overrides against a schema."""
    resolved = {k: f.default for k, f in schema.items()}
    if config_path:
        try:
            with open(config_path) as handle:
                doc = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        unknown = sorted(set(doc) - set(schema))
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        for key, value in doc.items():
            resolved[key] = _coerce(key, schema[key], value)
    for key, value in overrides.items():
        if value is None:
            continue
        resolved[key] = _coerce(key, schema[key], value)
    missing = [k for k, f in schema.items() if f.required and resolved[k] is None]
    if missing:
        raise ConfigError(f"missing required field(s): {', '.join(missing)}")
    return resolved


def _bloch3(cfg: dict, key: str) -> np.ndarray:
    vec = cfg[key]
    if not (isinstance(vec, list) and len(vec) == 3
            and all(isinstance(c, (int, float)) for c in vec)):
        raise ConfigError(f"field '{key}' must be a list of three numbers")
    return np.array(vec, dtype=float)


def _preset_from(cfg: dict):
    name = cfg["preset"]
    if name == "tetrahedron":
        return Tetrahedron(kappa=cfg["kappa"], alpha=cfg["alpha"], omega=cfg["omega"])
    if name == "zeno":
        return Zeno(kappa=cfg["kappa"], omega=cfg["omega"])
    if name == "fluorescence":
        return Fluorescence(rabi=cfg["rabi"], gamma=cfg["gamma"])
    if name == "sigma_x_conjugation":
        return SigmaXConjugation()
    raise ConfigError(f"unknown preset '{name}'")


_PRESET_FIELDS = {
    "preset": Field(str, required=True, choices=PRESET_NAMES),
    "kappa": Field(float, 1.0),
    "alpha": Field(float, 1.0),
    "omega": Field(float, 0.0),
    "rabi": Field(float, 1.0),
    "gamma": Field(float, 1.0),
}

EVOLVE_SCHEMA = {
    **_PRESET_FIELDS,
    "bloch0": Field(list, [0.0, 0.0, 1.0]),
    "t_end": Field(float, 5.0),
    "dt": Field(float),
    "out": Field(str, required=True),
}

EXPONENT_SCHEMA = {
    **_PRESET_FIELDS,
    "t_max": Field(float),
    "probe_seed": Field(int, 7),
    "tol": Field(float, 1e-4),
    "kappa_sweep": Field(list),
    "out": Field(str, required=True),
}

PDP_SCHEMA = {
    "alpha": Field(float, required=True),
    "kappa": Field(float, 1.0),
    "omega": Field(float, 0.0),
    "n_points": Field(int, 100000),
    "burn_in": Field(int, pdp.DEFAULT_BURN_IN),
    "seed": Field(int, 0),
    "rate_convention": Field(str, "literal", choices=pdp.RATE_CONVENTIONS),
    "r0": Field(list, [0.0, 0.0, 1.0]),
    "out": Field(str, required=True),
    "log": Field(str),
}

FRACTAL_SCHEMA = {
    "cloud": Field(str, required=True),
    "levels": Field(int),
    "out": Field(str, required=True),
}

CLASSICAL_SCHEMA = {
    "r": Field(int, 2),
    "n_max": Field(int, 12),
    "probe_ks": Field(list, [1, 2, 3, 4, 5]),
    "grid_size": Field(int, 1024),
    "out": Field(str, required=True),
    "density_out": Field(str),
}

RENDER_SCHEMA = {
    "cloud": Field(str, required=True),
    "log": Field(str),
    "projection": Field(str, "+z", choices=render.PROJECTIONS),
    "size": Field(int, 800),
    "mode": Field(str, "pgm", choices=("pgm", "ppm")),
    "zoom_center": Field(list),
    "zoom_radius": Field(float),
    "out": Field(str, required=True),
}

REPRO_SCHEMA = {
    "criteria": Field(list),
    "out": Field(str),
}


def cmd_evolve(cfg: dict) -> None:
    preset = _preset_from(cfg)
    model = build_model(preset)
    rho0 = from_bloch(_bloch3(cfg, "bloch0"))
    traj = evolve(model, rho0, cfg["t_end"], dt=cfg["dt"])
    note = None
    try:
        rho_stat = stationary_state(model)
    except NonUniqueStationaryError as exc:
        rho_stat = None
        note = str(exc)
    lines = [f"# {c}" for c in header_comments(cfg)]
    if note:
        lines.append(f"# stationary: {note}")
    lines.append("# columns: t,x1,x2,x3,dist_to_stationary")
    row_fmt = ",".join([FLOAT_FMT] * 5)
    for t, rho in zip(traj.times, traj.states):
        x = to_bloch(rho)
        dist = trace_norm(rho - rho_stat) if rho_stat is not None else math.nan
        lines.append(row_fmt % (t, x[0], x[1], x[2], dist))
    atomic_write_bytes(cfg["out"], ("\n".join(lines) + "\n").encode())


def _exponent_payload(cfg: dict, preset) -> dict:
    model = build_model(preset)
    try:
        analytic = lambda_q_analytic(preset)
    except ValueError:
        analytic = None
    fit_t = cfg["t_max"] if cfg["t_max"] else default_fit_horizon(model)
    classify_t = cfg["t_max"] if cfg["t_max"] else default_horizon(model)
    try:
        rho_ref = stationary_state(model)
    except NonUniqueStationaryError:
        rho_ref = from_bloch([0.0, 0.0, 0.0])
    probes = default_probe_set(rho_ref, seed=cfg["probe_seed"])
    estimate = lambda_q_numeric(model, rho_ref, probes, fit_t)
    report = classify_mixing(model, probes, classify_t, tol=cfg["tol"])
    return {
        "analytic": analytic,
        "numeric": {
            "exponent": None if math.isnan(estimate.exponent) else estimate.exponent,
            "fit_window": list(estimate.fit_window),
            "per_probe_slopes": [None if math.isnan(s) else s
                                 for s in estimate.per_probe_slopes],
            "max_residual": None if math.isnan(estimate.max_residual)
                            else estimate.max_residual,
            "completely_mixing": estimate.completely_mixing,
            "notes": estimate.notes,
        },
        "classification": {
            "completely_mixing": report.completely_mixing,
            "exact": report.exact,
        },
    }


def cmd_exponent(cfg: dict) -> None:
    if cfg["kappa_sweep"]:
        table = []
        for kappa in cfg["kappa_sweep"]:
            if not isinstance(kappa, (int, float)):
                raise ConfigError("kappa_sweep must hold numbers")
            point_cfg = dict(cfg, kappa=float(kappa))
            entry = _exponent_payload(point_cfg, _preset_from(point_cfg))
            entry["kappa"] = float(kappa)
            table.append(entry)
        write_json(cfg["out"], {"sweep": table}, cfg)
        return
    write_json(cfg["out"], _exponent_payload(cfg, _preset_from(cfg)), cfg)


def cmd_pdp(cfg: dict) -> None:
    path = pdp.sample_path(
        omega=cfg["omega"], kappa=cfg["kappa"], alpha=cfg["alpha"],
        r0=_bloch3(cfg, "r0"), n_jumps=cfg["n_points"] + cfg["burn_in"],
        seed=cfg["seed"], rate_convention=cfg["rate_convention"])
    records = path.records[cfg["burn_in"]:]
    points = np.array([rec.state for rec in records])
    write_cloud_csv(cfg["out"], points, cfg)
    if cfg["log"]:
        events = ({"time": rec.time, "detector": rec.detector,
                   "x": rec.state[0], "y": rec.state[1], "z": rec.state[2]}
                  for rec in records)
        write_jsonl(cfg["log"], events, cfg)


def cmd_fractal(cfg: dict) -> None:
    points = read_cloud_csv(cfg["cloud"])
    result = boxdim.box_count(points, levels=cfg["levels"])
    dimension = boxdim.estimate_dimension(result)
    payload = {
        "n_points": result.n_points,
        "eps": result.eps.tolist(),
        "counts": result.counts.tolist(),
        "dimension": dimension,
        "fit_levels": list(result.fit_levels),
        "residual": result.residual,
        "r_squared": result.r_squared,
    }
    write_json(cfg["out"], payload, cfg)


def cmd_classical(cfg: dict) -> None:
    r = cfg["r"]
    m = cfg["grid_size"]
    f0 = circle.CircleDensity.uniform(m)
    probes = [circle.sawtooth_density(int(k), m) for k in cfg["probe_ks"]]
    estimate = circle.lambda_classical(f0, probes, r, n_max=cfg["n_max"])
    ramp = circle.linear_ramp_density(m)
    decay = []
    g = ramp
    for n in range(cfg["n_max"] + 1):
        decay.append(circle.l1_distance(g, f0))
        if n < cfg["n_max"]:
            g = circle.pf_apply(g, r)
    payload = {
        "exponent": estimate.exponent,
        "log_r": math.log(r),
        "per_probe_slopes": estimate.per_probe_slopes,
        "fit_window": list(estimate.fit_window),
        "max_residual": estimate.max_residual,
        "notes": estimate.notes,
        "ramp_l1_decay": decay,
    }
    write_json(cfg["out"], payload, cfg)
    if cfg["density_out"]:
        header = "".join(f"# {c}\n" for c in header_comments(cfg))
        atomic_write_bytes(cfg["density_out"],
                           (header + circle.density_to_csv(g)).encode())


def cmd_render(cfg: dict) -> None:
    points = read_cloud_csv(cfg["cloud"])
    detectors = None
    if cfg["mode"] == "ppm":
        if not cfg["log"]:
            raise ConfigError("ppm mode needs the jump log ('log') for detector labels")
        detectors = _detectors_from_log(cfg["log"], len(points))
    zoom_center = tuple(cfg["zoom_center"]) if cfg["zoom_center"] else None
    try:
        spec = render.RenderSpec(
            projection=cfg["projection"], size=cfg["size"], mode=cfg["mode"],
            zoom_center=zoom_center, zoom_radius=cfg["zoom_radius"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    data = render.render(points, spec, detectors=detectors,
                         comments=tuple(header_comments(cfg)))
    atomic_write_bytes(cfg["out"], data)


def _detectors_from_log(path: str, expected: int) -> np.ndarray:
    labels = []
    with open(path) as handle:
        for line in handle:
            rec = json.loads(line)
            if "detector" in rec:
                labels.append(int(rec["detector"]))
    if len(labels) != expected:
        raise ConfigError(
            f"jump log holds {len(labels)} events but the cloud has {expected} points")
    return np.array(labels, dtype=int)


def cmd_repro(cfg: dict) -> int:
    from .acceptance import run_all
    wanted = [int(c) for c in cfg["criteria"]] if cfg["criteria"] else None
    results = run_all(wanted)
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status}  C{res.cid} {res.description} [{res.elapsed:.1f}s] {res.detail}")
    all_passed = all(r.passed for r in results)
    print(f"{'PASS' if all_passed else 'FAIL'}  {sum(r.passed for r in results)}"
          f"/{len(results)} criteria")
    if cfg["out"]:
        payload = {"criteria": [
            {"id": r.cid, "description": r.description, "passed": r.passed,
             "detail": r.detail, "elapsed_seconds": r.elapsed}
            for r in results]}
        write_json(cfg["out"], payload, cfg)
    return 0 if all_passed else 3


_COMMANDS = {
    "evolve": (EVOLVE_SCHEMA, cmd_evolve),
    "exponent": (EXPONENT_SCHEMA, cmd_exponent),
    "pdp": (PDP_SCHEMA, cmd_pdp),
    "fractal": (FRACTAL_SCHEMA, cmd_fractal),
    "classical": (CLASSICAL_SCHEMA, cmd_classical),
    "render": (RENDER_SCHEMA, cmd_render),
    "repro": (REPRO_SCHEMA, cmd_repro),
}


def _add_flags(parser: argparse.ArgumentParser, schema: dict[str, Field]) -> None:
    parser.add_argument("--config", help="JSON config document")
    for name, field in schema.items():
        flag = "--" + name.replace("_", "-")
        if field.type is list:
            parser.add_argument(flag, type=json.loads, default=None,
                                help="JSON list literal")
        elif field.type is bool:
            parser.add_argument(flag, type=json.loads, default=None)
        else:
            parser.add_argument(flag, type=field.type, default=None,
                                choices=field.choices)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmix",
        description="dissipative-qubit mixing diagnostics and fractal tools")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (schema, _) in _COMMANDS.items():
        _add_flags(sub.add_parser(name), schema)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse usage errors map to the config exit code
        return 0 if exc.code in (0, None) else 2
    schema, runner = _COMMANDS[args.command]
    overrides = {k: getattr(args, k) for k in schema}
    try:
        cfg = resolve_config(schema, args.config, overrides)
        code = runner(cfg)
        return int(code) if code is not None else 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical or IO failure
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
