"""Command-line front end: ``asymadmit <command> [--config FILE] [--out DIR]``.

Every command reads one flat JSON config (defaults below describe the
reference setup with ``d = 0.34``), writes its results under ``--out`` and
embeds the SHA-256 of the resolved config in each JSON file it writes.

Exit codes: 0 ok/stable, 1 usage or config error, 2 unstable verdict (or a
failed check), 3 marginal verdict.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from .eigen import (
    eigenvalues_closed_form,
    eigenvalues_oracle,
    multiset_deviation,
    default_damping_samples,
    root_locus,
    stability_report,
)
from .energy import passivity_violations
from .simulator import INTEGRATORS, Scenario, damping_from_zeta, detect_spiral, overshoot, simulate
from .stiffness import AdmittanceParams, StiffnessMatrix, force_field, is_spiral_free
from .sweep import analytic_map, default_axis, simulated_map

EXIT_OK, EXIT_CONFIG, EXIT_UNSTABLE, EXIT_MARGINAL = 0, 1, 2, 3

DEFAULTS = {
    "m": 0.1,
    "d": 0.34,
    "kx": 100.0,
    "ky": 100.0,
    "ks": 0.0,
    "ka": 10.0,
    "fx": 0.0,
    "fy": 10.0,
    "duration": 5.0,
    "dt": 1e-3,
    "integrator": "semi_implicit",
    "window": 0.1,
    "threshold": 0.2,
    "zeta": None,
    "tol": 1e-6,
    "d_lo": 0.0,
    "d_hi": None,
    "n_d": 400,
    "ks_lo": -80.0,
    "ks_hi": 80.0,
    "ka_lo": -80.0,
    "ka_hi": 80.0,
    "grid_step": 10.0,
    "d_increment": 0.1,
    "sweep_mode": "simulated",
    "n_draws": 10000,
    "seed": 0,
    "verify_tol": 1e-8,
    "xlim": [-0.1, 0.1],
    "ylim": [-0.1, 0.1],
    "nx": 11,
    "ny": 11,
    "out": ".",
}

REQUIRED = ("m", "d", "kx", "ky", "ks", "ka")
_OPTIONAL_NUMBERS = ("zeta", "d_hi")
_INTS = ("n_d", "n_draws", "seed", "nx", "ny")
_STRINGS = {"integrator": INTEGRATORS, "sweep_mode": ("simulated", "analytic")}


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


def fmt(x) -> str:
    """Fixed 9-significant-digit rendering used in every CSV."""
    x = float(x)
    if x == 0:
        return "0"
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if 1e-4 <= abs(x) < 1e6:
        return format(x, ".9g")
    return format(x, ".8e")


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _number(name, value, allow_none=False):
    if value is None:
        if allow_none:
            return None
        raise ConfigError(f"{name}: required value is missing")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{name}: must be finite")
    return float(value)


def load_config(path=None, overrides=()) -> dict:
    """Merge defaults, an optional JSON file and ``key=value`` overrides."""
    cfg = dict(DEFAULTS)
    layers = []
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
        layers.append(data)
    extra = {}
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"override: expected key=value, got {item!r}")
        extra[key.strip()] = _parse_value(raw)
    layers.append(extra)
    for layer in layers:
        for key, value in layer.items():
            if key not in DEFAULTS:
                raise ConfigError(f"{key}: unknown config key")
            cfg[key] = value
    return _validate(cfg)


def _validate(cfg: dict) -> dict:
    out = dict(cfg)
    for key in DEFAULTS:
        value = cfg[key]
        if key in _INTS:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{key}: expected an integer, got {value!r}")
        elif key in _STRINGS:
            if value not in _STRINGS[key]:
                raise ConfigError(f"{key}: expected one of {list(_STRINGS[key])}, got {value!r}")
        elif key in ("xlim", "ylim"):
            if not isinstance(value, list) or len(value) != 2:
                raise ConfigError(f"{key}: expected [lo, hi]")
            out[key] = [_number(key, v) for v in value]
        elif key == "out":
            if not isinstance(value, str):
                raise ConfigError("out: expected a path string")
        else:
            out[key] = _number(key, value, allow_none=key in _OPTIONAL_NUMBERS)
    checks = [
        ("m", out["m"] > 0, "must be positive"),
        ("d", out["d"] >= 0, "must be non-negative"),
        ("dt", out["dt"] > 0, "must be positive"),
        ("duration", out["duration"] >= out["dt"], "must cover at least one step"),
        ("window", 0 < out["window"] <= out["duration"], "must lie in (0, duration]"),
        ("tol", out["tol"] > 0, "must be positive"),
        ("n_d", out["n_d"] >= 1, "must be at least 1"),
        ("grid_step", out["grid_step"] > 0, "must be positive"),
        ("ks_hi", out["ks_hi"] >= out["ks_lo"], "must be >= ks_lo"),
        ("ka_hi", out["ka_hi"] >= out["ka_lo"], "must be >= ka_lo"),
        ("d_increment", out["d_increment"] > 0, "must be positive"),
        ("n_draws", out["n_draws"] >= 1, "must be at least 1"),
        ("nx", out["nx"] >= 1, "must be at least 1"),
        ("ny", out["ny"] >= 1, "must be at least 1"),
    ]
    if out["zeta"] is not None:
        checks.append(("zeta", out["zeta"] >= 0, "must be non-negative"))
    if out["d_hi"] is not None:
        checks.append(("d_hi", out["d_hi"] > out["d_lo"], "must exceed d_lo"))
    checks.append(("d_lo", out["d_lo"] >= 0, "must be non-negative"))
    for key, ok, msg in checks:
        if not ok:
            raise ConfigError(f"{key}: {msg}")
    return out


def config_hash(cfg: dict) -> str:
    """SHA-256 of the resolved config; the output directory is left out."""
    body = {k: v for k, v in cfg.items() if k != "out"}
    blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def params_from_config(cfg: dict) -> AdmittanceParams:
    return AdmittanceParams.from_values(cfg["m"], cfg["d"], cfg["kx"], cfg["ky"], cfg["ks"], cfg["ka"])


def _write_json(path: Path, payload, cfg) -> None:
    payload = dict(payload)
    payload["config_sha256"] = config_hash(cfg)
    text = json.dumps(payload, indent=2, sort_keys=True, default=_plain)
    path.write_text(text + "\n", encoding="utf-8")


def _plain(obj):
    # numpy scalars and arrays
    if hasattr(obj, "tolist"):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def _verdict_code(verdict: str) -> int:
    return {"stable": EXIT_OK, "unstable": EXIT_UNSTABLE, "marginal": EXIT_MARGINAL}[verdict]


def cmd_analyze(cfg, out: Path) -> int:
    report = stability_report(params_from_config(cfg), cfg["tol"])
    _write_json(out / "report.json", report.to_dict(), cfg)
    print(f"verdict: {report.verdict}  max Re = {fmt(report.max_real_part_at_d)}")
    return _verdict_code(report.verdict)


def cmd_rootlocus(cfg, out: Path) -> int:
    p = params_from_config(cfg)
    if cfg["d_hi"] is None:
        samples = default_damping_samples(p.k, p.m, cfg["n_d"])
    else:
        samples = np.linspace(cfg["d_lo"], cfg["d_hi"], cfg["n_d"])
    trace = root_locus(p.k, p.m, samples)
    header = ["d_m"] + [f"{part}{i}" for i in range(1, 5) for part in ("re", "im")]
    rows = []
    for dm, vals in zip(trace.d_m, trace.values):
        rows.append([dm] + [c for z in vals for c in (z.real, z.imag)])
    _write_csv(out / "rootlocus.csv", header, rows)
    _write_json(out / "rootlocus.json", {"n_samples": len(trace), "d_range": [samples[0], samples[-1]]}, cfg)
    print(f"root locus: {len(trace)} samples")
    return EXIT_OK


def cmd_simulate(cfg, out: Path) -> int:
    p = params_from_config(cfg)
    if cfg["zeta"] is not None:
        p = p.with_damping(damping_from_zeta(p.k, p.m, cfg["zeta"]))
    sc = Scenario.step_force(cfg["fx"], cfg["fy"], duration=cfg["duration"], dt=cfg["dt"], integrator=cfg["integrator"])
    tr = simulate(p, sc, cfg["window"], cfg["threshold"])
    eb = tr.energy
    cols = [
        tr.t, tr.position[:, 0], tr.position[:, 1], tr.velocity[:, 0], tr.velocity[:, 1],
        tr.force[:, 0], tr.force[:, 1], eb.kinetic, eb.potential, eb.dissipated, eb.curl_work, eb.total,
    ]
    header = ["t", "x", "y", "vx", "vy", "fx", "fy", "ke", "pe", "e_diss", "e_curl", "v_total"]
    _write_csv(out / "trajectory.csv", header, zip(*cols))
    violations = passivity_violations(eb)
    final = tr.final_state()
    status = {
        "status": tr.status,
        "d": p.d,
        "final_position": [final.x, final.y],
        "winding": detect_spiral(tr),
        "overshoot_y": overshoot(tr, 1),
        "n_violations": len(violations),
    }
    _write_json(out / "status.json", status, cfg)
    intervals = [{"start": v.start, "end": v.end, "gain": v.gain} for v in violations]
    _write_json(out / "violations.json", {"intervals": intervals}, cfg)
    print(f"status: {tr.status}")
    return EXIT_UNSTABLE if tr.status == "diverged" else EXIT_OK


def cmd_sweep(cfg, out: Path, workers: int = 1) -> int:
    base = params_from_config(cfg)
    ks_axis = default_axis(cfg["ks_lo"], cfg["ks_hi"], cfg["grid_step"])
    ka_axis = default_axis(cfg["ka_lo"], cfg["ka_hi"], cfg["grid_step"])
    if cfg["sweep_mode"] == "analytic":
        grid = analytic_map(base, ks_axis, ka_axis)
    else:
        grid = simulated_map(
            base, ks_axis, ka_axis,
            d_increment=cfg["d_increment"], duration=cfg["duration"], window=cfg["window"],
            threshold=cfg["threshold"], force=(cfg["fx"], cfg["fy"]), dt=cfg["dt"],
            integrator=cfg["integrator"], workers=workers,
        )
    _write_csv(out / "grid.csv", ["ks", "ka", "d_min", "status", "d_min_analytic"], grid.rows())
    meta = dict(grid.meta)
    meta.update(base={k: cfg[k] for k in REQUIRED}, shape=list(grid.shape))
    _write_json(out / "grid.json", meta, cfg)
    print(f"sweep: {grid.shape[0]}x{grid.shape[1]} cells")
    return EXIT_OK


def random_params(rng: np.random.Generator, n: int) -> list[AdmittanceParams]:
    """Draws spanning spiral-free and spiral stiffness, damped and undamped."""
    m = rng.uniform(0.05, 2.0, n)
    d = rng.uniform(0.0, 20.0, n)
    d[rng.random(n) < 0.05] = 0.0
    kx, ky = rng.uniform(1.0, 300.0, (2, n))
    ks, ka = rng.uniform(-100.0, 100.0, (2, n))
    return [AdmittanceParams.from_values(*row) for row in zip(m, d, kx, ky, ks, ka)]


def verify_oracle(n_draws: int, seed: int) -> dict:
    """Largest closed-form vs quartic-root deviation over random draws."""
    rng = np.random.default_rng(seed)
    worst, n_free = 0.0, 0
    for p in random_params(rng, n_draws):
        dev = multiset_deviation(eigenvalues_closed_form(p).as_array(), eigenvalues_oracle(p).as_array())
        worst = max(worst, dev)
        n_free += is_spiral_free(p.k)
    return {"n_draws": n_draws, "seed": seed, "max_deviation": worst,
            "n_spiral_free": n_free, "n_spiral": n_draws - n_free}


def cmd_verify(cfg, out: Path) -> int:
    result = verify_oracle(cfg["n_draws"], cfg["seed"])
    result["tolerance"] = cfg["verify_tol"]
    result["passed"] = result["max_deviation"] <= cfg["verify_tol"]
    _write_json(out / "verify.json", result, cfg)
    print(f"max deviation {fmt(result['max_deviation'])} over {result['n_draws']} draws")
    return EXIT_OK if result["passed"] else EXIT_UNSTABLE


def cmd_forcefield(cfg, out: Path) -> int:
    k = StiffnessMatrix(cfg["kx"], cfg["ky"], cfg["ks"], cfg["ka"])
    ff = force_field(k, cfg["xlim"], cfg["ylim"], cfg["nx"], cfg["ny"])
    header = ["x", "y", "fx", "fy", "fx_sym", "fy_sym", "fx_asym", "fy_asym"]
    _write_csv(out / "forcefield.csv", header, ff.rows())
    _write_json(out / "forcefield.json", {"nx": cfg["nx"], "ny": cfg["ny"]}, cfg)
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "rootlocus": cmd_rootlocus,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "forcefield": cmd_forcefield,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asymadmit", description="Stability toolkit for planar admittance control with asymmetric stiffness.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat JSON config file")
        sp.add_argument("--out", help="output directory (overrides the config's 'out')")
        sp.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="set one config field; VALUE is parsed as JSON, else taken as a string")
        if name == "sweep":
            sp.add_argument("--workers", type=int, default=1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config, args.override)
        out = Path(args.out if args.out is not None else cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "sweep":
            if args.workers < 1:
                raise ConfigError("workers: must be at least 1")
            return cmd_sweep(cfg, out, args.workers)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
