"""Command line front end.

    riqs figure <name> [--out PATH] [--format csv|json] [--seed N] [--set key=value]...
    riqs run <config.ini> [--out PATH]

Exit codes: 0 success, 1 validation error, 2 numerical failure.

Scenario files are INI files. A ``[scenario]`` section names the kind,
seed and output; an optional ``[grid]`` section holds ``t_start``,
``t_stop`` and ``t_points``; a section named after the kind holds its
physical parameters. Example::

    [scenario]
    kind = ghz
    seed = 1
    format = json

    [ghz]
    n = 4
    twist = 1.5707963267948966
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import re
import sys
import time
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import dicke, iontrap, lattice, squeeze
from .hilbert import NormDriftError

FIGURES = ("fig2a", "fig2b", "fig4", "fig5a", "fig5b")
KINDS = ("iontrap-gate", "ghz", "kicked-rotor", "spin-wave", "squeezing", "monte-carlo")


class ValidationError(ValueError):
    """Bad parameters or configuration; reported with exit code 1."""


def code_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


# --------------------------------------------------------------------------
# tables and writers


@dataclass
class Table:
    columns: list[str]
    rows: np.ndarray
    meta: dict = field(default_factory=dict)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_table(table: Table, path: Path, fmt: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        lines = [",".join(table.columns)]
        lines += [",".join(_fmt(v) for v in row) for row in table.rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    elif fmt == "json":
        doc = {
            "columns": table.columns,
            "rows": [[float(v) for v in row] for row in table.rows],
            "meta": table.meta,
        }
        path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    else:
        raise ValidationError(f"unknown output format {fmt!r}")


def write_manifest(path: Path, kind: str, params: dict, seed: int, outputs: list[str], wall: float):
    doc = {
        "kind": kind,
        "parameters": params,
        "seed": seed,
        "outputs": outputs,
        "code_version": code_version(),
        "wall_time_s": round(wall, 6),
    }
    path.write_text(json.dumps(doc, indent=1, sort_keys=True, default=str) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# parameter handling


def _coerce(key: str, raw: str, default: Any):
    try:
        if isinstance(default, bool):
            low = raw.strip().lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(raw)
            return low in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            kind = type(default[0]) if default else float
            return tuple(kind(v) for v in raw.split(",") if v.strip())
        return raw.strip()
    except ValueError as exc:
        raise ValidationError(f"{key}: cannot parse {raw!r}") from exc


def apply_overrides(defaults: dict, overrides: dict[str, str], where: Callable[[str], str] = lambda k: "") -> dict:
    params = dict(defaults)
    for key, raw in overrides.items():
        if key not in defaults:
            raise ValidationError(f"{where(key)}unknown parameter {key!r}; known: {', '.join(sorted(defaults))}")
        try:
            params[key] = _coerce(key, raw, defaults[key])
        except ValidationError as exc:
            raise ValidationError(f"{where(key)}{exc}") from None
    return params


def _grid(start: float, stop: float, points: int) -> np.ndarray:
    if points < 1:
        raise ValidationError("time grid is empty (t_points must be >= 1)")
    if stop < start or start < 0:
        raise ValidationError("time grid needs 0 <= t_start <= t_stop")
    if points == 1:
        return np.array([start])
    if stop == start:
        raise ValidationError("t_stop must exceed t_start for more than one point")
    return np.linspace(start, stop, points)


def _trap(params: dict) -> iontrap.IonTrapParams:
    try:
        return iontrap.IonTrapParams(
            nu=params["nu"],
            delta=params["delta"],
            eta=params["eta"],
            omega=params["omega"],
            n_ions=params["n_ions"],
            n_max=params["n_max"],
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _check_resonance(p: iontrap.IonTrapParams):
    try:
        p.detuning_gap
    except iontrap.ResonanceError as exc:
        raise ValidationError(str(exc)) from None


# --------------------------------------------------------------------------
# producers shared by figures and scenarios

GATE_COLUMNS = ["nu_t", "rho_gg_gg", "im_rho_gg_ee", "rho_ee_ee", "re_rho_gg_ee"]


def gate_table(params: dict, grid: np.ndarray) -> Table:
    p = _trap(params)
    _check_resonance(p)
    if params["engine"] not in ("full", "effective"):
        raise ValidationError("engine must be 'full' or 'effective'")
    psi0 = iontrap.ground_state(p, params["initial_n"])
    ts = iontrap.gate_trace(p, psi0, grid / p.nu, params["engine"])
    rows = np.column_stack([ts.times] + [ts[c] for c in GATE_COLUMNS[1:]])
    return Table(GATE_COLUMNS, rows, {"engine": params["engine"]})


def spin_wave_table(params: dict, grid: np.ndarray) -> Table:
    n = params["n_atoms"]
    flip = params["flip_index"] if params["flip_index"] >= 0 else n // 2
    if not 0 <= flip < n:
        raise ValidationError(f"flip_index {flip} outside 0..{n - 1}")
    if params["n_steps"] < 1:
        raise ValidationError("n_steps must be >= 1")
    c = lattice.HeisenbergCouplings(params["chi"], params["eta_c"], params["lambda_c"])
    ts = lattice.spin_wave_sim(n, flip, c, grid, params["n_steps"], params["boundary"], params["scheme"])
    cols = [f"jz_{k}" for k in range(n)]
    rows = np.column_stack([ts.times] + [ts[k] for k in cols])
    return Table(["t"] + cols, rows, dict(ts.meta))


def squeezing_curves(params: dict, grid: np.ndarray) -> Table:
    cfg = lattice.LatticeConfig.filled(params["n_atoms"], params["boundary"])
    cols, data = ["chi_t"], [grid]
    for k in params["neighbors"]:
        cmap = squeeze.neighbor_coupling_map(cfg, k)
        ts = squeeze.min_variance_curve(cfg, cmap, grid)
        cols += [f"var_min_{k}", f"theta_opt_{k}"]
        data += [ts["variance_min"], ts["theta_opt"]]
    return Table(cols, np.column_stack(data), {"boundary": params["boundary"]})


def monte_carlo_table(params: dict, grid: np.ndarray, seed: int) -> Table:
    bad = [p for p in params["fillings"] if not 0 < p <= 1]
    if bad:
        raise ValidationError(f"filling {bad[0]} outside (0, 1]")
    if params["trials"] < 1:
        raise ValidationError("trials must be >= 1")
    rows = []
    for p in params["fillings"]:
        for k in params["neighbors"]:
            res = squeeze.monte_carlo_xi(
                p, k, params["n_atoms"], params["trials"], seed, grid, params["boundary"], params["workers"]
            )
            rows.append([p, k, res.mean, res.stderr])
    return Table(["p", "n_visited", "mean_xi2_min", "stderr"], np.array(rows), {"trials": params["trials"]})


# --------------------------------------------------------------------------
# figures

FIGURE_DEFAULTS: dict[str, dict[str, Any]] = {
    "fig2a": dict(nu=1.0, delta=0.9, eta=0.1, omega=0.1, n_ions=2, n_max=20, initial_n=0,
                  engine="effective", t_start=0.0, t_stop=1600.0, t_points=801),
    "fig2b": dict(nu=1.0, delta=0.95, eta=0.1, omega=0.177, n_ions=2, n_max=20, initial_n=0,
                  engine="effective", t_start=0.0, t_stop=300.0, t_points=601),
    "fig4": dict(n_atoms=15, flip_index=-1, chi=1.0, eta_c=1.0, lambda_c=1.0, n_steps=10,
                 boundary="open", scheme="symmetric", t_start=0.0, t_stop=8.0, t_points=81),
    "fig5a": dict(n_atoms=15, neighbors=(1, 2, 3), boundary="open",
                  t_start=0.0, t_stop=1.5, t_points=151),
    "fig5b": dict(n_atoms=15, neighbors=(1, 2, 3, 4), fillings=(1.0, 0.5, 0.25, 0.1), trials=20,
                  boundary="open", workers=1, t_start=0.0, t_stop=1.5, t_points=31),
}


def run_figure(name: str, overrides: dict[str, str], seed: int) -> tuple[Table, dict]:
    if name not in FIGURE_DEFAULTS:
        raise ValidationError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    params = apply_overrides(FIGURE_DEFAULTS[name], overrides)
    grid = _grid(params["t_start"], params["t_stop"], params["t_points"])
    if name in ("fig2a", "fig2b"):
        table = gate_table(params, grid)
    elif name == "fig4":
        table = spin_wave_table(params, grid)
    elif name == "fig5a":
        table = squeezing_curves(params, grid)
    else:
        table = monte_carlo_table(params, grid, seed)
    table.meta.update({"figure": name, "seed": seed})
    return table, params


# --------------------------------------------------------------------------
# scenarios

SCENARIO_DEFAULTS: dict[str, dict[str, Any]] = {
    "iontrap-gate": FIGURE_DEFAULTS["fig2b"] | {"t_start": 0.0, "t_stop": 300.0, "t_points": 601},
    "ghz": dict(n=4, twist=math.pi / 2, extra_y_rotation=0.0),
    "kicked-rotor": dict(n=20, kick=3.0, rotation=math.pi / 2, steps=100, theta0=0.0, phi0=0.0),
    "spin-wave": FIGURE_DEFAULTS["fig4"],
    "squeezing": dict(n_atoms=15, n_neighbors=1, boundary="periodic", filling=1.0,
                      t_start=0.0, t_stop=1.5, t_points=31),
    "monte-carlo": dict(p=0.5, n_neighbors=1, n_atoms=15, trials=20, boundary="open", workers=1,
                        t_start=0.0, t_stop=1.5, t_points=31),
}
GRID_KEYS = ("t_start", "t_stop", "t_points")


def _line_index(text: str) -> dict[tuple[str, str], int]:
    where, section = {}, None
    for no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        m = re.match(r"^\[([^\]]+)\]$", stripped)
        if m:
            section = m.group(1).strip()
            where[(section, "")] = no
        elif section and "=" in stripped and not stripped.startswith(("#", ";")):
            where[(section, stripped.split("=", 1)[0].strip().lower())] = no
    return where


@dataclass
class Scenario:
    kind: str
    seed: int
    output: str | None
    fmt: str
    params: dict


def parse_scenario(path: Path) -> Scenario:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from None
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.ParsingError as exc:
        no, line = exc.errors[0]
        raise ValidationError(f"{path}:{no}: cannot parse {line.strip()!r}") from None
    except configparser.Error as exc:
        no = getattr(exc, "lineno", None)
        where = f"{path}:{no}:" if no else f"{path}:"
        raise ValidationError(f"{where} {exc.message.splitlines()[0]}") from None
    lines = _line_index(text)

    def at(section: str, key: str = "") -> str:
        no = lines.get((section, key)) or lines.get((section, ""))
        return f"{path}:{no}: " if no else f"{path}: "

    if not parser.has_section("scenario"):
        raise ValidationError(f"{path}: missing [scenario] section")
    head = parser["scenario"]
    kind = head.get("kind", "").strip()
    if kind not in KINDS:
        raise ValidationError(f"{at('scenario', 'kind')}unknown kind {kind!r}; choose from {', '.join(KINDS)}")
    try:
        seed = int(head.get("seed", "0"))
    except ValueError:
        raise ValidationError(f"{at('scenario', 'seed')}seed must be an integer") from None
    fmt = head.get("format", "csv").strip()
    if fmt not in ("csv", "json"):
        raise ValidationError(f"{at('scenario', 'format')}format must be csv or json")
    unknown = set(head) - {"kind", "seed", "format", "output"}
    if unknown:
        key = sorted(unknown)[0]
        raise ValidationError(f"{at('scenario', key)}unknown key {key!r} in [scenario]")

    overrides: dict[str, str] = {}
    sections = {"grid": GRID_KEYS}
    for section in parser.sections():
        if section == "scenario":
            continue
        if section not in (kind, "grid"):
            raise ValidationError(f"{at(section)}section [{section}] does not belong to kind {kind!r}")
        for key, value in parser[section].items():
            if section in sections and key not in sections[section]:
                raise ValidationError(f"{at(section, key)}unknown grid key {key!r}")
            overrides[key] = value
    where = lambda key: at(kind if (kind, key) in lines else "grid", key)  # noqa: E731
    params = apply_overrides(SCENARIO_DEFAULTS[kind], overrides, where)
    if "t_points" in params:
        try:
            _grid(params["t_start"], params["t_stop"], params["t_points"])
        except ValidationError as exc:
            raise ValidationError(f"{where('t_points')}{exc}") from None
    return Scenario(kind, seed, head.get("output"), fmt, params)


def run_scenario(sc: Scenario) -> Table:
    p = sc.params
    grid = _grid(p["t_start"], p["t_stop"], p["t_points"]) if "t_points" in p else None
    if sc.kind == "iontrap-gate":
        return gate_table(p, grid)
    if sc.kind == "spin-wave":
        return spin_wave_table(p, grid)
    if sc.kind == "ghz":
        if p["n"] < 1:
            raise ValidationError("n must be >= 1")
        s = dicke.one_axis_twist(dicke.DickeState.ground(p["n"]), p["twist"])
        if p["extra_y_rotation"]:
            s = dicke.rotate(s, "y", p["extra_y_rotation"])
        fid, phi_g, phi_e = dicke.ghz_fidelity(s)
        return Table(["n", "twist", "ghz_fidelity", "phi_g", "phi_e"], np.array([[p["n"], p["twist"], fid, phi_g, phi_e]]))
    if sc.kind == "kicked-rotor":
        if p["n"] < 1 or p["steps"] < 0:
            raise ValidationError("need n >= 1 and steps >= 0")
        s = dicke.DickeState.ground(p["n"])
        s = dicke.rotate(dicke.rotate(s, "y", p["theta0"]), "z", p["phi0"])
        rows = [[0, *dicke.mean_spin(s)]]
        for k in range(1, p["steps"] + 1):
            s = dicke.kicked_rotor_step(s, p["kick"], p["rotation"])
            rows.append([k, *dicke.mean_spin(s)])
        return Table(["step", "jx", "jy", "jz"], np.array(rows))
    if sc.kind == "squeezing":
        cfg = lattice.sample_occupations(p["filling"], p["n_atoms"], sc.seed, p["boundary"])
        cmap = squeeze.neighbor_coupling_map(cfg, p["n_neighbors"])
        res = squeeze.minimize_xi(cfg, cmap, grid)
        curve = res.variance_curve
        cols = ["chi_t", "xi2_min", "theta_opt", "variance_min", "jz"]
        rows = np.column_stack([curve.times] + [curve[c] for c in cols[1:]])
        meta = {"xi2_min": res.xi2_min, "t_opt": res.t_opt, "theta_opt": res.theta_opt,
                "occupations": list(cfg.occupations)}
        return Table(cols, rows, meta)
    if sc.kind == "monte-carlo":
        res = squeeze.monte_carlo_xi(p["p"], p["n_neighbors"], p["n_atoms"], p["trials"], sc.seed,
                                     grid, p["boundary"], p["workers"])
        rows = np.array([[r["trial"], r["n_sites"], r["xi2_min"], r["t_opt"], r["theta_opt"]] for r in res.records])
        return Table(["trial", "n_sites", "xi2_min", "t_opt", "theta_opt"], rows,
                     {"mean_xi2_min": res.mean, "stderr": res.stderr})
    raise ValidationError(f"unknown kind {sc.kind!r}")


# --------------------------------------------------------------------------
# entry point


def _parse_sets(items: list[str]) -> dict[str, str]:
    out = {}
    for item in items:
        if "=" not in item:
            raise ValidationError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riqs", description="Reduced-instruction-set quantum simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    fig = sub.add_parser("figure", help="reproduce a figure's data")
    fig.add_argument("name", help=", ".join(FIGURES))
    fig.add_argument("--out", type=Path)
    fig.add_argument("--format", choices=("csv", "json"), default="csv")
    fig.add_argument("--seed", type=int, default=0)
    fig.add_argument("--set", dest="sets", action="append", default=[], metavar="KEY=VALUE")
    run = sub.add_parser("run", help="run a scenario config file")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        if args.command == "figure":
            table, params = run_figure(args.name, _parse_sets(args.sets), args.seed)
            out = args.out or Path(f"{args.name}.{args.format}")
            kind, seed, fmt = args.name, args.seed, args.format
        else:
            sc = parse_scenario(args.config)
            table = run_scenario(sc)
            params = sc.params
            out = args.out or Path(sc.output or f"{sc.kind}.{sc.fmt}")
            kind, seed, fmt = sc.kind, sc.seed, sc.fmt
        try:
            write_table(table, out, fmt)
        except OSError as exc:
            raise ValidationError(f"cannot write {out}: {exc.strerror}") from None
        manifest = out.with_name(out.name + ".manifest.json")
        write_manifest(manifest, kind, params, seed, [str(out)], time.perf_counter() - start)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NormDriftError, squeeze.UndefinedSqueezingError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{kind}: seed={seed}")
    for key in sorted(params):
        print(f"  {key} = {params[key]}")
    print(f"wrote {out} ({len(table.rows)} rows) and {manifest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
