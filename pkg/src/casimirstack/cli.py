"""Command-line interface.

Every subcommand reads an optional TOML config (``--config``) whose
sections are ``[stack]``, ``[quadrature]``, ``[output]`` and one section
named after the command (dashes become underscores). Flags override the
file; unknown keys are an error.

Exit status: 0 success, 2 configuration error, 3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from .assembly import MAX_PARTITION_N, expand_delta, format_expansion
from .constants import StackKind, StackSpec, constant_permittivity
from .energy import NonConvergence, QuadratureConfig, casimir_energies, ratio_curve
from .fitting import (closed_form_energy, closed_form_prefactor, fit_power_law, fit_power_law_direct,
                      fit_ratio_asymptote, fit_ratio_asymptote_grid, power_law_samples)
from .kernel import BACKEND
from .oracle import equivalence_suite
from .superconductor import load_presets, transition_energies

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGENCE = 0, 2, 3

TABLE_COUNTS = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 13, 15, 17, 19]


class ConfigError(ValueError):
    pass


# name -> (type, default, help). ``None`` defaults mean "not set".
STACK_KEYS = {
    "kind": (str, "plasma-sheet", "stack kind: plasma-sheet or dielectric"),
    "n_cavities": (int, 1, "number of cavities N"),
    "gap": (float, 2e-9, "cavity gap d in m"),
    "temperature": (float, 94.0, "temperature in K"),
    "omega": (float, 49593.3, "plasma parameter Omega in 1/m"),
    "eps_inner": (float, 1.0, "constant permittivity of the cavities (dielectric kind)"),
    "eps_outer": (float, 1.0, "constant permittivity of the slabs (dielectric kind)"),
}
QUAD_KEYS = {
    "rel_tol": (float, 1e-8, "relative tolerance of the k quadrature"),
    "k_scale": (float, None, "k mapping scale in 1/m (default max(1/d, sqrt(Omega/d)))"),
    "max_nodes": (int, 6000, "maximum number of k nodes"),
    "matsubara_rel_tail": (float, 1e-10, "Matsubara truncation threshold"),
    "l_max_cap": (int, 400_000, "maximum Matsubara index"),
    "workers": (int, 1, "threads over Matsubara chunks"),
}
OUTPUT_KEYS = {
    "format": (str, "pretty", "csv, json or pretty"),
    "path": (str, None, "output file (default stdout)"),
}
COMMAND_KEYS = {
    "energy": {"n_list": (str, None, "comma-separated cavity counts (default n_cavities)")},
    "ratio-table": {
        "n_max": (int, 19, "largest N; rows are 1..n_max"),
        "n_list": (str, None, "explicit comma-separated N list (overrides n_max)"),
    },
    "sweep-d": {
        "d_min": (float, 1e-9, "smallest gap in m"),
        "d_max": (float, 10e-9, "largest gap in m"),
        "points": (int, 10, "number of log-spaced gaps"),
        "n_list": (str, "3,11,19", "cavity counts"),
    },
    "sweep-omega": {
        "omega_min": (float, 1e4, "smallest Omega in 1/m"),
        "omega_max": (float, 1e6, "largest Omega in 1/m"),
        "points": (int, 9, "number of log-spaced Omega values"),
        "n_list": (str, "10,19", "cavity counts"),
    },
    "fit": {
        "n_max": (int, 19, "largest N in the ratio data"),
        "d_list": (str, "1e-9,2e-9,3e-9,4e-9,5e-9,6e-9,7e-9,8e-9,9e-9,1e-8", "gaps of the power-law grid"),
        "omega_list": (str, "1e4,1e5,1e6", "Omega values of the power-law grid"),
        "n_list": (str, ",".join(map(str, TABLE_COUNTS)), "cavity counts of the power-law grid"),
        "grid_rel_tol": (float, 1e-6, "quadrature tolerance used on the power-law grid"),
    },
    "ybco": {
        "preset": (str, "harshman", "material preset"),
        "presets_file": (str, None, "TOML file with presets (default: bundled)"),
        "t_below": (float, None, "temperature below T_c in K (default from preset)"),
        "t_above": (float, None, "temperature above T_c in K (default from preset)"),
        "mode": (str, "closed", "closed (fitted closed form) or exact (full integration)"),
    },
    "oracle-check": {
        "points": (int, 1000, "number of random spectral points"),
        "seed": (int, 0, "random seed"),
    },
    "expand-delta": {"n": (int, None, "cavity count N")},
}
STACK_COMMANDS = {"energy", "ratio-table", "sweep-d", "sweep-omega", "fit"}

# short flag aliases
ALIASES = {"n_cavities": ["--n"], "gap": ["--d"], "temperature": ["--t"]}


def _flag(name):
    return "--" + name.replace("_", "-")


def _add_keys(parser, keys, dest_prefix):
    for name, (typ, _, text) in keys.items():
        opts = [_flag(name)] + ALIASES.get(name, []) if dest_prefix == "stack" else [_flag(name)]
        parser.add_argument(*opts, dest=f"{dest_prefix}.{name}", metavar=name.upper(), type=typ, default=None,
                            help=text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="casimirstack", description="Casimir energy of layered cavity stacks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, keys in COMMAND_KEYS.items():
        p = sub.add_parser(cmd, help=f"{cmd} command")
        p.add_argument("--config", help="TOML configuration file")
        if cmd == "expand-delta":
            p.add_argument("N", nargs="?", type=int, help="cavity count")
        _add_keys(p, {k: v for k, v in keys.items() if k != "n" or cmd != "expand-delta"}, "cmd")
        if cmd in STACK_COMMANDS:
            _add_keys(p, STACK_KEYS, "stack")
            _add_keys(p, QUAD_KEYS, "quadrature")
        _add_keys(p, OUTPUT_KEYS, "output")
    return parser


def _load_file(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then flags."""
    sections = {"stack": STACK_KEYS, "quadrature": QUAD_KEYS, "output": OUTPUT_KEYS,
                command.replace("-", "_"): COMMAND_KEYS[command]}
    if command not in STACK_COMMANDS:
        sections.pop("stack")
        sections.pop("quadrature")
    conf = {sec: {k: v[1] for k, v in keys.items()} for sec, keys in sections.items()}
    if getattr(args, "config", None):
        raw = _load_file(args.config)
        for sec, table in raw.items():
            if sec == "command":
                if table != command:
                    raise ConfigError(f"config is for command {table!r}, not {command!r}")
                continue
            if sec not in sections:
                raise ConfigError(f"unknown config section [{sec}]")
            if not isinstance(table, dict):
                raise ConfigError(f"[{sec}] must be a table")
            for key, value in table.items():
                if key not in sections[sec]:
                    raise ConfigError(f"unknown config key {sec}.{key}")
                typ = sections[sec][key][0]
                try:
                    conf[sec][key] = typ(value) if not isinstance(value, list) else ",".join(map(str, value))
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"bad value for {sec}.{key}: {value!r}") from exc
    cmd_sec = command.replace("-", "_")
    for dest, value in vars(args).items():
        if value is None or "." not in dest:
            continue
        sec, key = dest.split(".", 1)
        conf[cmd_sec if sec == "cmd" else sec][key] = value
    if command == "expand-delta" and getattr(args, "N", None) is not None:
        conf[cmd_sec]["n"] = args.N
    fmt = conf["output"]["format"]
    if fmt not in ("csv", "json", "pretty"):
        raise ConfigError(f"unknown output format {fmt!r}")
    return conf


def _ints(text, name):
    try:
        out = [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"{name} must be a comma-separated list of integers") from exc
    if not out or min(out) < 1:
        raise ConfigError(f"{name} must list positive integers")
    return out


def _floats(text, name):
    try:
        out = [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"{name} must be a comma-separated list of numbers") from exc
    if not out:
        raise ConfigError(f"{name} must not be empty")
    return out


def _stack(conf) -> StackSpec:
    s = conf["stack"]
    try:
        kind = StackKind(s["kind"])
        if kind is StackKind.PLASMA_SHEET:
            return StackSpec.plasma_sheets(s["n_cavities"], s["gap"], s["omega"], s["temperature"])
        return StackSpec(kind, s["n_cavities"], s["gap"], s["temperature"], s["omega"],
                         constant_permittivity(s["eps_inner"]), constant_permittivity(s["eps_outer"]))
    except ValueError as exc:
        raise ConfigError(f"invalid stack: {exc}") from exc


def _quad(conf, **override) -> QuadratureConfig:
    q = dict(conf["quadrature"])
    q.update(override)
    try:
        return QuadratureConfig(**q)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid quadrature settings: {exc}") from exc


def _energy_diag(res):
    return {"l_used": res.l_used, "k_nodes_used": res.k_nodes_used, "est_error": res.est_error}


# --- commands -------------------------------------------------------------

def cmd_energy(conf):
    spec = _stack(conf)
    ns = _ints(conf["energy"]["n_list"], "n_list") if conf["energy"]["n_list"] else [spec.n_cavities]
    res = casimir_energies(spec, ns, _quad(conf))
    columns = [("N", ""), ("E", "J/m^2"), ("E_TM", "J/m^2"), ("E_TE", "J/m^2"), ("est_error", "J/m^2")]
    rows = [[n, res[n].e_per_area, res[n].tm_part, res[n].te_part, res[n].est_error] for n in ns]
    return columns, rows, {str(n): _energy_diag(res[n]) for n in ns}


def cmd_ratio_table(conf):
    c = conf["ratio_table"]
    ns = _ints(c["n_list"], "n_list") if c["n_list"] else list(range(1, c["n_max"] + 1))
    rows_ = ratio_curve(_stack(conf).with_(n_cavities=1), ns, _quad(conf))
    columns = [("N", ""), ("ratio", ""), ("ratio_TM", ""), ("E", "J/m^2"), ("E_TM", "J/m^2")]
    rows = [[r.n, r.ratio, r.ratio_tm, r.energy.e_per_area, r.energy.tm_part] for r in rows_]
    return columns, rows, {str(r.n): _energy_diag(r.energy) for r in rows_}


def _sweep(conf, values, key):
    c = conf[key]
    ns = _ints(c["n_list"], "n_list")
    base = _stack(conf).with_(n_cavities=1)
    rows, diag = [], {}
    for v in values:
        spec = base.with_(gap=v) if key == "sweep_d" else base.with_(omega=v)
        res = casimir_energies(spec, ns, _quad(conf))
        for n in ns:
            e = res[n]
            closed = closed_form_energy(n, spec.gap, spec.omega)
            rows.append([n, spec.gap, spec.omega, e.e_per_area, e.tm_part, closed])
            diag[f"{n}@{v:.6e}"] = _energy_diag(e)
    columns = [("N", ""), ("d", "m"), ("omega", "1/m"), ("E", "J/m^2"), ("E_TM", "J/m^2"),
               ("E_closed_form", "J/m^2")]
    return columns, rows, diag


def cmd_sweep_d(conf):
    c = conf["sweep_d"]
    if not 0 < c["d_min"] <= c["d_max"] or c["points"] < 1:
        raise ConfigError("need 0 < d_min <= d_max and points >= 1")
    return _sweep(conf, np.geomspace(c["d_min"], c["d_max"], c["points"]), "sweep_d")


def cmd_sweep_omega(conf):
    c = conf["sweep_omega"]
    if not 0 < c["omega_min"] <= c["omega_max"] or c["points"] < 1:
        raise ConfigError("need 0 < omega_min <= omega_max and points >= 1")
    return _sweep(conf, np.geomspace(c["omega_min"], c["omega_max"], c["points"]), "sweep_omega")


def cmd_fit(conf):
    c = conf["fit"]
    spec = _stack(conf).with_(n_cavities=1)
    ratios = ratio_curve(spec, list(range(1, c["n_max"] + 1)), _quad(conf))
    rows, diag = [], {}
    for label, attr in (("TM+TE", "ratio"), ("TM", "ratio_tm")):
        data = [(r.n, getattr(r, attr)) for r in ratios]
        for fit in (fit_ratio_asymptote(data), fit_ratio_asymptote_grid(data)):
            for k, v in fit.params.items():
                rows.append([f"asymptote[{label},{fit.method}]", k, v, fit.stderr[k], fit.rss])
            diag[f"asymptote[{label},{fit.method}]"] = {"converged": fit.converged, "iterations": fit.iterations}
    samples = power_law_samples(_floats(c["d_list"], "d_list"), _floats(c["omega_list"], "omega_list"),
                                _ints(c["n_list"], "n_list"), spec.temperature,
                                _quad(conf, rel_tol=c["grid_rel_tol"]))
    for label, col in (("TM+TE", 3), ("TM", 4)):
        pts = [(s[0], s[1], s[2], s[col]) for s in samples]
        for fit in (fit_power_law(pts), fit_power_law_direct(pts)):
            for k, v in fit.params.items():
                rows.append([f"power_law[{label},{fit.method}]", k, v, fit.stderr[k], fit.rss])
            rows.append([f"power_law[{label},{fit.method}]", "prefactor_J_m",
                         closed_form_prefactor(fit.params["K"]), math.nan, fit.rss])
            diag[f"power_law[{label},{fit.method}]"] = {"converged": fit.converged, "iterations": fit.iterations}
    columns = [("fit", ""), ("param", ""), ("value", ""), ("stderr", ""), ("rss", "")]
    return columns, rows, diag


def cmd_ybco(conf):
    c = conf["ybco"]
    try:
        presets = load_presets(c["presets_file"])
    except (OSError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    if c["preset"] not in presets:
        raise ConfigError(f"unknown preset {c['preset']!r}; available: {sorted(presets)}")
    if c["mode"] not in ("closed", "exact"):
        raise ConfigError("mode must be closed or exact")
    model = presets[c["preset"]]
    try:
        r = transition_energies(model, c["t_below"], c["t_above"], mode=c["mode"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    columns = [("preset", ""), ("T_below", "K"), ("T_above", "K"), ("omega_sc", "1/m"), ("omega_n", "1/m"),
               ("E_sc", "J/m^2"), ("E_n", "J/m^2"), ("dE", "J/m^2"), ("eta", "")]
    rows = [[model.name, r.t_below, r.t_above, r.omega_sc, r.omega_n, r.e_sc, r.e_n, r.delta_e, r.eta]]
    return columns, rows, {"mode": r.mode, "model": asdict(model)}


def cmd_oracle_check(conf):
    c = conf["oracle_check"]
    if c["points"] < 1:
        raise ConfigError("points must be >= 1")
    rep = equivalence_suite(c["points"], c["seed"])
    columns = [("points", ""), ("comparisons", ""), ("max_rel_dev", ""), ("max_conv_dev", ""),
               ("max_conv_scaled", "")]
    rows = [[rep.n_points, rep.n_comparisons, rep.max_rel_dev, rep.max_conv_dev, rep.max_conv_scaled]]
    return columns, rows, {"worst": rep.worst}


def cmd_expand_delta(conf):
    n = conf["expand_delta"]["n"]
    if n is None or not 1 <= n <= MAX_PARTITION_N:
        raise ConfigError(f"expand-delta needs 1 <= N <= {MAX_PARTITION_N}")
    poly = expand_delta(n)
    return [("N", ""), ("expansion", "")], [[n, format_expansion(poly)]], {"terms": len(poly)}


COMMANDS = {
    "energy": cmd_energy, "ratio-table": cmd_ratio_table, "sweep-d": cmd_sweep_d,
    "sweep-omega": cmd_sweep_omega, "fit": cmd_fit, "ybco": cmd_ybco,
    "oracle-check": cmd_oracle_check, "expand-delta": cmd_expand_delta,
}


# --- output ---------------------------------------------------------------

def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12e}"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def render(fmt, command, conf, columns, rows, diag) -> str:
    header = [name + (f" [{unit}]" if unit else "") for name, unit in columns]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()
    if fmt == "json":
        results = [{name: _jsonable(v) for (name, _), v in zip(columns, r)} for r in rows]
        doc = {"config": _jsonable({"command": command, **conf}), "results": results,
               "diagnostics": _jsonable({"backend": BACKEND, **diag})}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    cells = [header] + [[_cell(v) for v in r] for r in rows]
    if command == "expand-delta":
        return f"Delta_{rows[0][0]} = {rows[0][1]}\n"
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        conf = resolve_config(command, args)
        columns, rows, diag = COMMANDS[command](conf)
    except ConfigError as exc:
        print(f"casimirstack: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as exc:
        print(f"casimirstack: not converged: {exc} ({exc.diagnostics})", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    text = render(conf["output"]["format"], command, conf, columns, rows, diag)
    path = conf["output"]["path"]
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
