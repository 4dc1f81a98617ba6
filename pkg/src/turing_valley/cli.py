"""Command-line front end.

Every subcommand reads one JSON config and writes CSV or JSON.  Exit codes:
0 ok, 1 verification failure, 2 bad config, 3 solver precondition failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import jsonschema
import numpy as np

from .baseline import (
    income_gap,
    labor_max_vertex,
    lower_h2,
    labor_max_thresholds,
    solve_baseline,
    straight_path,
    trajectory,
    vertex_incomes,
)
from .econ import Economy, abundance_holds
from .errors import DomainError, PreconditionError
from .general import discontinuity_scan, solve_general
from .oracle import max_output_one_type, max_output_two_type
from .twotype import (
    TwoTypeEconomy,
    find_max_total_labor,
    match_margins,
    per_type_candidates,
    per_type_labor_max,
    solve_two_type,
)
from .verify import run_all

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_PRECONDITION = 0, 1, 2, 3
DEFAULT_FORMAT = {"solve": "json", "maxlabor": "json", "verify": "json",
                  "sweep": "csv", "trajectory": "csv", "scan": "csv"}

_point = {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}, "minItems": 2, "maxItems": 2}
_dist = {
    "type": "object",
    "properties": {
        "family": {"const": "product_power"},
        "theta": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 2, "maxItems": 2},
    },
    "required": ["family"],
}
ECONOMY_SCHEMA = {
    "type": "object",
    "properties": {
        "h": _point, "m": _point, "c": {"type": "number"},
        "mu": {"type": ["number", "null"]}, "synergy": {"type": "boolean"}, "dist": _dist,
    },
    "required": ["h", "c"],
}
TWO_TYPE_SCHEMA = {
    "type": "object",
    "properties": {
        "hA": _point, "hB": _point, "phiA": {"type": "number"}, "m": _point,
        "c": {"type": "number"}, "mu": {"type": ["number", "null"]}, "dist": _dist,
    },
    "required": ["hA", "hB", "phiA", "c"],
}
CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "economy": ECONOMY_SCHEMA,
        "two_type": TWO_TYPE_SCHEMA,
        "grid": {
            "type": "object",
            "properties": {"resolution": {"oneOf": [
                {"type": "integer", "minimum": 2},
                {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 2, "maxItems": 2},
            ]}},
        },
        "path": {
            "type": "object",
            "properties": {"start": _point, "end": _point, "steps": {"type": "integer", "minimum": 1},
                           "points": {"type": "array", "items": _point, "minItems": 1}},
        },
        "scan": {"type": "object", "properties": {"factor": {"type": "number", "exclusiveMinimum": 0},
                                                  "floor": {"type": "number", "minimum": 0}}},
        "search": {"type": "object", "properties": {"resolution": {"type": "integer", "minimum": 2},
                                                    "top_k": {"type": "integer", "minimum": 1},
                                                    "xatol": {"type": "number", "exclusiveMinimum": 0}}},
        "verify": {"type": "object", "properties": {"instances": {"type": "integer", "minimum": 0},
                                                    "fault": {"type": "number"}}},
        "reference": {"type": "object", "properties": {
            "tolerance": {"type": "number", "minimum": 0},
            "values": {"type": "object", "additionalProperties": {"type": "number"}},
        }},
        "seed": {"type": "integer"},
    },
    "anyOf": [{"required": ["economy"]}, {"required": ["two_type"]}, {"required": ["verify"]}],
}


class ConfigError(Exception):
    pass


def _normalize(cfg: dict) -> dict:
    """Accept a flat economy block as shorthand for ``{"economy": ...}``."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if any(k in cfg for k in ("economy", "two_type", "verify")):
        return cfg
    if "hA" in cfg:
        keys = TWO_TYPE_SCHEMA["properties"]
        return {"two_type": {k: v for k, v in cfg.items() if k in keys},
                **{k: v for k, v in cfg.items() if k not in keys}}
    keys = ECONOMY_SCHEMA["properties"]
    return {"economy": {k: v for k, v in cfg.items() if k in keys},
            **{k: v for k, v in cfg.items() if k not in keys}}


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = _normalize(json.load(fh))
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except (OSError, json.JSONDecodeError, jsonschema.ValidationError) as exc:
        raise ConfigError(str(exc).splitlines()[0]) from exc
    return cfg


def _economy(cfg: dict, need_m: bool = True) -> Economy:
    block = dict(cfg["economy"])
    if block.get("mu") is None:
        block["mu"] = math.inf
    if "m" not in block:
        if need_m:
            raise ConfigError("economy block needs m")
        block["m"] = list(block["h"])
    return Economy.from_config(block)


def _two_type(cfg: dict, need_m: bool = True) -> TwoTypeEconomy:
    block = dict(cfg["two_type"])
    if "m" not in block:
        if need_m:
            raise ConfigError("two_type block needs m")
        block["m"] = [0.0, 0.0]
    return TwoTypeEconomy.from_config(block)


def _grid_shape(cfg: dict) -> tuple:
    res = cfg.get("grid", {}).get("resolution", 200)
    return (res, res) if isinstance(res, int) else tuple(res)


def _finite(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None
    return x


def _clean(obj):
    """JSON-safe copy: tuples become lists, non-finite floats become null."""
    if isinstance(obj, dict):
        return {(",".join(f"{v:g}" for v in k) if isinstance(k, tuple) else str(k)): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return _finite(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "value") and isinstance(obj.value, str):
        return obj.value
    return obj


def _fmt(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return "%.12g" % v


def write_csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _rows_to_json(header: list, rows: list) -> list:
    return [dict(zip(header, row)) for row in rows]


# one-type solve


def _solve_one(econ: Economy):
    if math.isinf(econ.mu) or abundance_holds(econ):
        return solve_baseline(econ)
    return solve_general(econ)


def cmd_solve(cfg: dict, args) -> tuple:
    if "two_type" in cfg:
        econ2 = _two_type(cfg)
        eq = solve_two_type(econ2)
        report = {"model": "two_type", "economy": econ2.to_config(), **eq.to_dict()}
        cands = per_type_candidates(econ2)
        report["candidates"] = {k: dict(zip(("w_s", "w_b", "w_t"), wc.as_tuple())) for k, wc in zip("AB", cands)}
        report["margins"] = match_margins(econ2, cands)._asdict()
        report["oracle_delta"] = eq.output - max_output_two_type(econ2).output
    else:
        econ = _economy(cfg)
        eq = _solve_one(econ)
        report = {"model": "one_type", "economy": econ.to_config(), **eq.to_dict()}
        report["abundant"] = abundance_holds(econ)
        if math.isfinite(econ.mu) and eq.output is not None:
            report["oracle_delta"] = eq.output - max_output_one_type(econ).output
        else:
            report["oracle_delta"] = None
    return report, None


# sweep


ONE_TYPE_COLUMNS = ["m1", "m2", "region", "w_star", "r_star", "output", "capital_income"]
TWO_TYPE_COLUMNS = ["m1", "m2", "case", "wA", "wB", "total_w", "r_star", "in_Rh"]


def _sweep_rows(task) -> list:
    kind, block, g1, g2 = task
    rows = []
    if kind == "two_type":
        econ2 = _two_type({"two_type": block})
        for x in g1:
            for y in g2:
                eq = solve_two_type(econ2.with_m((x, y)))
                rows.append([x, y, eq.case, eq.wA, eq.wB, eq.total_w, eq.r_star, not eq.touches_machines])
        return rows
    econ = _economy({"economy": block})
    for x in g1:
        for y in g2:
            eq = _solve_one(econ.with_m((x, y)))
            cap = None if eq.r_star is None else econ.mu * eq.r_star
            rows.append([x, y, eq.region.value, eq.w_star, eq.r_star, eq.output, cap])
    return rows


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("TV_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise ConfigError(f"TV_THREADS must be an integer, got {env!r}")


def _parallel_map(fn, tasks: list, threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def cmd_sweep(cfg: dict, args) -> tuple:
    n1, n2 = _grid_shape(cfg)
    g1 = [float(v) for v in np.linspace(0.0, 1.0, n1)]
    g2 = [float(v) for v in np.linspace(0.0, 1.0, n2)]
    if "two_type" in cfg:
        kind, block, header = "two_type", dict(cfg["two_type"]), TWO_TYPE_COLUMNS
        block.setdefault("m", [0.0, 0.0])
        _two_type({"two_type": block})
    else:
        kind, block, header = "economy", dict(cfg["economy"]), ONE_TYPE_COLUMNS
        block.setdefault("m", list(block["h"]))
        _economy({"economy": block})
    threads = _threads(args)
    # row-major: one task per block of m1 values, merged in submission order
    chunk = max(1, math.ceil(n1 / (4 * threads)))
    tasks = [(kind, block, g1[i:i + chunk], g2) for i in range(0, n1, chunk)]
    rows = [r for part in _parallel_map(_sweep_rows, tasks, threads) for r in part]
    return (header, rows), None


# maxlabor


def _compare_reference(cfg: dict, computed: dict) -> list:
    ref = cfg.get("reference", {})
    tol = ref.get("tolerance", 1e-3)
    notes = []
    for key, expected in sorted(ref.get("values", {}).items()):
        if key not in computed:
            notes.append({"key": key, "reference": expected, "computed": None, "note": "no computed value with this key"})
            continue
        got = computed[key]
        if abs(got - expected) > tol:
            notes.append({"key": key, "reference": expected, "computed": got, "abs_diff": abs(got - expected),
                          "note": "computed value differs from reference beyond tolerance"})
    return notes


def _vkey(prefix: str, v) -> str:
    return f"{prefix}({v[0]:g},{v[1]:g})"


def cmd_maxlabor(cfg: dict, args) -> tuple:
    if "two_type" in cfg:
        econ2 = _two_type(cfg, need_m=False)
        search = cfg.get("search", {})
        best = find_max_total_labor(econ2, search.get("resolution", 200), search.get("top_k", 5),
                                    search.get("xatol", 1e-7))
        per_type = {}
        computed = {}
        for kind in "AB":
            vm = per_type_labor_max(econ2, kind)
            h = econ2.hA if kind == "A" else econ2.hB
            table = vertex_incomes(econ2.dist, h, econ2.c)
            per_type[kind] = {"argmax": vm.argmax, "value": vm.value, "vertex_values": table}
            # equilibrium wages of each type at the vertices
            for v in table:
                eq = solve_two_type(econ2.with_m(v))
                computed[_vkey("w" + kind, v)] = eq.wA if kind == "A" else eq.wB
        for v, val in best.vertex_values.items():
            computed[_vkey("total", v)] = val
        inner = solve_two_type(econ2.with_m(best.argmax))
        report = {
            "model": "two_type",
            "economy": econ2.to_config(),
            "per_type": per_type,
            "global": {"argmax": best.argmax, "value": best.value, "is_vertex": best.is_vertex,
                       "case": inner.case, "wA": inner.wA, "wB": inner.wB},
            "vertex_total": best.vertex_values,
            "computed": computed,
        }
    else:
        econ = _economy(cfg, need_m=False)
        vm = labor_max_vertex(econ.dist, econ.h, econ.c)
        table = vertex_incomes(econ.dist, econ.h, econ.c)
        curve = labor_max_thresholds(econ.dist, econ.c, [econ.h[0]])
        computed = {_vkey("w", v): val for v, val in table.items()}
        report = {
            "model": "one_type",
            "economy": econ.to_config(),
            "argmax": vm.argmax,
            "value": vm.value,
            "vertex_values": table,
            "income_gap": income_gap(econ.dist, econ.h, econ.c),
            "thresholds": {
                "h1_bar": curve.h1_bar,
                "h2_lower": float(curve.h2_lower[0]),
                "h2_bar": float(curve.h2_bar[0]),
                "equal_strength_h2": lower_h2(econ.dist, econ.h[0]),
            },
            "computed": computed,
        }
    report["discrepancies"] = _compare_reference(cfg, report["computed"])
    return report, None


# trajectory and scan


def _path(cfg: dict) -> list:
    spec = cfg.get("path")
    if not spec:
        raise ConfigError("config needs a path block")
    if "points" in spec:
        return [tuple(p) for p in spec["points"]]
    if "start" not in spec or "end" not in spec:
        raise ConfigError("path needs points or start and end")
    return straight_path(spec["start"], spec["end"], spec.get("steps", 100))


def cmd_trajectory(cfg: dict, args) -> tuple:
    if "economy" not in cfg:
        raise ConfigError("trajectory needs an economy block")
    econ = _economy(cfg, need_m=False)
    pts = trajectory(econ, _path(cfg))
    header = ["step", "m1", "m2", "region", "w_star", "r_star", "output"]
    rows = [[k, p.m[0], p.m[1], p.region.value, p.w_star, p.r_star, p.output] for k, p in enumerate(pts)]
    return (header, rows), None


def cmd_scan(cfg: dict, args) -> tuple:
    if "economy" not in cfg:
        raise ConfigError("scan needs an economy block")
    econ = _economy(cfg, need_m=False)
    spec = cfg.get("path", {})
    if "start" not in spec or "end" not in spec:
        raise ConfigError("scan needs path.start and path.end")
    opts = cfg.get("scan", {})
    res = discontinuity_scan(econ, spec["start"], spec["end"], spec.get("steps", 1000),
                             opts.get("factor", 10.0), opts.get("floor", 1e-9))
    w_flag = {round(j["t_lo"], 15): j["direction"] for j in res.w_jumps()}
    r_flag = {round(j["t_lo"], 15): j["direction"] for j in res.r_jumps()}
    header = ["t", "m1", "m2", "region", "w_star", "r_star", "w_jump", "r_jump"]
    rows = []
    for k, t in enumerate(res.t):
        key = round(float(t), 15)
        r = res.r_star[k]
        rows.append([float(t), float(res.m[k][0]), float(res.m[k][1]), res.regions[k].value,
                     float(res.w_star[k]), None if np.isnan(r) else float(r),
                     w_flag.get(key, 0), r_flag.get(key, 0)])
    return (header, rows, res.jumps), None


def _verify_task(task):
    return [r.to_dict() for r in run_all(*task)]


def cmd_verify(cfg: dict, args) -> tuple:
    spec = cfg.get("verify", {})
    n = spec.get("instances", 200)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    fault = spec.get("fault", 0.0)
    suites = _verify_task((n, seed, fault))
    report = {"instances": n, "seed": seed, "fault": fault, "suites": suites,
              "passed": all(s["passed"] for s in suites), "warnings": []}
    if n == 0:
        report["warnings"].append("instance count is 0; verification is vacuous")
    return report, (EXIT_OK if report["passed"] else EXIT_VERIFY)


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "maxlabor": cmd_maxlabor,
    "trajectory": cmd_trajectory,
    "scan": cmd_scan,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="turing-valley", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=name != "verify", help="JSON run config")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), help=f"default: {DEFAULT_FORMAT[name]}")
        p.add_argument("--threads", type=int, help="worker processes (fallback: TV_THREADS)")
        p.add_argument("--seed", type=int, help="seed for random instances")
    return ap


def _render(result, fmt: str) -> str:
    if isinstance(result, dict):
        if fmt == "csv":
            flat = {k: v for k, v in _clean(result).items() if not isinstance(v, (dict, list))}
            return write_csv(list(flat), [list(flat.values())])
        return write_json(result)
    header, rows, *extra = result
    if fmt == "csv":
        return write_csv(header, rows)
    payload = {"rows": _rows_to_json(header, rows)}
    if extra:
        payload["jumps"] = extra[0]
    return write_json(payload)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.format or DEFAULT_FORMAT[args.command]
    try:
        cfg = load_config(args.config) if args.config else {"verify": {}}
        out = COMMANDS[args.command](cfg, args)
    except (ConfigError, DomainError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    result, code = out
    text = _render(result, fmt)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
