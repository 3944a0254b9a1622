"""Command line runner for the bid-ask laboratory.

Every subcommand reads its parameters from flags and, optionally, from the
table of the same name in a TOML file given by ``--config``; flags win.
Reports are canonical JSON (sorted keys, shortest round-trip floats) and
embed the full parameter set, the seed and the package version, so that
``--config report.json`` reruns an experiment bit for bit.

Exit status: 0 when every check passes, 1 on a failed check, 2 on bad input.
"""
from __future__ import annotations

import argparse
import json
import math
import secrets
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .cost import (AlmostSimpleStrategy, StrategyPath, almost_simple_cost, cost_process_of,
                   truncation_monotone, upper_bound_violations)
from .dynkin import (brute_force_game_value, drift_sign_check, dynkin_value, mean_variation,
                     nash_check, sandwich_check)
from .market import BidAskPath, certified_level, check_spread_assumption, validate_model
from .paths import GeneratedTree, GeneratorConfig, generate, parse_pattern
from .portfolio import (approximation_experiment, drift_tree_family, invariance_check,
                        local_time_counterexample, riskless_position)
from .scenario import ScenarioTree, build_tree, count_stopping_times

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad flags, configuration or input files (exit status 2)."""


# ---------------------------------------------------------------------------
# parameter tables


@dataclass(frozen=True)
class Param:
    kind: str            # int, float, str, bool, floats, ints
    default: Any
    help: str


def _parse_value(kind: str, raw):
    if raw is None:
        return None
    try:
        if kind == "int":
            if isinstance(raw, bool):
                raise ValueError("boolean given")
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "str":
            return str(raw)
        if kind == "bool":
            if isinstance(raw, bool):
                return raw
            return str(raw).lower() in ("1", "true", "yes", "on")
        if kind in ("floats", "ints"):
            items = raw.split(",") if isinstance(raw, str) else list(raw)
            conv = float if kind == "floats" else int
            return [conv(x) for x in items if str(x).strip() != ""]
    except (TypeError, ValueError) as exc:
        raise InputError(f"cannot read {raw!r} as {kind}: {exc}") from None
    raise AssertionError(kind)


GEN_PARAMS = {
    "kind": Param("str", "random_walk", "generator kind"),
    "steps": Param("int", 100, "number of grid steps N"),
    "horizon": Param("float", 1.0, "time horizon T"),
    "path_index": Param("int", 0, "index of the random stream"),
    "volatility": Param("float", 1.0, "volatility of the mid price"),
    "hurst": Param("float", 0.5, "Hurst parameter for fbm"),
    "spread": Param("float", 0.0, "spread level"),
    "pattern": Param("str", "", "spread pattern such as 0++00+ or 0,1,1,0"),
    "alpha": Param("float", 0.0, "price weight for reflected_walk"),
    "start": Param("float", 0.0, "initial mid price"),
    "depth": Param("int", 3, "tree depth for tree_random"),
    "max_branching": Param("int", 2, "maximal branching for tree_random"),
    "drift": Param("float", 0.0, "trend injected into tree_random prices"),
}

PARAMS: dict[str, dict[str, Param]] = {
    "generate": GEN_PARAMS,
    "dynkin": {
        "tree": Param("str", "", "game JSON file {tree, bid, ask[, terminal]}"),
        "fixture": Param("str", "random", "built-in game when no file is given: depth1 or random"),
        "depth": Param("int", 3, "depth of the random tree"),
        "max_branching": Param("int", 2, "maximal branching of the random tree"),
        "drift": Param("float", 0.0, "trend injected into the random prices"),
        "brute_force": Param("bool", True, "compare with exhaustive enumeration when small enough"),
        "cap": Param("int", 10**6, "enumeration cap for stopping-time pairs"),
    },
    "cost": {
        "path": Param("str", "", "path CSV t,bid,ask,S"),
        "strategy": Param("str", "", "strategy CSV t,phi"),
        "almost_simple": Param("str", "", "almost simple strategy JSON {jumps:[{t, at, after}]}"),
        "family": Param("str", "alternating", "built-in strategy when no file is given: alternating, ramp, zero"),
        "steps": Param("int", 20, "grid steps of the built-in path"),
        "spread": Param("float", 0.2, "spread of the built-in path"),
        "truncation_levels": Param("floats", [0.25, 0.5, 1.0, 2.0], "levels K for the truncation check"),
    },
    "invariance": {
        "path": Param("str", "", "path CSV; without it a spread_excursion path is generated"),
        "strategy": Param("str", "", "strategy CSV t,phi"),
        "almost_simple": Param("str", "", "almost simple strategy JSON"),
        "first": Param("str", "mid", "first price system: mid, bid, ask or price"),
        "second": Param("str", "bid", "second price system: mid, bid, ask or price"),
        "steps": Param("int", 64, "grid steps of the generated path"),
        "pattern": Param("str", "0" + "+" * 10 + "00" + "+" * 12 + "0", "spread pattern of the generated path"),
        "spread": Param("float", 0.1, "spread level of the generated path"),
    },
    "counterexample": {
        "steps": Param("int", 10_000, "walk steps N"),
        "paths": Param("int", 10_000, "number of paths M"),
        "alphas": Param("floats", [1.0, -1.0], "price weights alpha"),
        "abs_tolerance": Param("float", 0.02, "relative tolerance of the E|B_1| validation"),
        "separation_tolerance": Param("float", 0.05, "relative tolerance of the separation"),
    },
    "upbr": {
        "depth": Param("int", 6, "depth of the binary drift tree"),
        "scales": Param("floats", [1.0, 2.0, 4.0, 8.0, 16.0], "position scales of the strategy family"),
        "thresholds": Param("floats", [0.5, 1.0, 2.0, 4.0], "tail thresholds m"),
        "drift": Param("float", 0.05, "trend per period"),
        "noise": Param("float", 0.0, "martingale noise per period"),
    },
    "approx": {
        "path": Param("str", "", "path CSV; without it a spread_excursion path is generated"),
        "strategy": Param("str", "", "strategy CSV; without it a random increasing ramp is used"),
        "levels": Param("ints", [2, 4, 8, 16, 32], "approximation levels n"),
        "steps": Param("int", 400, "grid steps of the generated path"),
        "pattern": Param("str", "0" + "+" * 198 + "0", "spread pattern of the generated path"),
        "spread": Param("float", 0.2, "spread level of the generated path"),
    },
    "check": {
        "path": Param("str", "", "path CSV; without it a frictionless constant path is used"),
        "strategy": Param("str", "", "strategy CSV t,phi"),
        "steps": Param("int", 10, "grid steps of the built-in path"),
    },
}

SEEDED = {"generate", "dynkin", "cost", "invariance", "counterexample", "approx", "check"}


# ---------------------------------------------------------------------------
# helpers


def canonical_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, allow_nan=False, indent=None)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if x is None or isinstance(x, (int, str)):
        return x
    return str(x)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _load_path(file: str) -> BidAskPath:
    return BidAskPath.from_csv(_read(file))


def _load_strategy(cfg: dict, path: BidAskPath):
    if cfg.get("almost_simple"):
        doc = json.loads(_read(cfg["almost_simple"]))
        return AlmostSimpleStrategy.from_dict(doc, path.times if "n_steps" not in doc else None)
    if cfg.get("strategy"):
        phi, times = StrategyPath.from_csv(_read(cfg["strategy"]))
        if times.size != path.times.size or not np.allclose(times, path.times):
            raise InputError("strategy grid differs from the path grid")
        return phi
    return None


def _price_system(name: str, path: BidAskPath) -> np.ndarray:
    table = {"mid": path.mid, "bid": path.bid, "ask": path.ask}
    if name == "price":
        return path.require_price()
    if name not in table:
        raise InputError(f"unknown price system {name!r}")
    return table[name]


def _game_from_doc(doc: dict):
    tree = ScenarioTree.from_json(json.dumps(doc["tree"]))
    return tree, np.asarray(doc["bid"], float), np.asarray(doc["ask"], float), doc.get("terminal")


def depth1_fixture():
    """Binary one-period game: bid (0.1; 0.2, 0.8), ask (0.4; 0.2, 0.8)."""
    tree = build_tree([2], [[0.5, 0.5]])
    return tree, np.array([0.1, 0.2, 0.8]), np.array([0.4, 0.2, 0.8]), None


# ---------------------------------------------------------------------------
# subcommands (each returns result, checks, artifacts)


@dataclass
class Context:
    seed: int
    tolerance: float
    out: Path | None


def run_generate(cfg: dict, ctx: Context):
    pattern = parse_pattern(cfg["pattern"]) if cfg["pattern"] else ()
    gc = GeneratorConfig(kind=cfg["kind"], steps=cfg["steps"], horizon=cfg["horizon"], seed=ctx.seed,
                         path_index=cfg["path_index"], volatility=cfg["volatility"], hurst=cfg["hurst"],
                         spread=cfg["spread"], pattern=pattern, alpha=cfg["alpha"], start=cfg["start"],
                         depth=cfg["depth"], max_branching=cfg["max_branching"], drift=cfg["drift"])
    out = generate(gc)
    if isinstance(out, GeneratedTree):
        doc = {"tree": json.loads(out.tree.to_json()), "bid": out.bid, "ask": out.ask}
        ordered = bool(np.all(out.bid <= out.ask))
        return ({"tree_nodes": out.tree.n_nodes, "grid_level": out.tree.depth, "game": doc},
                {"ordered": ordered}, {"game.json": canonical_json(doc)})
    rep = validate_model(out)
    st = check_spread_assumption(out)
    result = {"grid_level": out.n_steps, "spread_structure": st.to_dict(), "validation": rep.to_dict()}
    return result, {"ordered": rep.ok}, {"path.csv": out.to_csv()}


def run_dynkin(cfg: dict, ctx: Context):
    if cfg["tree"]:
        tree, bid, ask, terminal = _game_from_doc(json.loads(_read(cfg["tree"])))
    elif cfg["fixture"] == "depth1":
        tree, bid, ask, terminal = depth1_fixture()
    elif cfg["fixture"] == "random":
        g = generate(GeneratorConfig(kind="tree_random", depth=cfg["depth"], max_branching=cfg["max_branching"],
                                     drift=cfg["drift"], seed=ctx.seed))
        tree, bid, ask, terminal = g.tree, g.bid, g.ask, None
    else:
        raise InputError(f"unknown fixture {cfg['fixture']!r}")
    game = dynkin_value(tree, bid, ask, terminal)
    sandwich = sandwich_check(game)
    ds = drift_sign_check(game)
    checks = {"sandwich": not sandwich, "drift_sign": ds.ok}
    oracle = None
    nash = None
    if cfg["brute_force"] and tree.depth <= 4 and count_stopping_times(tree) ** 2 <= cfg["cap"]:
        diffs, gaps = [], []
        for t in range(tree.depth + 1):
            bf = brute_force_game_value(tree, bid, ask, terminal, t, cfg["cap"])
            sl = np.asarray(bf.nodes)
            diffs.append(float(np.max(np.abs(bf.maxmin - game.value[sl]))))
            gaps.append(bf.saddle_gap)
        oracle = max(diffs)
        checks["oracle"] = oracle <= ctx.tolerance and max(gaps) <= ctx.tolerance
        nr = nash_check(game, cfg["cap"])
        nash = {"value": nr.value, "best_tau_deviation": nr.worst_tau_deviation,
                "best_sigma_deviation": nr.worst_sigma_deviation}
        checks["nash"] = nr.holds(ctx.tolerance)
    mv = {"full": mean_variation(tree, game.value)}
    result = {
        "grid_level": tree.depth,
        "value0": game.value0,
        "value_per_node": game.value,
        "drift": game.drift,
        "martingale": game.martingale,
        "tau_star": game.tau_star(0).on_leaves(),
        "sigma_star": game.sigma_star(0).on_leaves(),
        "mv_by_partition": mv,
        "oracle_diff": oracle,
        "nash": nash,
        "sandwich_violations": sandwich,
        "drift_sign_violations": [list(v) for v in ds.violations],
    }
    return result, checks, {}


def _builtin_cost_inputs(cfg: dict, ctx: Context):
    n = cfg["steps"]
    half = cfg["spread"] / 2
    path = BidAskPath.uniform(np.full(n + 1, -half), np.full(n + 1, half), np.zeros(n + 1))
    fam = cfg["family"]
    if fam == "alternating":
        phi = StrategyPath([k % 2 for k in range(n + 1)])
    elif fam == "ramp":
        phi = StrategyPath(np.linspace(0.0, 1.0, n + 1))
    elif fam == "zero":
        phi = StrategyPath(np.zeros(n + 1))
    else:
        raise InputError(f"unknown strategy family {fam!r}")
    return path, phi


def run_cost(cfg: dict, ctx: Context):
    if cfg["path"]:
        path = _load_path(cfg["path"])
        phi = _load_strategy(cfg, path)
        if phi is None:
            raise InputError("cost needs --strategy or --almost-simple together with --path")
    else:
        path, phi = _builtin_cost_inputs(cfg, ctx)
    if path.price is None:
        path = path.with_price(path.mid)
    cp, values = cost_process_of(phi, path)
    checks = {"nondecreasing": cp.is_nondecreasing()}
    extra = {}
    if isinstance(phi, AlmostSimpleStrategy):
        closed = almost_simple_cost(phi, path).values
        diff = float(np.max(np.abs(closed - values)))
        extra["closed_form_diff"] = diff
        checks["closed_form"] = diff <= ctx.tolerance
    else:
        viol = upper_bound_violations(phi, path, cp, tol=ctx.tolerance)
        checks["upper_bound"] = not viol
        checks["truncation_monotone"] = truncation_monotone(phi, path, cfg["truncation_levels"])
        extra["upper_bound_violations"] = viol[:20]
    result = dict(cp.to_dict(path.times), grid_level=path.n_steps, **extra)
    csv_lines = ["t,C,left_jump,right_jump"] + [
        f"{t!r},{c!r},{l!r},{r!r}" for t, c, l, r in
        zip(path.times.tolist(), cp.values.tolist(), cp.left_jumps.tolist(), cp.right_jumps.tolist())]
    return result, checks, {"cost.csv": "\n".join(csv_lines) + "\n"}


def _excursion_path(cfg: dict, ctx: Context) -> BidAskPath:
    gc = GeneratorConfig(kind="spread_excursion", steps=cfg["steps"], seed=ctx.seed, volatility=1.0,
                         spread=cfg["spread"], pattern=parse_pattern(cfg["pattern"]))
    return generate(gc)


def run_invariance(cfg: dict, ctx: Context):
    path = _load_path(cfg["path"]) if cfg["path"] else _excursion_path(cfg, ctx)
    phi = _load_strategy(cfg, path)
    if phi is None:
        rng = np.random.default_rng(ctx.seed)
        vals = np.round(rng.uniform(-2, 2, path.times.size) * 64) / 64
        vals[0] = 0.0
        phi = StrategyPath(vals)
    s1 = _price_system(cfg["first"], path)
    s2 = _price_system(cfg["second"], path)
    rep = invariance_check(phi, path, s1, s2, tol=ctx.tolerance, require_assumption=False)
    checks = {"invariance": rep.ok, "spread_assumption": rep.spread_assumption_ok}
    return dict(rep.to_dict(), grid_level=path.n_steps), checks, {}


def run_counterexample(cfg: dict, ctx: Context):
    rep = local_time_counterexample(cfg["steps"], cfg["paths"], cfg["alphas"], ctx.seed)
    checks = {"abs_B1_validation": rep["abs_B1_rel_error"] <= cfg["abs_tolerance"]}
    if "separation" in rep:
        checks["separation"] = rep["separation_rel_error"] <= cfg["separation_tolerance"]
    return dict(rep, grid_level=cfg["steps"]), checks, {}


def run_upbr(cfg: dict, ctx: Context):
    fam = drift_tree_family(cfg["depth"], cfg["scales"], cfg["thresholds"], drift=cfg["drift"], noise=cfg["noise"])
    table = fam["table"]
    checks = {"nondecreasing_tails": table.nondecreasing_in_family(), "admissible": all(table.admissible)}
    rows = ["scale," + ",".join(repr(m) for m in table.thresholds)]
    for c, row in zip(fam["scales"], table.tails.tolist()):
        rows.append(repr(c) + "," + ",".join(repr(x) for x in row))
    return dict(table.to_dict(), scales=fam["scales"], grid_level=cfg["depth"]), checks, {"tails.csv": "\n".join(rows) + "\n"}


def run_approx(cfg: dict, ctx: Context):
    path = _load_path(cfg["path"]) if cfg["path"] else _excursion_path(cfg, ctx)
    if path.price is None:
        path = path.with_price(path.mid)
    phi = _load_strategy(cfg, path)
    if phi is None:
        rng = np.random.default_rng(ctx.seed)
        inc = rng.uniform(0.0, 2.0 / path.n_steps, path.n_steps)
        phi = StrategyPath(np.concatenate([[0.0], np.cumsum(inc)]))
    res = approximation_experiment(phi, path, cfg["levels"])
    checks = {"holding_error": all(e <= 1.0 / n + ctx.tolerance for e, n in zip(res.sup_holding_errors, res.levels))}
    return dict(res.to_dict(), grid_level=path.n_steps), checks, {}


def run_check(cfg: dict, ctx: Context):
    if cfg["path"]:
        path = _load_path(cfg["path"])
    else:
        n = cfg["steps"]
        path = BidAskPath.uniform(np.ones(n + 1), np.ones(n + 1), np.ones(n + 1))
    rep = validate_model(path)
    checks = {"model_valid": rep.ok}
    result: dict[str, Any] = {"validation": rep.to_dict(), "grid_level": path.n_steps}
    if not rep.ok:
        return result, checks, {}
    st = check_spread_assumption(path)
    result["spread_structure"] = st.to_dict()
    checks["spread_assumption"] = st.assumption_ok
    if path.price is None:
        path = path.with_price(path.mid)
    phi = _load_strategy(cfg, path)
    if phi is None:
        rng = np.random.default_rng(ctx.seed)
        vals = rng.uniform(-1, 1, path.times.size)
        vals[0] = 0.0
        phi = StrategyPath(vals)
    cp, values = cost_process_of(phi, path)
    checks["cost_nondecreasing"] = cp.is_nondecreasing()
    if isinstance(phi, StrategyPath):
        checks["cost_upper_bound"] = not upper_bound_violations(phi, path, cp, tol=ctx.tolerance)
        checks["truncation_monotone"] = truncation_monotone(phi, path, [0.25, 0.5, 1.0, 2.0])
    led = riskless_position(phi, path)
    checks["wealth_identity"] = led.wealth_identity_residual() <= 1e-9
    if st.assumption_ok:
        inv = invariance_check(phi, path, path.bid, path.ask, tol=1e-9)
        checks["invariance"] = inv.ok
        result["invariance"] = inv.to_dict()
    result["terminal_cost"] = float(values[-1])
    result["level_n_star"] = certified_level(path.spread)
    return result, checks, {}


RUNNERS: dict[str, Callable] = {
    "generate": run_generate, "dynkin": run_dynkin, "cost": run_cost, "invariance": run_invariance,
    "counterexample": run_counterexample, "upbr": run_upbr, "approx": run_approx, "check": run_check,
}


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with one table per subcommand, or an earlier report")
    common.add_argument("--seed", type=int, help="64-bit seed for every random draw")
    common.add_argument("--out", help="directory for the report and CSV mirrors")
    common.add_argument("--strict", action="store_true", help="require an explicit seed")
    common.add_argument("--tolerance", type=float, help="tolerance for exact checks (default 1e-12)")
    parser = argparse.ArgumentParser(prog="bidask", description="bid-ask market laboratory")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, params in PARAMS.items():
        p = sub.add_parser(name, parents=[common], help=f"run the {name} experiment")
        for key, param in params.items():
            flag = "--" + key.replace("_", "-")
            if param.kind == "bool":
                p.add_argument(flag, dest=key, default=None, action=argparse.BooleanOptionalAction, help=param.help)
            else:
                p.add_argument(flag, dest=key, default=None, help=f"{param.help} (default {param.default!r})")
    return parser


def _load_config(file: str, command: str) -> tuple[dict, dict]:
    """Parameters for ``command`` and global settings found in the file."""
    text = _read(file)
    if file.endswith(".json"):
        doc = json.loads(text)
        if doc.get("command") != command:
            raise InputError(f"report {file} belongs to command {doc.get('command')!r}")
        cfg = dict(doc["config"])
        glob = {"seed": doc.get("seed")}
        tol = doc.get("tolerance")
        if tol is not None:
            glob["tolerance"] = tol
        return cfg, glob
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"invalid TOML in {file}: {exc}") from None
    glob = {}
    for key, val in doc.items():
        if key in PARAMS:
            continue
        if key in ("seed", "tolerance"):
            glob[key] = val
        else:
            raise InputError(f"unknown top-level key {key!r} in {file}")
    return dict(doc.get(command, {})), glob


def resolve(args: argparse.Namespace) -> tuple[dict, Context]:
    command = args.command
    params = PARAMS[command]
    file_cfg, glob = _load_config(args.config, command) if args.config else ({}, {})
    unknown = sorted(set(file_cfg) - set(params))
    if unknown:
        raise InputError(f"unknown keys for [{command}]: {unknown}")
    cfg = {}
    for key, param in params.items():
        raw = getattr(args, key)
        if raw is None:
            raw = file_cfg.get(key, param.default)
        cfg[key] = _parse_value(param.kind, raw)
    seed = args.seed if args.seed is not None else glob.get("seed")
    if seed is None:
        if args.strict and command in SEEDED:
            raise InputError("--strict requires --seed")
        seed = secrets.randbits(63)
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise InputError("seed must be an unsigned 64-bit integer")
    tol = args.tolerance if args.tolerance is not None else glob.get("tolerance", 1e-12)
    tol = float(tol)
    if not tol > 0:
        raise InputError("tolerance must be positive")
    return cfg, Context(seed, tol, Path(args.out) if args.out else None)


def _emit(report: dict, artifacts: dict, ctx: Context, command: str) -> None:
    text = canonical_json(report)
    if ctx.out is not None:
        ctx.out.mkdir(parents=True, exist_ok=True)
        (ctx.out / f"{command}.json").write_text(text + "\n")
        for name, content in artifacts.items():
            (ctx.out / name).write_text(content)
    print(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    command = args.command
    try:
        cfg, ctx = resolve(args)
        result, checks, artifacts = RUNNERS[command](cfg, ctx)
    except (InputError, ValueError, KeyError, json.JSONDecodeError) as exc:
        err = {"command": command, "error": str(exc), "kind": "bad_input", "version": __version__}
        print(canonical_json(err), file=sys.stderr)
        return EXIT_INPUT
    ok = all(checks.values())
    report = {
        "command": command,
        "version": __version__,
        "config": cfg,
        "seed": ctx.seed,
        "tolerance": ctx.tolerance,
        "grid_level": result.get("grid_level"),
        "checks": checks,
        "ok": ok,
        "result": result,
    }
    _emit(report, artifacts, ctx, command)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
