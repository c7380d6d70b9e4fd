"""Command-line front end.

Usage: ``python3 -m owgame <command> [flags]`` with commands solve, limits,
oscillate, costs, halfgrid and audit. Results go to ``--output`` or, if that
is omitted, to ``$OWGAME_OUTPUT_DIR/<command>.<format>`` when the variable is
set, and to stdout otherwise.

Exit codes: 0 ok, 2 invalid input, 3 numerical failure, 4 audit failed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .asymptotics import (
    cluster_points,
    cost_sweep,
    halfgrid_convergence,
    path_from_vectors,
    rate_diagnostic,
    terminal_W_limit,
    theta_zero_cost_limits,
)
from .continuous import continuous_cost, eval_f, eval_g
from .model import GridSpec, ModelParams, NumericalError, ParameterError
from .serialize import SCHEMA_VERSION, fmt_float, to_csv, to_json
from .solver import assemble_profile, solve_equilibrium
from .verification import full_audit

OUTPUT_DIR_ENV = "OWGAME_OUTPUT_DIR"
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_AUDIT = 0, 2, 3, 4

DEFAULTS = {
    "n": 2, "rho": 1.0, "T": 1.0, "theta": 0.1, "x": None, "N": 50,
    "N_list": [25, 50, 100, 200], "t_list": None, "t_grid": None,
    "method": "auto", "method_check": None, "c": 0.5, "mode": "second",
    "mesh": 101, "trials": 100, "seed": 42, "corrupt": False,
}
# keys that each command echoes back
COMMAND_KEYS = {
    "solve": ["N", "method", "method_check"],
    "limits": ["N_list", "t_list", "method"],
    "oscillate": ["N_list", "t_list", "method"],
    "costs": ["N_list", "c", "method"],
    "halfgrid": ["N_list", "mode", "mesh"],
    "audit": ["N", "trials", "seed", "corrupt"],
}


class CLIError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# argument parsing and config resolution
# ---------------------------------------------------------------------------

def _float_list(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--config", type=Path, help="JSON file of defaults; flags override it")
    g.add_argument("--n", type=int, help="number of traders (>= 2)")
    g.add_argument("--rho", type=float, help="impact decay rate")
    g.add_argument("--T", type=float, help="time horizon")
    g.add_argument("--theta", type=float, help="instantaneous cost parameter")
    g.add_argument("--x", type=_float_list, help="comma-separated initial inventories (default: all ones)")
    o = common.add_argument_group("output")
    o.add_argument("--output", type=Path, help="output file (default: stdout or $%s)" % OUTPUT_DIR_ENV)
    o.add_argument("--format", choices=["csv", "json"], help="output format")

    parser = argparse.ArgumentParser(prog="owgame", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    p = add("solve", "equilibrium trade schedules on a uniform grid")
    p.add_argument("--N", type=int, help="number of grid intervals")
    p.add_argument("--method", choices=["auto", "closed", "dense"])
    p.add_argument("--method-check", dest="method_check", choices=["closed", "dense"],
                   help="second solver; reports the max gap in the metadata")

    for name, help_ in [("limits", "discrete inventories against f and g (theta > 0)"),
                        ("oscillate", "theta = 0 inventories against the cluster points")]:
        p = add(name, help_)
        p.add_argument("--N-list", dest="N_list", type=_int_list)
        p.add_argument("--t-list", dest="t_list", type=_float_list, help="sample times")
        p.add_argument("--t-grid", dest="t_grid", type=int, help="use M+1 equispaced times on [0, T]")
        p.add_argument("--method", choices=["auto", "closed", "dense"])

    p = add("costs", "equilibrium costs split into impact and instantaneous parts")
    p.add_argument("--N-list", dest="N_list", type=_int_list)
    p.add_argument("--c", type=float, help="split point as a fraction of the grid")
    p.add_argument("--method", choices=["auto", "closed", "dense"])

    p = add("halfgrid", "instantaneous costs on one half of the grid only")
    p.add_argument("--N-list", dest="N_list", type=_int_list)
    p.add_argument("--mode", choices=["first", "second"])
    p.add_argument("--mesh", type=int, help="number of interior sample times")

    p = add("audit", "equilibrium certificates as a JSON report")
    p.add_argument("--N", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--corrupt", action="store_true", default=None,
                   help="swap two trades of agent 1 (negative control)")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge built-in defaults, the optional config file and explicit flags."""
    cfg = dict(DEFAULTS)
    cfg["format"] = "json" if args.command == "audit" else "csv"
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CLIError(f"--config: cannot read {args.config}: {exc}")
        if not isinstance(loaded, dict):
            raise CLIError("--config: top level must be an object")
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise CLIError(f"--config: unknown keys {sorted(unknown)}")
        cfg.update(loaded)
    for key, val in vars(args).items():
        if key in ("config", "output", "command") or val is None:
            continue
        cfg[key] = val
    if args.command == "oscillate":
        if cfg["theta"] != 0 and args.theta is not None:
            raise CLIError("--theta: oscillate requires theta = 0")
        cfg["theta"] = 0.0
    if args.command == "limits" and cfg["theta"] == 0:
        raise CLIError("--theta: limits requires theta > 0; use the oscillate command for theta = 0")
    if not isinstance(cfg["n"], int) or isinstance(cfg["n"], bool) or cfg["n"] < 2:
        raise CLIError(f"--n: need an integer >= 2, got {cfg['n']!r}")
    if cfg["x"] is None:
        cfg["x"] = [1.0] * cfg["n"]
    if len(cfg["x"]) != cfg["n"]:
        raise CLIError(f"--x: expected {cfg['n']} inventories (--n), got {len(cfg['x'])}")
    if cfg["t_grid"] is not None:
        if cfg["t_grid"] < 1:
            raise CLIError("--t-grid: must be >= 1")
        cfg["t_list"] = [cfg["T"] * k / cfg["t_grid"] for k in range(cfg["t_grid"] + 1)]
    if cfg["t_list"] is None:
        cfg["t_list"] = [cfg["T"] * s for s in (0.25, 0.5, 0.75)]
    if not cfg["N_list"] or min(cfg["N_list"]) < 1:
        raise CLIError("--N-list: needs at least one positive integer")
    if cfg["trials"] < 1:
        raise CLIError("--trials: must be >= 1")
    if any(not 0 <= t <= cfg["T"] for t in cfg["t_list"]):
        raise CLIError("--t-list: times must lie in [0, T]")
    return cfg


def _params(cfg: dict) -> ModelParams:
    n = cfg["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise CLIError(f"--n: need an integer >= 2, got {n!r}")
    for flag in ("rho", "T"):
        if not (isinstance(cfg[flag], (int, float)) and math.isfinite(cfg[flag]) and cfg[flag] > 0):
            raise CLIError(f"--{flag}: must be a positive number, got {cfg[flag]!r}")
    if not (isinstance(cfg["theta"], (int, float)) and math.isfinite(cfg["theta"]) and cfg["theta"] >= 0):
        raise CLIError(f"--theta: must be >= 0, got {cfg['theta']!r}")
    if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in cfg["x"]):
        raise CLIError("--x: inventories must be finite numbers")
    try:
        return ModelParams(n=cfg["n"], rho=cfg["rho"], T=cfg["T"], theta=cfg["theta"], inventories=cfg["x"])
    except ParameterError as exc:
        raise CLIError(f"--rho/--T: {exc}")


def _grid(N, T) -> GridSpec:
    try:
        return GridSpec.uniform(N, T)
    except ParameterError as exc:
        raise CLIError(f"--N: {exc}")


def echo_config(command: str, cfg: dict) -> dict:
    keys = ["n", "rho", "T", "theta", "x"] + COMMAND_KEYS[command]
    out = {k: cfg[k] for k in keys}
    out["command"] = command
    return out


# ---------------------------------------------------------------------------
# commands; each returns (columns, rows, metadata)
# ---------------------------------------------------------------------------

def cmd_solve(cfg: dict):
    p = _params(cfg)
    grid = _grid(cfg["N"], p.T)
    vec = solve_equilibrium(p, grid, cfg["method"])
    prof = assemble_profile(p, vec)
    meta = {"method": vec.method, "sum_nu": vec.sum_nu, "sum_omega": vec.sum_omega}
    if cfg["method_check"]:
        other = solve_equilibrium(p, grid, cfg["method_check"])
        meta["max_gap"] = float(max(np.abs(vec.nu - other.nu).max(), np.abs(vec.omega - other.omega).max()))
        meta["method_check"] = other.method
    cols = ["k", "t_k", "v_k", "w_k"] + [f"xi_{i + 1}_k" for i in range(p.n)]
    v, w = vec.v, vec.w
    rows = [[k, grid.times[k], v[k], w[k], *prof.xi[:, k]] for k in range(grid.N + 1)]
    return cols, rows, meta


def cmd_limits(cfg: dict):
    p = _params(cfg)
    t = np.array(sorted(cfg["t_list"]))
    f, g = eval_f(t, p), eval_g(t, p)
    Ns = sorted(set(cfg["N_list"]))
    rows = []
    for N in Ns:
        grid = _grid(N, p.T)
        path = path_from_vectors(p, grid, solve_equilibrium(p, grid, cfg["method"]), t)
        for j in range(t.size):
            eV, eW = abs(path.V[j] - g[j]), abs(path.W[j] - f[j])
            rows.append([N, t[j], int(path.n_t[j]), path.V[j], path.W[j], g[j], f[j], N * eV, N * eW])
    verdicts = {}
    if len(Ns) >= 2:
        for tt in t:
            if 0 < tt < p.T:
                for target in ("g", "f"):
                    d = rate_diagnostic(p, float(tt), Ns, target, cfg["method"] if cfg["method"] != "auto" else "closed")
                    verdicts[f"{target}@t={fmt_float(tt)}"] = d.verdict
    meta = {"W_T_limit": terminal_W_limit(p), "rate_verdicts": verdicts}
    cols = ["N", "t", "n_t", "V", "W", "g", "f", "N_err_V", "N_err_W"]
    return cols, rows, meta


def cmd_oscillate(cfg: dict):
    p = _params(cfg)
    t = np.array(sorted(cfg["t_list"]))
    cps = [cluster_points(p, float(tt)) for tt in t]
    rows = []
    for N in sorted(set(cfg["N_list"])):
        grid = _grid(N, p.T)
        path = path_from_vectors(p, grid, solve_equilibrium(p, grid, cfg["method"]), t)
        for j, cp in enumerate(cps):
            nt = int(path.n_t[j])
            V, W = float(path.V[j]), float(path.W[j])
            if nt == 0:
                vres = wres = 0.0
            else:
                vres = min(abs(V - c) for c in cp.V_points(N))
                wres = min(abs(W - c) for c in cp.W_points(N))
            label = f"{'even' if N % 2 == 0 else 'odd'}N-{'even' if nt % 2 == 0 else 'odd'}nt"
            rows.append([N, t[j], nt, label, V, W, cp.beta_plus, cp.beta_minus, cp.gamma_plus, cp.gamma_minus,
                         cp.phi_plus, cp.phi_minus, cp.psi_plus, cp.psi_minus, vres, wres])
    cols = ["N", "t", "n_t", "class", "V", "W", "beta_plus", "beta_minus", "gamma_plus", "gamma_minus",
            "phi_plus", "phi_minus", "psi_plus", "psi_minus", "V_residual", "W_residual"]
    return cols, rows, {}


def cmd_costs(cfg: dict):
    p = _params(cfg)
    try:
        sweep = cost_sweep(p, cfg["N_list"], cfg["c"], cfg["method"])
    except ParameterError as exc:
        raise CLIError(f"--c: {exc}")
    rows = []
    for r in sweep:
        if p.theta > 0:
            cc = continuous_cost(r.agent, p)
            tgt = [cc.total, cc.impact, cc.B0, cc.BT]
        else:
            lim = theta_zero_cost_limits(p, r.agent)
            tgt = [lim.even_limit if r.N % 2 == 0 else lim.odd_limit, math.nan, math.nan, math.nan]
        rows.append([r.N, r.agent + 1, r.total, r.impact, r.inst_front, r.inst_back, *tgt])
    cols = ["N", "agent", "total", "impact", "inst_front", "inst_back",
            "target_total", "target_impact", "target_B0", "target_BT"]
    meta = {"targets": "continuous-time costs" if p.theta > 0 else "even/odd theta=0 limits by N parity"}
    return cols, rows, meta


def cmd_halfgrid(cfg: dict):
    p = _params(cfg)
    if p.theta <= 0:
        raise CLIError("--theta: halfgrid requires theta > 0")
    if min(cfg["N_list"]) < 2:
        raise CLIError("--N-list: halfgrid requires N >= 2")
    res = halfgrid_convergence(p, cfg["N_list"], cfg["mode"], cfg["mesh"])
    rows = [[r.N, r.sup_X_error, r.sup_V_first_half, r.sup_V_second_half,
             r.sup_W_first_half, r.sup_W_second_half] for r in res]
    errs = [r.sup_X_error for r in res]
    meta = {"sup_X_strictly_decreasing": bool(all(b < a for a, b in zip(errs, errs[1:])))}
    cols = ["N", "sup_X_error", "sup_V_first_half", "sup_V_second_half", "sup_W_first_half", "sup_W_second_half"]
    return cols, rows, meta


COMMANDS = {
    "solve": cmd_solve, "limits": cmd_limits, "oscillate": cmd_oscillate,
    "costs": cmd_costs, "halfgrid": cmd_halfgrid,
}


def render(command: str, cfg: dict) -> tuple[str, int]:
    """Run ``command`` and return (file text, exit code)."""
    config = echo_config(command, cfg)
    if command == "audit":
        p = _params(cfg)
        rep = full_audit(p, _grid(cfg["N"], p.T), cfg["trials"], cfg["seed"], cfg["corrupt"])
        code = EXIT_OK if rep.passed else EXIT_AUDIT
        d = rep.to_dict()
        if cfg["format"] == "csv":
            items = sorted((k, v) for k, v in d.items() if k != "multipliers")
            items += [(f"multiplier_{i + 1}", m) for i, m in enumerate(d["multipliers"])]
            meta = {"schema_version": SCHEMA_VERSION, "config": config}
            return to_csv(["key", "value"], [[k, "" if v is None else v] for k, v in items], meta), code
        doc = {"schema_version": SCHEMA_VERSION, "command": command, "config": config, "metadata": {}, "report": d}
        return to_json(doc) + "\n", code
    cols, rows, meta = COMMANDS[command](cfg)
    if cfg["format"] == "csv":
        return to_csv(cols, rows, {"schema_version": SCHEMA_VERSION, "config": config, **meta}), EXIT_OK
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "config": config, "metadata": meta,
           "columns": cols, "rows": rows}
    return to_json(doc) + "\n", EXIT_OK


def _destination(args, cfg) -> Path | None:
    if args.output is not None:
        return args.output
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base:
        return Path(base) / f"{args.command}.{cfg['format']}"
    return None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        text, code = render(args.command, cfg)
    except CLIError as exc:
        print(f"owgame {args.command}: error: {exc}", file=sys.stderr)
        return exc.code
    except ParameterError as exc:
        print(f"owgame {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, OverflowError, FloatingPointError) as exc:
        print(f"owgame {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    dest = _destination(args, cfg)
    if dest is None:
        sys.stdout.write(text)
    else:
        dest.parent.mkdir(parents=True, exist_ok=True)
        with open(dest, "w", newline="") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
