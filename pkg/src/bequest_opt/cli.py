"""Command-line front end.

Subcommands: ``solve`` (regime, thresholds, free parameters), ``eval``
(value/controls at wealth points), ``table`` (the two reference strategy
tables, optionally diffed against the published cells), ``verify`` (the full
oracle battery with pass/fail exit code), and ``sweep`` (CSV/JSON rows over a
consumption or premium grid).

Output is a pure function of flags and seed: text, CSV (header always
emitted, shortest round-trip numbers), or a single JSON object with
``schema_version`` 1.  Exit codes: 0 success, 1 verification failure,
2 usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from typing import Optional

from .model import MarketParams, ValidationError, DomainError
from .solver import Solution, solve
from . import analysis
from . import verify as verify_mod

SCHEMA_VERSION = 1

PARAM_FLAGS = ("r", "mu", "sigma", "lambda", "h", "b", "c")
_DEFAULTS = {"r": 0.03, "mu": 0.06, "sigma": 0.20, "lambda": 0.04,
             "h": 0.05, "b": 1.0, "c": 0.02}


class CliError(Exception):
    """Usage or validation problem; maps to exit code 2."""


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc}") from exc
    return values


def _build_params(args: argparse.Namespace) -> MarketParams:
    raw = dict(_DEFAULTS)
    if args.config:
        cfg = _read_config_file(args.config)
        for key, value in cfg.items():
            if key in PARAM_FLAGS:
                try:
                    raw[key] = float(value)
                except ValueError as exc:
                    raise CliError(f"config value for {key} is not a number: {value!r}") from exc
    for key in PARAM_FLAGS:
        flag_val = getattr(args, "lam" if key == "lambda" else key, None)
        if flag_val is not None:
            raw[key] = flag_val
    try:
        return MarketParams(
            r=raw["r"], mu=raw["mu"], sigma=raw["sigma"], lam=raw["lambda"],
            h=raw["h"], b=raw["b"], c=raw["c"],
        )
    except ValidationError as exc:
        raise CliError(str(exc)) from exc


def _params_dict(p: MarketParams) -> dict:
    return {"r": p.r, "mu": p.mu, "sigma": p.sigma, "lambda": p.lam,
            "h": p.h, "b": p.b, "c": p.c}


def _emit(args: argparse.Namespace, payload: dict, text: str, csv_rows=None) -> None:
    fmt = args.format
    if fmt == "json":
        body = json.dumps({"schema_version": SCHEMA_VERSION, **payload},
                          sort_keys=True, separators=(",", ":"), allow_nan=True)
        out = body + "\n"
    elif fmt == "csv":
        if csv_rows is None:
            raise CliError(f"command {payload.get('command')} has no CSV form")
        header, rows = csv_rows
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_csv_field(v) for v in row))
        out = "\n".join(lines) + "\n"
    else:
        out = text if text.endswith("\n") else text + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _csv_field(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _solution_dict(sol: Solution) -> dict:
    d = sol.derived
    out = {
        "regime": sol.regime.value,
        "w_b": sol.w_b,
        "w_s": sol.w_s,
        "c1": d.c1,
        "c2": d.c2,
        "h_cut": d.h_cut,
        "constants": {"m": d.m, "q": d.q, "p": d.p, "p0": d.p0,
                      "alpha1": d.alpha1, "alpha2": d.alpha2,
                      "beta1": d.beta1, "beta2": d.beta2},
        "duals": {"y_0": sol.y_0, "y_b": sol.y_b, "y_g": sol.y_g,
                  "y_b0": sol.y_b0, "y_g0": sol.y_g0, "y_bg": sol.y_bg},
    }
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_solve(args: argparse.Namespace) -> int:
    params = _build_params(args)
    sol = solve(params)
    info = _solution_dict(sol)
    lines = [f"regime      {info['regime']}"]
    for key in ("w_b", "w_s", "c1", "c2"):
        val = info[key]
        lines.append(f"{key:<11} {val if val is not None else 'n/a'}")
    duals = {k: v for k, v in info["duals"].items() if v is not None}
    if duals:
        lines.append("duals       " + " ".join(f"{k}={v}" for k, v in sorted(duals.items())))
    payload = {"command": "solve", "params": _params_dict(params), "solution": info}
    header = ["regime", "w_b", "w_s", "c1", "c2"]
    row = [info["regime"], info["w_b"], info["w_s"], info["c1"],
           info["c2"] if info["c2"] is not None else ""]
    _emit(args, payload, "\n".join(lines), (header, [row]))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    params = _build_params(args)
    sol = solve(params)
    rows = []
    any_ok = False
    for w in args.w:
        try:
            ev = sol.eval(w)
            rows.append({"w": w, "phi": ev.phi, "phi_w": ev.phi_w,
                         "phi_ww": ev.phi_ww, "pi": ev.pi_star, "d": ev.d_star,
                         "y": ev.y, "error": None})
            any_ok = True
        except DomainError as exc:
            rows.append({"w": w, "phi": None, "phi_w": None, "phi_ww": None,
                         "pi": None, "d": None, "y": None, "error": str(exc)})
    text_lines = []
    for row in rows:
        if row["error"]:
            text_lines.append(f"w={row['w']}: error: {row['error']}")
        else:
            text_lines.append(
                f"w={row['w']}: phi={row['phi']:.12g} pi={row['pi']:.12g} "
                f"D={row['d']:.12g} y={row['y']:.12g}"
            )
    header = ["w", "phi", "pi", "d", "y", "error"]
    csv = [[r["w"], r["phi"], r["pi"], r["d"], r["y"], r["error"] or ""] for r in rows]
    payload = {"command": "eval", "params": _params_dict(params), "rows": rows}
    _emit(args, payload, "\n".join(text_lines), (header, csv))
    return 0 if any_ok else 2


def cmd_table(args: argparse.Namespace) -> int:
    table_c, table_h = analysis.reproduce_tables(fd_row=not args.no_fd_row,
                                                 n_grid=args.fd_grid)
    ndigits = args.round
    text = table_c.to_text(ndigits) + "\n\n" + table_h.to_text(ndigits)
    diffs = analysis.table_diff(table_c, table_h) if args.diff else []
    if args.diff:
        text += "\n\ncell deviations from the published tables (largest first):\n"
        for label, col, mine, ref, dv in diffs[:12]:
            text += f"  {label:<10} {col:<8} computed={mine:.4f} printed={ref:.4f} |diff|={dv:.4f}\n"
        text += f"max |deviation| = {diffs[0][4]:.6f}"
    payload = {
        "command": "table",
        "consumption_table": {"labels": table_c.row_labels, "cells": table_c.cells},
        "premium_table": {"labels": table_h.row_labels, "cells": table_h.cells},
    }
    if args.diff:
        payload["max_deviation"] = diffs[0][4]
    header = ["table", "label", "w_b", "w_s"] + [f"pi_{w:g}" for w in table_c.probes]
    csv = []
    for name, tb in (("consumption", table_c), ("premium", table_h)):
        for label, cells in zip(tb.row_labels, tb.cells):
            csv.append([name, label] + list(cells))
    _emit(args, payload, text, (header, csv))
    return 0


def _perturb_solution(sol: Solution, eps: float) -> Solution:
    """Knock y_b (and everything pinned to it) off by a relative eps, so the
    smooth-pasting oracle has a real fault to catch."""
    if sol.y_b is None:
        raise CliError(f"regime {sol.regime.value} has no y_b to perturb")
    y_b = sol.y_b * (1.0 + eps)
    fields = {"y_b": y_b}
    if sol.y_b0 is not None:
        fields["y_0"] = y_b / sol.y_b0
    if sol.y_bg is not None:
        fields["y_g"] = y_b / sol.y_bg
    if sol.regime.value == "ZeroConsumption":
        fields["w_b"] = sol.w_b * (1.0 + eps)
    return replace(sol, **fields)


def cmd_verify(args: argparse.Namespace) -> int:
    params = _build_params(args)
    sol = solve(params)
    if args.perturb_yb:
        sol = _perturb_solution(sol, args.perturb_yb)
    report = verify_mod.run_verification(
        sol, seed=args.seed, n_paths=args.mc_paths, dt=args.mc_dt,
        fd_grid=args.fd_grid,
    )
    failures = report.failures()
    worst_gap = max((g.max_gap for g in report.pasting_gaps), default=0.0)
    lines = [
        f"hjb residual sup   {report.residual_sup:.3e}  (tol 1e-8)",
        f"smooth pasting max {worst_gap:.3e}  (tol 1e-8)",
        f"fd oracle sup err  {report.fd_sup_error:.3e}  (tol 1e-3)",
        f"mc estimate        {report.mc_estimate:.6f} +- {report.mc_stderr:.6f}"
        f"  z={report.mc_z:+.2f}  (|z| <= 3)",
        ("PASS" if not failures else "FAIL: " + "; ".join(failures)),
    ]
    payload = {
        "command": "verify", "params": _params_dict(params),
        "residual_sup": report.residual_sup,
        "pasting_max_gap": worst_gap,
        "fd_sup_error": report.fd_sup_error,
        "mc": {"estimate": report.mc_estimate, "stderr": report.mc_stderr,
               "z": report.mc_z},
        "failures": failures,
    }
    _emit(args, payload, "\n".join(lines))
    return 0 if not failures else 1


def _parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise CliError(f"grid must be lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise CliError(f"grid must be lo:hi:n with numeric fields, got {text!r}") from exc
    if n < 1 or not hi > lo:
        raise CliError(f"grid needs hi > lo and n >= 1, got {text!r}")
    if n == 1:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def cmd_sweep(args: argparse.Namespace) -> int:
    params = _build_params(args)
    grid = _parse_grid(args.grid)
    if args.axis == "c":
        result = analysis.sweep_consumption(params, grid)
    else:
        result = analysis.sweep_premium(params, grid)
    header = [args.axis, "regime", "w_b", "w_s"] \
        + [f"phi_{w:g}" for w in result.probes] + [f"pi_{w:g}" for w in result.probes] \
        + ["error"]
    csv = []
    text_lines = ["  ".join(header)]
    for row in result.rows:
        fields = [row.value, row.regime or "", row.w_b, row.w_s] \
            + list(row.phi) + list(row.pi) + [row.error or ""]
        csv.append(fields)
        text_lines.append("  ".join(_csv_field(f) for f in fields))
    payload = {
        "command": "sweep", "axis": args.axis, "params": _params_dict(params),
        "probes": result.probes,
        "rows": [
            {"value": r.value, "regime": r.regime, "w_b": r.w_b, "w_s": r.w_s,
             "phi": r.phi, "pi": r.pi, "error": r.error}
            for r in result.rows
        ],
    }
    _emit(args, payload, "\n".join(text_lines), (header, csv))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_param_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--r", type=float, help="riskless rate per year")
    sp.add_argument("--mu", type=float, help="risky drift per year")
    sp.add_argument("--sigma", type=float, help="risky volatility per sqrt(year)")
    sp.add_argument("--lambda", dest="lam", type=float, help="mortality hazard rate per year")
    sp.add_argument("--h", type=float, help="insurance premium rate per dollar of benefit")
    sp.add_argument("--b", type=float, help="bequest goal in dollars")
    sp.add_argument("--c", type=float, help="consumption rate in dollars per year")
    sp.add_argument("--config", help="key = value file with any of the parameter flags")
    sp.add_argument("--format", choices=("text", "csv", "json"), default="text")
    sp.add_argument("--out", help="write output to this path instead of stdout")
    sp.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bequest-opt",
        description="Maximum probability of reaching a bequest goal with "
                    "term life insurance: solver, tables, and oracles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="regime, thresholds, and free parameters")
    _add_param_flags(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("eval", help="value and controls at wealth points")
    _add_param_flags(sp)
    sp.add_argument("--w", type=float, action="append", required=True,
                    help="wealth point (repeatable)")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("table", help="reproduce both reference strategy tables")
    _add_param_flags(sp)
    sp.add_argument("--diff", action="store_true",
                    help="also report deviations from the published cells")
    sp.add_argument("--round", type=int, default=3)
    sp.add_argument("--no-fd-row", action="store_true",
                    help="skip the no-insurance oracle row of the premium table")
    sp.add_argument("--fd-grid", type=int, default=2000)
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("verify", help="run the oracle battery; exit 1 on failure")
    _add_param_flags(sp)
    sp.add_argument("--mc-paths", type=int, default=100_000)
    sp.add_argument("--mc-dt", type=float, default=1.0 / 2500.0)
    sp.add_argument("--fd-grid", type=int, default=2000)
    sp.add_argument("--perturb-yb", type=float, default=0.0,
                    help="inject a relative fault into y_b (for fault testing)")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sweep", help="solve across a consumption or premium grid")
    _add_param_flags(sp)
    sp.add_argument("--axis", choices=("c", "h"), required=True)
    sp.add_argument("--grid", required=True, help="lo:hi:n")
    sp.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    threads = os.environ.get("BEQUEST_OPT_THREADS")
    if threads:
        try:
            import numba

            numba.set_num_threads(max(1, int(threads)))
        except (ValueError, ImportError):
            pass
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
