"""Command line entry point: ``driftevo run|verify|sweep``.

Exit codes: 0 success, 1 a verified property was violated, 2 bad config.
"""
from __future__ import annotations

import argparse
import csv
import sys

from ..engine import ConfigurationError
from . import config as C
from .experiments import aggregate, run_trials, write_csv, write_json
from .verify import DEFAULT_GRID, verify_grid

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2


def _common(p):
    p.add_argument("--config", metavar="PATH", help="JSON config file")
    p.add_argument("--seed", type=int, metavar="U64", help="master seed")
    p.add_argument("--out", metavar="PATH", help="output CSV path (summary goes next to it as .json)")
    p.add_argument("--threads", type=int, metavar="N", help="worker processes for trials")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (JSON value); repeatable")


def build_parser():
    parser = argparse.ArgumentParser(prog="driftevo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run", "run seeded trials and write a per-generation CSV"),
        ("verify", "sweep the per-step benefit guarantee"),
        ("sweep", "success rate over a grid of Delta multipliers or epsilons"),
    ):
        _common(sub.add_parser(name, help=text))
    return parser


def _config_from_args(args):
    overrides = dict(C.parse_override(s) for s in args.set)
    overrides.update(seed=args.seed, out=args.out, threads=args.threads)
    return C.load_config(args.config, overrides)


def cmd_run(cfg, out=None):
    out = out or sys.stdout
    cfg = C.resolve(cfg)
    results = run_trials(cfg, cfg["threads"])
    summary = aggregate(cfg, results)
    path = C.output_path(cfg, "run")
    write_csv(path, cfg, results)
    write_json(C.summary_path(path), summary)
    print(
        f"{cfg['family']} n={cfg['n']} eps={cfg['epsilon']} trials={cfg['trials']} "
        f"horizon={cfg['horizon_resolved']} success_rate={summary['success_rate']:.3f} "
        f"-> {path}",
        file=out,
    )
    return summary, EXIT_OK


def cmd_verify(cfg, out=None):
    out = out or sys.stdout
    spec = cfg.get("verify") or {fam: {} for fam in DEFAULT_GRID}
    if not isinstance(spec, dict):
        raise ConfigurationError("verify must map family names to grid settings")
    unknown = sorted(set(spec) - set(DEFAULT_GRID))
    if unknown:
        raise ConfigurationError(f"no benefit sweep for {unknown}; choose from {sorted(DEFAULT_GRID)}")
    results = verify_grid(spec, cfg["seed"])
    rows = [r.as_dict() for r in results]
    path = C.output_path(cfg, "verify")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    total = sum(r.violations for r in results)
    write_json(C.summary_path(path), {"seed": cfg["seed"], "cells": rows, "violations": total})
    for r in results:
        status = "ok" if r.ok else "VIOLATION"
        print(
            f"{status:9s} {r.family:25s} n={r.n:<3d} eps={r.epsilon:<5g} "
            f"considered={r.considered:<5d} violations={r.violations} "
            f"(below 1-eps: {r.violations_below_eps}) min_gain={r.min_gain:.4g} bound={r.bound:.4g}",
            file=out,
        )
    return rows, EXIT_VIOLATION if total else EXIT_OK


def cmd_sweep(cfg, out=None):
    out = out or sys.stdout
    spec = cfg.get("sweep") or {}
    axis = spec.get("axis")
    values = spec.get("values") or []
    if axis is not None and axis not in ("delta_scale", "delta", "epsilon"):
        raise ConfigurationError("sweep axis must be delta_scale, delta or epsilon")
    cells = [(axis, v) for v in values] if axis and values else [(None, None)]
    base = {k: v for k, v in cfg.items() if k != "sweep"}
    rows = []
    for ax, value in cells:
        cell_cfg = dict(base)
        if ax is not None:
            cell_cfg[ax] = value
        cell_cfg = C.resolve(cell_cfg)
        summary = aggregate(cell_cfg, run_trials(cell_cfg, cell_cfg["threads"]))
        rows.append({
            "axis": ax or "",
            "value": "" if value is None else value,
            "epsilon": cell_cfg["epsilon"],
            "n": cell_cfg["n"],
            "delta": cell_cfg["delta_resolved"],
            "theorem_delta": cell_cfg["theorem_delta"],
            "g": cell_cfg["g"],
            "horizon": cell_cfg["horizon_resolved"],
            "trials": cell_cfg["trials"],
            "success_rate": summary["success_rate"],
            "final_success_rate": summary["final_success_rate"],
        })
        print(f"{ax or '-'}={value if value is not None else '-'} "
              f"success_rate={summary['success_rate']:.3f}", file=out)
    path = C.output_path(cfg, "sweep")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    write_json(C.summary_path(path), {"template": base, "cells": rows})
    return rows, EXIT_OK


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        _, code = COMMANDS[args.command](cfg)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
