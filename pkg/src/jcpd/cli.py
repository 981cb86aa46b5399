"""Command-line entry point: ``jcpd validate | run | compare``.

Exit codes: 0 ok, 1 config error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import config as cfgmod
from . import reports
from .metrics import compute_metrics
from .scenario import build_scenario
from .scheduler import run

OUTPUT_ROOT_ENV = "JCPD_OUTPUT_ROOT"
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("jcpd")


def _say(line: str = "") -> None:
    # one write per line keeps output from parallel cells readable
    sys.stdout.write(line + "\n")
    sys.stdout.flush()


def _load(path, sets, algorithm=None) -> dict:
    cfg = cfgmod.load_config(path)
    sets = list(sets or ())
    if algorithm:
        sets.append(f"algorithm={algorithm}")
    cfg = cfgmod.apply_overrides(cfg, sets)
    return cfgmod.check_config(cfg)


def output_root(cfg: dict) -> Path:
    env = os.environ.get(OUTPUT_ROOT_ENV)
    return Path(env) if env else Path(cfg.get("output", {}).get("directory", "out"))


def _table(rows, header) -> str:
    cells = [[str(c) for c in header]] + [[reports.fmt_value(c) if not isinstance(c, str) else c for c in r]
                                          for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


# ---- validate ------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        cfg = cfgmod.load_config(args.config)
        cfg = cfgmod.apply_overrides(cfg, args.set)
    except cfgmod.ConfigError as exc:
        for e in exc.errors:
            _say(f"error: {e}")
        return EXIT_CONFIG
    errors = cfgmod.validate_config(cfg)
    if errors:
        for e in errors:
            _say(f"error: {e}")
        _say(f"{args.config}: {len(errors)} problem(s)")
        return EXIT_CONFIG
    _say(f"{args.config}: valid (scenario {cfgmod.scenario_hash(cfg)})")
    return EXIT_OK


# ---- run -----------------------------------------------------------------

def run_config(cfg: dict, outdir) -> tuple:
    """Build, schedule, measure and write one scenario; returns (scenario, report, paths)."""
    scenario = build_scenario(cfg)
    plan = run(scenario)
    report = compute_metrics(plan, scenario)
    paths = reports.write_run(outdir, scenario, plan, report)
    return scenario, report, paths


def cmd_run(args) -> int:
    try:
        cfg = _load(args.config, args.set, args.algorithm)
    except cfgmod.ConfigError as exc:
        for e in exc.errors:
            _say(f"error: {e}")
        return EXIT_CONFIG
    outdir = Path(args.output) if args.output else output_root(cfg) / cfgmod.scenario_hash(cfg)
    try:
        scenario, report, paths = run_config(cfg, outdir)
    except cfgmod.ConfigError as exc:
        for e in exc.errors:
            _say(f"error: {e}")
        return EXIT_CONFIG
    except Exception as exc:  # scheduling or output failure
        _say(f"error: {type(exc).__name__}: {exc}")
        return EXIT_RUNTIME
    _say(f"scenario {scenario.scenario_hash}  algorithm={scenario.algorithm}  group={scenario.group}  "
         f"users={len(scenario.demand)}  states={scenario.n_states}  runtime={report.runtime_s:.1f}s")
    _say(_table(report.as_rows(), ("metric", "value")))
    _say(f"wrote {outdir}")
    return EXIT_OK


# ---- compare -------------------------------------------------------------

def parse_sweep(spec: str) -> dict:
    """``configs=jcpd-group1,fcp;users=48,72`` -> {"configs": [...], "users": [...]}.

    Axes left out keep the base config's value.
    """
    axes = {}
    for part in (spec or "").split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise cfgmod.ConfigError(f"sweep axis {part!r} is not of the form name=v1,v2")
        name, values = part.split("=", 1)
        name = name.strip()
        vals = [v.strip() for v in values.split(",") if v.strip()]
        if name not in ("configs", "users", "seeds"):
            raise cfgmod.ConfigError(f"unknown sweep axis {name!r} (configs, users, seeds)")
        if not vals:
            raise cfgmod.ConfigError("empty sweep")
        if name in ("users", "seeds"):
            try:
                vals = [int(v) for v in vals]
            except ValueError:
                raise cfgmod.ConfigError(f"sweep axis {name!r} needs integers") from None
        axes[name] = vals
    if not axes:
        raise cfgmod.ConfigError("empty sweep")
    return axes


def config_overrides(label: str) -> list[str]:
    """``fcp`` or ``jcpd-<preset>`` as --set style overrides."""
    if label == "fcp":
        return ["algorithm=fcp"]
    if label.startswith("jcpd-"):
        return ["algorithm=jcpd", f"params={json.dumps(label[5:])}"]
    if label == "jcpd":
        return ["algorithm=jcpd"]
    raise cfgmod.ConfigError(f"unknown sweep config {label!r} (use fcp or jcpd-<preset>)")


def sweep_cells(base: dict, axes: dict) -> list[tuple[str, dict]]:
    configs = axes.get("configs") or [None]
    users = axes.get("users") or [None]
    seeds = axes.get("seeds") or [None]
    cells = []
    for c in configs:
        for u in users:
            for s in seeds:
                sets, parts = [], []
                if c is not None:
                    sets += config_overrides(c)
                    parts.append(c)
                if u is not None:
                    sets.append(f"users.count={u}")
                    if base["users"].get("per_user_links") is not None:
                        sets.append("users.per_user_links=null")
                    parts.append(f"u{u}")
                if s is not None:
                    sets.append(f"seed={s}")
                    parts.append(f"s{s}")
                cfg = cfgmod.check_config(cfgmod.apply_overrides(base, sets))
                cells.append(("-".join(parts) or "base", cfg))
    return cells


def _run_cell(label: str, cfg: dict, outdir: str):
    try:
        scenario, report, _paths = run_config(cfg, Path(outdir) / label)
        rows = list(reports.metric_rows(report, scenario.scenario_hash, scenario.group, len(scenario.demand)))
        return label, rows, None, report.runtime_s
    except Exception as exc:
        return label, None, f"{type(exc).__name__}: {exc}", 0.0


def cmd_compare(args) -> int:
    try:
        base = _load(args.config, args.set)
        axes = parse_sweep(args.sweep)
        cells = sweep_cells(base, axes)
    except cfgmod.ConfigError as exc:
        for e in exc.errors:
            _say(f"error: {e}")
        return EXIT_CONFIG
    sweep_id = hashlib.sha256((cfgmod.canonical(base) + "|" + json.dumps(axes, sort_keys=True))
                              .encode()).hexdigest()[:16]
    outdir = Path(args.output) if args.output else output_root(base) / f"compare-{sweep_id}"
    try:
        reports.claim_directory(outdir, sweep_id)
    except reports.MixedScenarioError as exc:
        _say(f"error: {exc}")
        return EXIT_RUNTIME
    manifest = {"scenario_hash": sweep_id, "sweep": axes, "cells": [c[0] for c in cells],
                "base_config": json.loads(cfgmod.canonical(base))}
    (outdir / reports.MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    _say(f"compare {sweep_id}: {len(cells)} cells -> {outdir}")

    jobs = args.jobs or min(len(cells), os.cpu_count() or 1)
    results = {}
    if jobs <= 1:
        for label, cfg in cells:
            results[label] = _run_cell(label, cfg, str(outdir))
            _report_cell(results[label])
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = [pool.submit(_run_cell, label, cfg, str(outdir)) for label, cfg in cells]
            for f in futs:
                res = f.result()
                results[res[0]] = res
                _report_cell(res)

    # rows follow the sweep order, not completion order
    rows, failed = [], []
    for label, _cfg in cells:
        _l, cell_rows, err, _t = results[label]
        if err:
            failed.append((label, err))
        else:
            rows.extend(cell_rows)
    (outdir / "compare.csv").write_text(reports.csv_text(reports.METRIC_HEADER, rows, sweep_id))
    manifest["failed"] = [f[0] for f in failed]
    (outdir / reports.MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    _say(_compare_table(cells, results))
    for label, err in failed:
        _say(f"cell {label} failed: {err}")
    return EXIT_RUNTIME if failed else EXIT_OK


def _report_cell(res) -> None:
    label, _rows, err, runtime = res
    _say(f"  {label}: failed ({err})" if err else f"  {label}: done in {runtime:.1f}s")


def _compare_table(cells, results) -> str:
    ok = [c[0] for c in cells if not results[c[0]][2]]
    if not ok:
        return "(no successful cells)"
    metrics = [r[3] for r in results[ok[0]][1]]
    by_cell = {label: {r[3]: r[4] for r in results[label][1]} for label in ok}
    rows = [[m] + [by_cell[label].get(m) for label in ok] for m in metrics]
    return _table(rows, ["metric"] + ok)


# ---- entry ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jcpd", description="Joint GNSS / libration-point contact plan design")
    p.add_argument("-v", "--verbose", action="store_true", help="log scheduler progress")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a config file")
    v.add_argument("config")
    v.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("run", help="schedule one scenario and write its reports")
    r.add_argument("config")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="dotted-path override, value parsed as JSON when possible")
    r.add_argument("--algorithm", choices=("jcpd", "fcp"))
    r.add_argument("-o", "--output", help=f"output directory (default: ${OUTPUT_ROOT_ENV} or output.directory)")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="sweep algorithms / parameter groups / user counts")
    c.add_argument("config")
    c.add_argument("--sweep", required=True, help='e.g. "configs=jcpd-group1,fcp;users=48,72"')
    c.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    c.add_argument("-j", "--jobs", type=int, default=0, help="worker processes (default: one per core)")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); output files are already written
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
