"""Report files: contact plan, anchors, metrics, manifest.

Everything except ``timing.json`` is a deterministic function of the config,
so two runs of the same scenario produce byte-identical files. Each file
carries the scenario hash, and a directory that already holds another
scenario's output is refused.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from . import __version__
from .config import canonical
from .visibility import LinkType

PLAN_HEADER = ("slot_kind", "slot_index", "node_a", "node_b", "link_type", "weight")
ANCHOR_HEADER = ("state", "node")
METRIC_HEADER = ("scenario_id", "group", "users", "metric", "value")

PLAN_FILE = "plan.csv"
ANCHORS_FILE = "anchors.csv"
METRICS_CSV = "metrics.csv"
METRICS_JSON = "metrics.json"
MANIFEST = "manifest.json"
TIMING = "timing.json"


class MixedScenarioError(RuntimeError):
    pass


def fmt_value(v) -> str:
    """Stable text for CSV cells: shortest round-trip repr for floats."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def csv_text(header, rows, scenario_hash: str) -> str:
    buf = io.StringIO()
    buf.write(f"# scenario_hash: {scenario_hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_value(x) for x in row])
    return buf.getvalue()


def plan_rows(plan):
    names = plan.nodes
    for kind, slot, i, j, lt, wt in plan.links():
        a, b = (i, j) if names[i] <= names[j] else (j, i)
        yield kind, slot, names[a], names[b], lt.value, float(wt)


def plan_csv(plan) -> str:
    return csv_text(PLAN_HEADER, plan_rows(plan), plan.scenario_hash)


def anchors_csv(plan) -> str:
    rows = [(s, plan.nodes[i]) for s, anchors in enumerate(plan.anchors)
            for i in sorted(anchors, key=lambda x: plan.nodes[x])]
    return csv_text(ANCHOR_HEADER, rows, plan.scenario_hash)


def read_csv(path) -> tuple[str, list[dict]]:
    """Read one of our CSVs; returns (scenario_hash, rows as dicts)."""
    text = Path(path).read_text()
    first, _, rest = text.partition("\n")
    if not first.startswith("# scenario_hash:"):
        raise ValueError(f"{path}: missing scenario_hash comment line")
    return first.split(":", 1)[1].strip(), list(csv.DictReader(io.StringIO(rest)))


def read_plan_csv(path) -> tuple[str, list[tuple]]:
    h, rows = read_csv(path)
    out = []
    for r in rows:
        out.append((r["slot_kind"], int(r["slot_index"]), r["node_a"], r["node_b"],
                    LinkType(r["link_type"]), float(r["weight"])))
    return h, out


def metric_rows(report, scenario_id: str, group: str, users: int):
    for name, value in report.as_rows():
        yield scenario_id, group, users, name, value


def metrics_csv(report, scenario_id: str, group: str, users: int) -> str:
    return csv_text(METRIC_HEADER, metric_rows(report, scenario_id, group, users), scenario_id)


def metrics_json(report, scenario_id: str, group: str, users: int, algorithm: str) -> str:
    doc = {"scenario_hash": scenario_id, "group": group, "users": users, "algorithm": algorithm,
           "metrics": dict(report.as_rows())}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def manifest_json(scenario, files: list[str]) -> str:
    doc = {
        "scenario_hash": scenario.scenario_hash,
        "seed": scenario.seed,
        "algorithm": scenario.algorithm,
        "group": scenario.group,
        "users": len(scenario.demand),
        "n_states": scenario.n_states,
        "version": __version__,
        "files": sorted(files),
        "config": json.loads(canonical(scenario.config)) if scenario.config else None,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def claim_directory(outdir, scenario_hash: str) -> Path:
    """Create ``outdir`` or confirm it belongs to this scenario."""
    outdir = Path(outdir)
    manifest = outdir / MANIFEST
    if manifest.exists():
        try:
            other = json.loads(manifest.read_text()).get("scenario_hash")
        except (OSError, json.JSONDecodeError):
            other = None
        if other != scenario_hash:
            raise MixedScenarioError(
                f"{outdir} holds output of scenario {other!r}, refusing to mix in {scenario_hash!r}")
    elif outdir.exists() and any(outdir.iterdir()):
        raise MixedScenarioError(f"{outdir} is not empty and has no manifest")
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def write_run(outdir, scenario, plan, report) -> dict:
    """Write all report files of one run; returns {kind: path}."""
    h = scenario.scenario_hash
    outdir = claim_directory(outdir, h)
    users = len(scenario.demand)
    texts = {
        PLAN_FILE: plan_csv(plan),
        ANCHORS_FILE: anchors_csv(plan),
        METRICS_CSV: metrics_csv(report, h, scenario.group, users),
        METRICS_JSON: metrics_json(report, h, scenario.group, users, scenario.algorithm),
    }
    texts[MANIFEST] = manifest_json(scenario, list(texts))
    paths = {}
    for name, text in texts.items():
        p = outdir / name
        p.write_text(text)
        paths[name] = p
    timing = {"scenario_hash": h, "runtime_s": report.runtime_s}
    (outdir / TIMING).write_text(json.dumps(timing, indent=2) + "\n")
    paths[TIMING] = outdir / TIMING
    return paths
