import json
import subprocess
import sys
from pathlib import Path

import pytest

from jcpd import cli
from jcpd import config as cfgmod
from jcpd.reports import MANIFEST, read_csv, read_plan_csv

ROOT = Path(__file__).resolve().parents[1]
DEFAULT = ROOT / "configs" / "default.json"


def write_cfg(tmp_path, doc, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def test_shipped_configs_validate(capsys):
    for p in sorted((ROOT / "configs").glob("*.json")):
        assert cli.main(["validate", str(p)]) == 0, p
    assert "valid" in capsys.readouterr().out


def test_default_file_matches_builtin_defaults():
    assert cfgmod.scenario_hash(cfgmod.load_config(DEFAULT)) == cfgmod.scenario_hash(cfgmod.default_config())


def test_long_slot_not_multiple(tmp_path, capsys):
    p = write_cfg(tmp_path, {"clock": {"long_slot_len_s": 7}})
    assert cli.main(["validate", str(p)]) == 1
    assert "LongSlot not a multiple of ShortSlot" in capsys.readouterr().out


def test_unknown_preset_lists_known(tmp_path, capsys):
    p = write_cfg(tmp_path, {"params": "group9"})
    assert cli.main(["validate", str(p)]) == 1
    out = capsys.readouterr().out
    assert "group9" in out and "group1, group2, group3" in out


def test_every_problem_reported(tmp_path, capsys):
    p = write_cfg(tmp_path, {"clock": {"long_slot_len_s": 7, "horizon_s": 500}, "params": "nope"})
    assert cli.main(["validate", str(p)]) == 1
    out = capsys.readouterr().out
    # 360 s is no multiple of 7 s either, so four lines
    assert "4 problem(s)" in out
    assert "horizon is not a whole number" in out and "unknown parameter group" in out


def test_parse_error_located(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"seed": 1,\n  "users": }')
    assert cli.main(["validate", str(p)]) == 1
    assert "bad.json:2:" in capsys.readouterr().out


def test_schema_error_names_field(tmp_path, capsys):
    p = write_cfg(tmp_path, {"users": {"count": -3}})
    assert cli.main(["validate", str(p)]) == 1
    assert "users.count" in capsys.readouterr().out


def test_config_round_trip_hash():
    cfg = cfgmod.apply_overrides(cfgmod.default_config(), ["users.count=64", "params=\"group2\"", "seed=7"])
    again = cfgmod.parse_config(cfgmod.dump_config(cfg))
    assert cfgmod.scenario_hash(again) == cfgmod.scenario_hash(cfg)
    assert cfgmod.scenario_hash(cfg) != cfgmod.scenario_hash(cfgmod.default_config())


def test_overrides():
    cfg = cfgmod.apply_overrides(cfgmod.default_config(), ["users.count=64", "name=x y"])
    assert cfg["users"]["count"] == 64 and cfg["name"] == "x y"
    with pytest.raises(cfgmod.ConfigError):
        cfgmod.apply_overrides(cfg, ["nokey"])
    with pytest.raises(cfgmod.ConfigError):
        cfgmod.apply_overrides(cfg, ["seed.x=1"])


def one_state(tmp_path, *extra):
    out = tmp_path / "run"
    rc = cli.main(["run", str(DEFAULT), "--set", "clock.horizon_s=360", "--set", "users.count=8",
                   "-o", str(out), *extra])
    return rc, out


def test_run_one_state(tmp_path, capsys):
    rc, out = one_state(tmp_path)
    assert rc == 0
    h, rows = read_plan_csv(out / "plan.csv")
    assert {r[1] for r in rows if r[0] == "long"} <= set(range(1, 41))
    assert {r[1] for r in rows if r[0] == "short"} <= set(range(1, 121))
    man = json.loads((out / MANIFEST).read_text())
    assert man["scenario_hash"] == h and man["n_states"] == 1 and man["algorithm"] == "jcpd"
    for name in ("anchors.csv", "metrics.csv"):
        assert read_csv(out / name)[0] == h
    assert json.loads((out / "metrics.json").read_text())["scenario_hash"] == h
    text = capsys.readouterr().out
    assert "mean_ranging_links_per_gnss_per_state" in text


def test_run_records_fcp(tmp_path):
    rc, out = one_state(tmp_path, "--algorithm", "fcp")
    assert rc == 0
    man = json.loads((out / MANIFEST).read_text())
    assert man["algorithm"] == "fcp" and man["config"]["algorithm"] == "fcp"


def test_run_config_error_exit_1(tmp_path):
    assert cli.main(["run", str(DEFAULT), "--set", "params=\"bogus\"", "-o", str(tmp_path / "x")]) == 1


def test_mixed_scenario_directory_refused(tmp_path, capsys):
    rc, out = one_state(tmp_path)
    assert rc == 0
    rc = cli.main(["run", str(DEFAULT), "--set", "clock.horizon_s=360", "--set", "users.count=4",
                   "-o", str(out)])
    assert rc == 2
    assert "refusing" in capsys.readouterr().out


def test_rerun_same_scenario_allowed(tmp_path):
    rc, out = one_state(tmp_path)
    first = (out / "plan.csv").read_bytes()
    assert one_state(tmp_path)[0] == 0
    assert (out / "plan.csv").read_bytes() == first


def test_output_root_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path / "root"))
    rc = cli.main(["run", str(DEFAULT), "--set", "clock.horizon_s=360", "--set", "users.count=0"])
    assert rc == 0
    dirs = list((tmp_path / "root").iterdir())
    assert len(dirs) == 1 and (dirs[0] / "plan.csv").exists()


def test_parse_sweep():
    assert cli.parse_sweep("configs=jcpd-group1,fcp;users=48,72") == {
        "configs": ["jcpd-group1", "fcp"], "users": [48, 72]}
    for bad in ("", "configs=", " ; "):
        with pytest.raises(cfgmod.ConfigError, match="empty sweep"):
            cli.parse_sweep(bad)
    with pytest.raises(cfgmod.ConfigError):
        cli.parse_sweep("colour=red")


def test_full_group_sweep_has_16_cells():
    axes = cli.parse_sweep("configs=jcpd-group1,jcpd-group2,jcpd-group3,fcp;users=48,56,64,72")
    cells = cli.sweep_cells(cfgmod.default_config(), axes)
    assert len(cells) == 16
    assert cells[0][0] == "jcpd-group1-u48" and cells[-1][0] == "fcp-u72"
    assert cells[-1][1]["algorithm"] == "fcp"


def test_compare_empty_sweep_exit_1(capsys):
    assert cli.main(["compare", str(DEFAULT), "--sweep", ""]) == 1
    assert "empty sweep" in capsys.readouterr().out


def test_compare_two_cells(tmp_path):
    out = tmp_path / "cmp"
    rc = cli.main(["compare", str(DEFAULT), "--sweep", "configs=jcpd-group1,fcp;users=8",
                   "--set", "clock.horizon_s=360", "-j", "2", "-o", str(out)])
    assert rc == 0
    h, rows = read_csv(out / "compare.csv")
    metrics = {r["metric"] for r in rows}
    for m in metrics:
        assert sum(1 for r in rows if r["metric"] == m) == 2
    assert [r["group"] for r in rows][0] == "group1" and rows[-1]["group"] == "fcp"
    assert json.loads((out / MANIFEST).read_text())["failed"] == []
    # cell outputs do not depend on the worker count
    serial = tmp_path / "cmp1"
    cli.main(["compare", str(DEFAULT), "--sweep", "configs=jcpd-group1,fcp;users=8",
              "--set", "clock.horizon_s=360", "-j", "1", "-o", str(serial)])
    assert (serial / "compare.csv").read_bytes() == (out / "compare.csv").read_bytes()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "jcpd", "validate", str(DEFAULT)], capture_output=True, text=True)
    assert r.returncode == 0 and "valid" in r.stdout
