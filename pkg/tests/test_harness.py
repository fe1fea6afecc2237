import csv
import json

import pytest

from driftevo.engine import ConfigurationError
from driftevo.harness import config as C
from driftevo.harness.cli import main
from driftevo.harness.experiments import CSV_COLUMNS, aggregate, run_trials


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _read_csv(path):
    with open(path) as fh:
        header = fh.readline()
        rows = list(csv.DictReader(fh))
    return header, rows


SMALL = {"family": "monotone-conj", "n": 6, "epsilon": 0.3, "trials": 3, "horizon": 120}


def test_run_writes_csv_and_summary(tmp_path):
    cfg = _write(tmp_path / "c.json", SMALL)
    out = tmp_path / "run.csv"
    assert main(["run", "--config", cfg, "--seed", "5", "--out", str(out)]) == 0
    header, rows = _read_csv(out)
    assert header.startswith("# config=")
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 3 * 121
    assert rows[0]["selection_class"] == "initial"
    assert {r["selection_class"] for r in rows} <= {"initial", "beneficial", "neutral"}
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["trials"] == 3
    per = summary["per_trial"]
    assert summary["success_rate"] == sum(t["success"] for t in per) / 3
    assert json.loads(header[len("# config="):])["seed"] == 5


def test_run_is_byte_identical(tmp_path):
    cfg = _write(tmp_path / "c.json", {**SMALL, "drift_policy": "long-swap", "n": 10,
                                       "epsilon": 0.5, "delta": 0.01, "target_length": 7})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", "--config", cfg, "--seed", "1", "--out", str(a)]) == 0
    assert main(["run", "--config", cfg, "--seed", "1", "--out", str(b)]) == 0
    assert a.read_bytes().replace(b"a.csv", b"") == b.read_bytes().replace(b"b.csv", b"")


def test_parallel_matches_serial(tmp_path):
    cfg = {**C.DEFAULTS, "family": "hyperplane-rotation", "n": 3, "epsilon": 0.4,
           "trials": 3, "horizon": 150, "drift_policy": "random-walk", "seed": 8}
    cfg = C.resolve(cfg)
    serial = aggregate(cfg, run_trials(cfg, 1))
    parallel = aggregate(cfg, run_trials(cfg, 2))
    assert serial == parallel


def test_default_output_dir_from_env(tmp_path, monkeypatch):
    monkeypatch.setenv(C.OUTPUT_DIR_ENV, str(tmp_path / "outdir"))
    cfg = _write(tmp_path / "c.json", {**SMALL, "trials": 1})
    assert main(["run", "--config", cfg, "--seed", "2"]) == 0
    assert (tmp_path / "outdir" / "run-monotone-conj-seed2.csv").exists()
    assert (tmp_path / "outdir" / "run-monotone-conj-seed2.json").exists()


@pytest.mark.parametrize(
    "bad",
    [
        {"horizon": 0},
        {"family": "parity"},
        {"epsilon": 1.5},
        {"bogus_key": 1},
        {"mode": "sampling"},
        {"drift_policy": "long-swap", "target_length": 3},
        {"drift_policy": "random-walk"},
        {"seed": -4},
    ],
)
def test_config_errors_exit_2(tmp_path, bad):
    cfg = _write(tmp_path / "c.json", {**SMALL, **bad})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 2


def test_unreadable_config_exits_2(tmp_path, capsys):
    (tmp_path / "c.json").write_text("{not json")
    assert main(["run", "--config", str(tmp_path / "c.json")]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    assert "config error" in capsys.readouterr().err


def test_short_drift_target_message():
    cfg = {**C.DEFAULTS, "drift_policy": "long-swap", "target_length": 5}
    with pytest.raises(ConfigurationError, match="target_length >= 12"):
        C.resolve(cfg)


def test_theorem_defaults_resolve():
    cfg = C.resolve({**C.DEFAULTS})
    assert cfg["g"] == 3600 and cfg["horizon_resolved"] == 7200
    assert cfg["tolerance"] == pytest.approx(0.2 ** 2 / 18)
    assert cfg["delta_resolved"] == pytest.approx(0.2 ** 2 / 144)
    rot = C.resolve({**C.DEFAULTS, "family": "hyperplane-rotation", "n": 5, "horizon": "g"})
    assert rot["horizon_resolved"] == 6202


def test_overrides_and_set_flag(tmp_path):
    cfg = _write(tmp_path / "c.json", SMALL)
    out = tmp_path / "o.csv"
    assert main(["run", "--config", cfg, "--set", "trials=1", "--set", "start=random",
                 "--out", str(out)]) == 0
    _, rows = _read_csv(out)
    assert len(rows) == 121
    assert C.parse_override("family=hyperplane-rotation") == ("family", "hyperplane-rotation")
    assert C.parse_override("delta=0.5") == ("delta", 0.5)
    with pytest.raises(ConfigurationError):
        C.parse_override("oops")


def test_schedule_file(tmp_path):
    sched = tmp_path / "targets.txt"
    sched.write_text("1,2,3,4,5,6,7,8\n1,2,3,4,5,6,7,9\n1,2,3,4,5,6,10,9\n")
    cfg = _write(tmp_path / "c.json", {**SMALL, "n": 10, "epsilon": 0.5, "trials": 1,
                                       "schedule_file": str(sched), "delta": 0.004})
    out = tmp_path / "s.csv"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    _, rows = _read_csv(out)
    assert [r["target_id"] for r in rows[:4]] == [
        "1,2,3,4,5,6,7,8", "1,2,3,4,5,6,7,9", "1,2,3,4,5,6,9,10", "1,2,3,4,5,6,9,10"]
    bad = _write(tmp_path / "b.json", {**SMALL, "schedule_file": str(sched), "delta": 0.001,
                                       "n": 10})
    assert main(["run", "--config", bad, "--out", str(out)]) == 2


def test_hyperplane_ids(tmp_path):
    base = {"family": "hyperplane-rotation", "n": 3, "epsilon": 0.4, "trials": 1, "horizon": 5}
    out = tmp_path / "h.csv"
    assert main(["run", "--config", _write(tmp_path / "c.json", base), "--out", str(out)]) == 0
    _, rows = _read_csv(out)
    assert all(len(r["rep_id"]) == 12 for r in rows)
    full = _write(tmp_path / "f.json", {**base, "id_style": "full"})
    assert main(["run", "--config", full, "--out", str(out)]) == 0
    _, rows = _read_csv(out)
    assert len(rows[0]["target_id"].split(",")) == 3


def test_other_families_run(tmp_path):
    for extra in (
        {"family": "general-conj", "n": 6, "epsilon": 0.3},
        {"family": "hyperplane-componentwise", "n": 3, "epsilon": 0.5, "k": 1},
        {"family": "csq-reduction", "n": 4, "epsilon": 0.25, "quasi_monotonic": True},
    ):
        cfg = _write(tmp_path / "c.json", {**extra, "trials": 1, "horizon": 30,
                                           "mode": "noisy-uniform"})
        assert main(["run", "--config", cfg, "--out", str(tmp_path / "o.csv")]) == 0


def test_verify_clean_and_violating(tmp_path, capsys):
    ok = _write(tmp_path / "v.json", {"verify": {
        "hyperplane-rotation": {"epsilons": [0.4], "ns": [3], "cases": 300}}})
    out = tmp_path / "v.csv"
    assert main(["verify", "--config", ok, "--out", str(out)]) == 0
    _, rows = _read_csv(out)  # first line is the header here, not a comment
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["violations"] == 0
    # long targets at the length cap stall between 1 - eps and 1 - eps/2
    bad = _write(tmp_path / "w.json", {"verify": {
        "monotone-conj": {"epsilons": [0.1], "ns": [8], "cases": 1000}}})
    assert main(["verify", "--config", bad, "--out", str(out)]) == 1
    text = capsys.readouterr().out
    assert "VIOLATION" in text and "below 1-eps: 0" in text


def test_verify_unknown_family(tmp_path):
    cfg = _write(tmp_path / "v.json", {"verify": {"csq-reduction": {}}})
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "v.csv")]) == 2


def test_sweep_cells(tmp_path):
    base = {**SMALL, "trials": 2, "horizon": 60}
    out = tmp_path / "sw.csv"
    assert main(["sweep", "--config", _write(tmp_path / "a.json", base), "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1 and rows[0]["axis"] == ""
    eps = {**base, "sweep": {"axis": "epsilon", "values": [0.1, 0.2, 0.4]}}
    assert main(["sweep", "--config", _write(tmp_path / "b.json", eps), "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["epsilon"]) for r in rows] == [0.1, 0.2, 0.4]
    assert len({r["g"] for r in rows}) == 3
    bad = {**base, "sweep": {"axis": "n", "values": [3]}}
    assert main(["sweep", "--config", _write(tmp_path / "c.json", bad), "--out", str(out)]) == 2


def test_delta_sweep_keeps_success_at_theorem_delta(tmp_path):
    base = {"family": "hyperplane-rotation", "n": 3, "epsilon": 0.4, "trials": 4,
            "drift_policy": "random-walk",
            "sweep": {"axis": "delta_scale", "values": [0, 1, 2, 10]}}
    out = tmp_path / "d.csv"
    assert main(["sweep", "--config", _write(tmp_path / "d.json", base), "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    rates = [float(r["success_rate"]) for r in rows]
    assert rates[0] >= 0.6 and rates[1] >= 0.6
