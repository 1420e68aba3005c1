import json

import pytest

from gpupart.cli import load_taskset, main, read_dat, save_taskset, selftest
from gpupart.gen import GenConfig, generate_taskset
from gpupart.model import TaskType


def test_generate(tmp_path, capsys):
    out = tmp_path / "ts.json"
    assert main(["generate", "--tasks", "50", "--util", "30", "--prm", "0.5", "--sms", "68",
                 "--seed", "1", "--out", str(out)]) == 0
    ts = load_taskset(out)
    assert len(ts) == 50 and ts.M == 68
    assert str(out) in capsys.readouterr().out
    doc = json.loads(out.read_text())
    assert set(doc["tasks"][0]) == {"id", "period", "deadline", "type", "a_n", "b_n", "a_c", "b_c"}


def test_generate_rejects_overload(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["generate", "--tasks", "50", "--util", "80", "--out", str(tmp_path / "x.json")])
    assert e.value.code != 0


def test_generate_all_memory(tmp_path):
    out = tmp_path / "ts.json"
    main(["generate", "--tasks", "20", "--util", "5", "--prm", "1.0", "--out", str(out)])
    assert all(t.ttype is TaskType.MEMORY for t in load_taskset(out))


def test_generate_from_config_and_env_seed(tmp_path, monkeypatch):
    cfg = tmp_path / "gen.json"
    cfg.write_text(json.dumps({"n": 10, "U_total": 3, "prm": 0.5, "M": 16, "seed": 4}))
    a, b, c = (tmp_path / f"{k}.json" for k in "abc")
    main(["generate", "--config", str(cfg), "--out", str(a)])
    monkeypatch.setenv("GPUPART_SEED", "4")
    main(["generate", "--config", str(cfg), "--seed", "99", "--out", str(b)])
    monkeypatch.setenv("GPUPART_SEED", "5")
    main(["generate", "--config", str(cfg), "--out", str(c)])
    assert a.read_text() == b.read_text() != c.read_text()


def test_round_trip(tmp_path):
    ts = generate_taskset(GenConfig(30, 12, seed=8), 68)
    save_taskset(ts, tmp_path / "t.json")
    assert load_taskset(tmp_path / "t.json") == ts


def test_analyze_exit_codes(tmp_path, mergeable_pair, unmergeable_pair, capsys):
    good, bad = tmp_path / "good.json", tmp_path / "bad.json"
    save_taskset(mergeable_pair, good)
    save_taskset(unmergeable_pair, bad)
    assert main(["analyze", str(good), "--heuristic", "sms"]) == 0
    out = capsys.readouterr().out
    assert "SCHEDULABLE" in out and out.count("partition ") == 1 and "Pi = 1" in out
    assert main(["analyze", str(bad), "--heuristic", "sms"]) == 2
    assert main(["analyze", str(good), "--heuristic", "bf", "--forbidden", "ina", "--binary-search"]) == 0
    assert main(["analyze", str(tmp_path / "missing.json")]) == 1


def test_analyze_invalid_file(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text(json.dumps({"M": 4, "tasks": [{"id": 0, "period": 10, "deadline": 20, "type": "memory",
                                                "a_n": 1, "b_n": 0, "a_c": 2, "b_c": 0}]}))
    assert main(["analyze", str(p)]) == 1


def test_sweep_files(tmp_path):
    args = ["sweep", "--tasks", "10", "--sms", "10", "--u-min", "2", "--u-max", "6", "--u-step", "2",
            "--reps", "2", "--variants", "1G,BF_ACT", "--seed", "3"]
    assert main(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "b")]) == 0
    for v in ("1G", "BF_ACT"):
        rows_a = read_dat(tmp_path / "a" / f"{v}.dat")
        rows_b = read_dat(tmp_path / "b" / f"{v}.dat")
        assert len(rows_a) == 3
        strip = lambda text: [l.split()[:-1] for l in text.splitlines()]
        assert strip((tmp_path / "a" / f"{v}.dat").read_text()) == strip((tmp_path / "b" / f"{v}.dat").read_text())
    header = (tmp_path / "a" / "1G.dat").read_text().splitlines()[0]
    assert header == "# U_nominal sched_rate eff_lower eff_upper eff_achieved avg_partitions avg_time_ms"
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["instances"] == 6


def test_sweep_config_file(tmp_path):
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps({"M": 8, "n_tasks": 6, "U_min": 1, "U_max": 2, "U_step": 1, "reps": 1,
                               "variants": ["SMS_INA"]}))
    assert main(["sweep", "--config", str(cfg), "--out-dir", str(tmp_path / "o")]) == 0
    assert len(read_dat(tmp_path / "o" / "SMS_INA.dat")) == 2


def test_selftest():
    assert selftest(50, seed=1) == 0
    assert main(["selftest", "--instances", "20"]) == 0
