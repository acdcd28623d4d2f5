import json

from fakebell.cli import EXIT_ANALYSIS, EXIT_CONFIG, EXIT_OK, main


def write_config(tmp_path, **d):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"schema_version": 1, **d}))
    return p


def test_run_writes_outputs(tmp_path, capsys):
    cfg = write_config(tmp_path, scenario="twin_fsg_passive", n_pairs=5000, seed=1)
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--emit-events"]) == EXIT_OK
    assert {p.name for p in out.iterdir()} == {"report.json", "fig4_matrix.csv", "alice_events.csv", "bob_events.csv"}
    assert "S =" in capsys.readouterr().out


def test_seed_flag_overrides(tmp_path):
    cfg = write_config(tmp_path, scenario="genuine", n_pairs=3000, seed=1)
    reports = []
    for seed in ("1", "2"):
        out = tmp_path / seed
        assert main(["run", "--config", str(cfg), "--out", str(out), "--seed", seed]) == EXIT_OK
        reports.append(json.loads((out / "report.json").read_text()))
    assert reports[0]["config"]["seed"] == 1 and reports[1]["config"]["seed"] == 2
    assert reports[0]["chsh"]["S"] != reports[1]["chsh"]["S"]


def test_sweep_writes_fig3(tmp_path):
    cfg = write_config(tmp_path, scenario="twin_fsg_passive", n_pairs=4000, q_sweep=[-0.5, 0.5])
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "fig3_sweep.csv").read_text().splitlines()
    assert lines[0] == "q,S_programmed,S_observed,dS" and len(lines) == 3


def test_analyze_roundtrip(tmp_path):
    cfg = write_config(tmp_path, scenario="genuine", n_pairs=5000)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "r"), "--emit-events"]) == EXIT_OK
    r = tmp_path / "r"
    assert main(["analyze", str(r / "alice_events.csv"), str(r / "bob_events.csv"), "--out", str(tmp_path / "a")]) == EXIT_OK
    ran = json.loads((r / "report.json").read_text())
    got = json.loads((tmp_path / "a" / "report.json").read_text())
    assert got["chsh"] == ran["chsh"]


def test_exit_codes(tmp_path, capsys):
    bad = write_config(tmp_path, scenario="warp_drive")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    nosweep = write_config(tmp_path, scenario="twin_fsg_passive")
    assert main(["sweep", "--config", str(nosweep), "--out", str(tmp_path)]) == EXIT_CONFIG
    f = tmp_path / "e.csv"
    f.write_text("time_ns,party,basis,outcome\n1,alice,0\n")
    assert main(["analyze", str(f), str(f), "--out", str(tmp_path)]) == EXIT_ANALYSIS
    assert "line 2" in capsys.readouterr().err
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["analyze", str(empty), str(empty), "--out", str(tmp_path)]) == EXIT_ANALYSIS
