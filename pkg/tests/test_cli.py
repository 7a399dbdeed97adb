import pytest

import dcgreedy.algorithms
from dcgreedy import load_scenario, save_scenario, two_cluster_scenario
from dcgreedy.algorithms import AuditReport
from dcgreedy.cli import main


@pytest.fixture()
def scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    save_scenario(two_cluster_scenario(), path)
    return str(path)


def test_generate_writes_loadable_scenario(tmp_path, capsys):
    out = tmp_path / "gen.json"
    code = main([
        "generate", "--out", str(out), "--agents", "3",
        "--radii", "0.5", "0.8", "1.1", "--grid", "3", "3",
        "--field", "3", "3", "--points", "40", "--graph", "ring", "--seed", "4",
    ])
    assert code == 0
    scenario = load_scenario(out)
    assert scenario.partition.n == 27
    assert "wrote scenario" in capsys.readouterr().out


def test_run_writes_csv(scenario_file, tmp_path, capsys):
    out = tmp_path / "rows.csv"
    code = main([
        "run", "--scenario", scenario_file, "--algo", "distributed",
        "--T", "3", "--K", "10", "--hops", "d", "--seeds", "0", "1",
        "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("algo,T,K,")
    assert len(lines) == 3


def test_run_without_out_prints_csv(scenario_file, capsys):
    code = main([
        "run", "--scenario", scenario_file, "--algo", "sequential",
        "--orders", "1,2", "2,1",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "sequential" in out and "1-2" in out


def test_missing_scenario_is_config_error(tmp_path, capsys):
    code = main(["run", "--scenario", str(tmp_path / "nope.json"), "--algo", "brute"])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_bad_flag_exits_one(scenario_file):
    with pytest.raises(SystemExit) as excinfo:
        main(["run", "--scenario", scenario_file, "--algo", "quantum"])
    assert excinfo.value.code == 1


def test_audit_reports_pass(scenario_file, capsys):
    code = main([
        "audit", "--scenario", scenario_file, "--T", "4", "--K", "10",
        "--seeds", "0", "1", "2",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "audit pass" in out
    assert "all 3 runs passed" in out


def test_audit_failure_exits_two(scenario_file, capsys, monkeypatch):
    def always_fail(trace):
        return AuditReport(passed=False, checks=(), failures=("forced",))

    monkeypatch.setattr(dcgreedy.algorithms, "audit_trace", always_fail)
    code = main(["audit", "--scenario", scenario_file, "--T", "3", "--K", "5"])
    assert code == 2
    assert "violated" in capsys.readouterr().err


def test_run_failure_exits_two(scenario_file, capsys, monkeypatch):
    def always_fail(trace):
        return AuditReport(passed=False, checks=(), failures=("forced",))

    monkeypatch.setattr(dcgreedy.algorithms, "audit_trace", always_fail)
    code = main([
        "run", "--scenario", scenario_file, "--algo", "distributed",
        "--T", "3", "--K", "5",
    ])
    assert code == 2


def test_sensitivity_summary(scenario_file, tmp_path, capsys):
    out = tmp_path / "sens.csv"
    code = main([
        "sensitivity", "--scenario", scenario_file, "--orders", "1,2", "2,1",
        "--T", "10", "--K", "50", "--seeds", "0", "1", "--out", str(out),
    ])
    assert code == 0
    printed = capsys.readouterr().out
    assert "sequential across 2 orders" in printed
    assert "spread 3" in printed
    assert out.exists()
