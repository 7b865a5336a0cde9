"""Experiment CLI: CSV output, sweeps, traces, and the compare table."""

import csv
import io
import subprocess
import sys

import pytest

import cogmesh as cm
from cogmesh import cli
from conftest import INSTANCE_DIR

DESK = str(INSTANCE_DIR / "desk3.json")


def _run(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == list(cli.CSV_HEADER)
    return rows[1:]


def test_assign_stdout_csv(capsys):
    code, out, err = _run(
        ["assign", "--instance", DESK, "--algorithm", "alg1"], capsys
    )
    assert code == 0 and err == ""
    body = _parse_csv(out)
    assert len(body) == 3  # one row per SU
    for su, row in enumerate(body):
        assert row[0] == ""  # no sweep
        assert row[1] == "alg1"
        assert int(row[2]) == su
        assert float(row[3]) > 0.0
        assert row[4] == ""  # simulation skipped
        assert int(row[6]) >= 2
    mins = {row[5] for row in body}
    assert len(mins) == 1
    assert float(mins.pop()) == min(float(r[3]) for r in body)


def test_assign_simulation_column(capsys):
    code, out, _ = _run(
        ["assign", "--instance", DESK, "--algorithm", "alg2",
         "--cycles", "2000", "--seed", "5"],
        capsys,
    )
    assert code == 0
    for row in _parse_csv(out):
        sim = float(row[4])
        assert sim == pytest.approx(float(row[3]), abs=0.1)


def test_assign_reports_final_window_delta(capsys):
    code, out, _ = _run(
        ["assign", "--instance", DESK, "--algorithm", "alg1"], capsys
    )
    body = _parse_csv(out)
    inst = cm.load_instance(DESK)
    outcome = cm.assign_nonoverlapping(inst)
    sized = cm.select_window(inst, outcome.assignment, 0.03)
    assert int(body[0][6]) == sized.global_window
    assert float(body[0][7]) == cm.overhead(sized.global_window)


def test_sweep_channels_column_keeps_tokens(capsys):
    code, out, _ = _run(
        ["assign", "--instance", DESK, "--algorithm", "alg1",
         "--sweep", "num_channels=3,4,5"],
        capsys,
    )
    assert code == 0
    body = _parse_csv(out)
    assert [row[0] for row in body] == ["3"] * 3 + ["4"] * 3 + ["5"] * 3
    mins = [float(row[5]) for row in body[::3]]
    assert mins == sorted(mins)  # more channels never hurt the minimum


def test_sweep_idle_probability(capsys):
    code, out, _ = _run(
        ["assign", "--instance", DESK, "--algorithm", "alg2",
         "--sweep", "pu_idle_prob=0.5,0.75"],
        capsys,
    )
    assert code == 0
    body = _parse_csv(out)
    assert {row[0] for row in body} == {"0.5", "0.75"}


def test_csv_reruns_are_byte_identical(tmp_path):
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    argv = ["assign", "--instance", DESK, "--algorithm", "alg2",
            "--cycles", "1500", "--seed", "17"]
    assert cli.main(argv + ["--out", str(out_a)]) == 0
    assert cli.main(argv + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_trace_file(tmp_path, capsys):
    trace = tmp_path / "run.tsv"
    out = tmp_path / "run.csv"
    code = cli.main(
        ["assign", "--instance", DESK, "--algorithm", "alg2",
         "--cycles", "20", "--seed", "1",
         "--out", str(out), "--trace", str(trace)]
    )
    assert code == 0
    lines = trace.read_text().splitlines()
    assert lines[0] == "cycle\tsu\tchannel\tbackoff\toutcome"
    assert len(lines) == 1 + 20 * 3
    names = {line.split("\t")[4] for line in lines[1:]}
    assert names <= set(cm.simulator.OUTCOME_NAMES)


def test_trace_flag_validation(capsys):
    with pytest.raises(SystemExit):
        cli.main(["assign", "--instance", DESK, "--algorithm", "alg1",
                  "--trace", "t.tsv", "--sweep", "num_channels=3,4"])
    with pytest.raises(SystemExit):
        cli.main(["assign", "--instance", DESK, "--algorithm", "alg1",
                  "--trace", "t.tsv"])
    capsys.readouterr()


def test_bad_sweep_rejected(capsys):
    for bad in ("num_channels", "frequency=1,2", "num_channels=", "num_channels=x"):
        with pytest.raises(SystemExit):
            cli.main(["assign", "--instance", DESK, "--algorithm", "alg1",
                      "--sweep", bad])
    capsys.readouterr()


def test_missing_instance_is_reported(capsys):
    code, out, err = _run(
        ["assign", "--instance", "/nonexistent.json", "--algorithm", "alg1"],
        capsys,
    )
    assert code == 2
    assert err.startswith("error:")


def test_compare_table(capsys):
    code, out, err = _run(
        ["compare", "--instance", DESK, "--cycles", "0"], capsys
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split() == [
        "algorithm", "min_analytic", "min_sim", "wall_s", "iters", "evals"
    ]
    algs = [line.split()[0] for line in lines[2:]]
    assert algs == list(cli.ALGORITHMS)
    by_alg = {line.split()[0]: line.split() for line in lines[2:]}
    # exhaustive baselines bound their heuristics
    assert float(by_alg["alg1"][1]) <= float(by_alg["brute"][1]) + 1e-9
    assert float(by_alg["alg2"][1]) <= float(by_alg["brute-overlap"][1]) + 1e-9
    assert all(line.split()[2] == "-" for line in lines[2:])  # no simulation


def test_compare_skips_oversized_brute(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("COGMESH_CAP", "8")
    with pytest.warns(UserWarning, match="skipped"):
        code, out, _ = _run(
            ["compare", "--instance", DESK, "--cycles", "0"], capsys
        )
    assert code == 0
    algs = [line.split()[0] for line in out.splitlines()[2:]]
    assert algs == ["alg1", "alg2"]  # desk needs 12 bits, the cap allows 8


def test_cap_env_must_be_positive_int(capsys, monkeypatch):
    for raw in ("0", "-3", "four"):
        monkeypatch.setenv("COGMESH_CAP", raw)
        with pytest.raises(SystemExit):
            cli.main(["assign", "--instance", DESK, "--algorithm", "alg1"])
    capsys.readouterr()


def test_run_experiment_api(desk3):
    spec = cli.ExperimentSpec(instance=desk3, algorithm="brute")
    rows, trace = cli.run_experiment(spec)
    assert trace == []
    assert [r.su_id for r in rows] == [0, 1, 2]
    assert all(r.sim_throughput is None for r in rows)
    brute = cm.brute_force(desk3)
    sized = cm.select_window(desk3, brute.assignment, 0.03)
    delta = cm.overhead(sized.global_window)
    want = [
        cm.total_throughput(su, brute.assignment, desk3, delta) for su in range(3)
    ]
    assert [r.analytic_throughput for r in rows] == pytest.approx(want, abs=1e-12)


def test_console_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "cogmesh.cli", "assign",
         "--instance", DESK, "--algorithm", "alg1"],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0
    assert out.stdout.startswith(",".join(cli.CSV_HEADER))
