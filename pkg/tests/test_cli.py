import subprocess
import sys

import pytest

from qoneway import cli, measures
from qoneway.instances import ProtocolBundle, parse_instance_file


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_entropy_check_passes(capsys):
    code, out, _ = run(["entropy-check", "--seed", "3", "--trials", "200"], capsys)
    assert code == 0
    assert "# table=entropy_check" in out
    assert out.count(",true") == 4


def test_learn_bundled_demo(tmp_path, capsys):
    code, _, err = run(["learn", "demo_q1", "--out", str(tmp_path)], capsys)
    assert code == 0, err
    summary = (tmp_path / "learn_summary.csv").read_text()
    assert summary.startswith("# qoneway learn\n")
    assert "true" in summary


def test_oracle_xor_shift(tmp_path, capsys):
    code, _, _ = run(["oracle", "xor_shift_n4", "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = dict(
        line.split(",", 1)
        for line in (tmp_path / "oracle_summary.csv").read_text().splitlines()
        if not line.startswith("#")
    )
    assert int(rows["bits"]) <= 4
    assert rows["exact"] == "true"


def test_same_seed_is_byte_identical(capsys):
    argv = ["lsd", "--seed", "11", "--trials", "500"]
    first = run(argv, capsys)
    second = run(argv, capsys)
    assert first[0] == 0
    assert first[1] == second[1]
    assert "rng=numpy.random.PCG64" in first[1]


def test_missing_seed_is_input_error(capsys):
    code, _, err = run(["majix"], capsys)
    assert code == 2
    assert "--seed" in err


def test_bad_file_is_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("[function]\n0z\n")
    code, _, err = run(["oracle", str(bad)], capsys)
    assert code == 2
    assert "bad.txt:2:2" in err


def test_missing_file_is_input_error(capsys):
    assert run(["oracle", "no_such_instance"], capsys)[0] == 2


def test_unknown_command_is_input_error(capsys):
    assert run(["frobnicate"], capsys)[0] == 2


def test_dimension_cap(capsys):
    code, _, err = run(["lsd", "--seed", "1", "--dim-cap", "4"], capsys)
    assert code == 2
    assert "dimension cap" in err


def test_bad_epsilon(capsys):
    assert run(["learn", "demo_q1", "--epsilon", "2"], capsys)[0] == 2


def test_failure_writes_replay_that_reproduces(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(measures, "pinsker_bound", lambda s: -1.0)
    code, _, err = run(["entropy-check", "--seed", "1", "--trials", "5", "--out", str(tmp_path)], capsys)
    assert code == 1
    replay = tmp_path / "replay-entropy-check.txt"
    assert replay.is_file()
    assert "FAIL pinsker" in err
    states = parse_instance_file(replay)
    assert {"rho", "sigma"} <= states.keys()
    rerun = ["entropy-check", "--replay", str(replay), "--out", str(tmp_path / "rerun")]
    code, _, _ = run(rerun, capsys)
    assert code == 1
    assert (tmp_path / "rerun" / "replay-entropy-check.txt").is_file()
    monkeypatch.undo()
    code, _, _ = run(rerun, capsys)
    assert code == 0


def test_learn_replay_bundle_parses(tmp_path, monkeypatch, capsys):
    from qoneway import experiments, learner

    def broken(*args, **kwargs):
        raise learner.InternalConsistencyError("forced")

    monkeypatch.setattr(experiments, "learn_instance", broken)
    code, _, _ = run(["learn", "demo_q1", "--out", str(tmp_path)], capsys)
    assert code == 1
    obj = parse_instance_file(tmp_path / "replay-learn.txt")
    assert isinstance(obj, ProtocolBundle)


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "qoneway.cli", "oracle", "xor_shift_n4"],
        capture_output=True, text=True, cwd=tmp_path,
    )
    assert proc.returncode == 0
    assert "table=oracle_summary" in proc.stdout
