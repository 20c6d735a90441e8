import json
import subprocess
import sys

import pytest

from doda.cli import main
from conftest import S3_TEXT


@pytest.fixture
def s3_file(tmp_path):
    p = tmp_path / "s3.seq"
    p.write_text(S3_TEXT)
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate(capsys, s3_file):
    code, out, _ = run(capsys, "simulate", "--algo", "gathering", "--seq", s3_file, "--trace")
    assert code == 0
    data = json.loads(out)
    assert data["events"] == [{"t": 0, "sender": 2, "receiver": 1}, {"t": 1, "sender": 1, "receiver": 0}]
    assert data["duration"] == 1


def test_cost_and_oracle(capsys, s3_file):
    code, out, _ = run(capsys, "cost", "--algo", "waiting", "--seq", s3_file)
    assert code == 0 and json.loads(out)["cost"] == 2
    code, out, _ = run(capsys, "oracle", "--seq", s3_file, "--op", "opt", "--t", "2")
    assert code == 0 and json.loads(out)["value"] is None
    code, out, _ = run(capsys, "oracle", "--seq", s3_file, "--op", "schedule", "--t", "1")
    assert json.loads(out)["events"][0] == {"t": 1, "sender": 1, "receiver": 0}
    code, out, _ = run(capsys, "oracle", "--seq", s3_file, "--op", "T", "--i", "1")
    assert json.loads(out)["value"] == 1


def test_cost_undetermined_exit_code(capsys, tmp_path):
    p = tmp_path / "stuck.seq"
    p.write_text("n 3 sink 0\n" + "1 2\n0 2\n" * 20)
    code, out, _ = run(capsys, "cost", "--algo", "waiting", "--seq", str(p), "--horizon", "20")
    assert code == 2 and json.loads(out)["determined"] is False


def test_usage_errors_exit_1(capsys, s3_file, tmp_path):
    assert run(capsys, "simulate", "--algo", "nope", "--seq", s3_file)[0] == 1
    bad = tmp_path / "bad.seq"
    bad.write_text("n 3 sink 0\n1 1\n")
    code, _, err = run(capsys, "simulate", "--algo", "waiting", "--seq", str(bad))
    assert code == 1 and "line 2" in err
    with pytest.raises(SystemExit) as info:
        main(["bench", "--algo", "gathering"])
    assert info.value.code == 1
    assert run(capsys, "adversary", "--family", "theorem1", "--out", str(tmp_path / "x"))[0] == 1


def test_adversary_files(capsys, tmp_path):
    out = tmp_path / "t1.seq"
    code, _, _ = run(capsys, "adversary", "--family", "theorem1", "--algo", "gathering",
                     "--horizon", "50", "--out", str(out))
    assert code == 0 and out.read_text().startswith("n 3 sink 0\n1 2\n")
    out2 = tmp_path / "t2.seq"
    run(capsys, "adversary", "--family", "theorem2", "--n", "4", "--l0", "0", "--d", "1",
        "--reps", "1", "--out", str(out2))
    assert out2.read_text() == "n 4 sink 0\n0 1\n2 3\n1 3\n"
    out3 = tmp_path / "r.seq"
    run(capsys, "adversary", "--family", "random", "--n", "5", "--horizon", "30", "--out", str(out3))
    assert len(out3.read_text().splitlines()) == 31


def test_bench_fit_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["bench", "--algo", "gathering", "--n", "6,8,10", "--trials", "50", "--seed", "3"]
    assert run(capsys, *args, "--out", str(a))[0] == 0
    assert run(capsys, *args, "--workers", "3", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    code, out, _ = run(capsys, "fit", "--in", str(a), "--model", "power")
    fit = json.loads(out)[0]
    assert code == 0 and fit["algo"] == "gathering" and 1.5 < fit["exponent"] < 2.5


def test_calibrate(capsys):
    code, out, _ = run(capsys, "calibrate", "--n", "16", "--trials", "60", "--c", "4")
    data = json.loads(out)
    assert code == 0 and data["chosen_c"] == 4.0


def test_module_entry_point(s3_file):
    proc = subprocess.run([sys.executable, "-m", "doda", "cost", "--algo", "gathering", "--seq", s3_file],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["cost"] == 1
