import csv
import json
import math

import numpy as np
import pytest

from prescribed_spectrum import cli
from prescribed_spectrum.operator_assembly import Schedule
from prescribed_spectrum.truncated_spectrum import read_spectrum_csv

PI2 = math.pi ** 2


def write_target(path, points=(), intervals=(), includes_zero=True, **extra):
    raw = {"includes_zero": includes_zero, "points": list(points),
           "intervals": [list(iv) for iv in intervals], "lambda_max": 10.0, **extra}
    path.write_text(json.dumps(raw))
    return str(path)


def error_of(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


@pytest.fixture
def designed(tmp_path):
    target = write_target(tmp_path / "s.json", [1.0])
    out = tmp_path / "sched.json"
    assert cli.main(["design", "--target", target, "--cells", "24", "--out", str(out)]) == 0
    return tmp_path, target, str(out)


def test_design_round_trip(designed):
    _, _, out = designed
    sched = Schedule.loads(open(out).read())
    sched.check_positions()
    assert len(sched.cells) == 24


def test_design_without_zero(tmp_path, capsys):
    target = write_target(tmp_path / "s.json", [2.0], includes_zero=False)
    code = cli.main(["design", "--target", target, "--cells", "4", "--out", str(tmp_path / "o")])
    assert code == 2
    assert error_of(capsys)["error"] == "ZeroNotIncluded"
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize("bad", [dict(extra=1), dict(points=[-1.0])])
def test_design_malformed(tmp_path, capsys, bad):
    target = write_target(tmp_path / "s.json", **bad)
    code = cli.main(["design", "--target", target, "--cells", "4", "--out", str(tmp_path / "o")])
    assert code == 3
    assert error_of(capsys)["exit_code"] == 3


def test_design_not_json(tmp_path):
    (tmp_path / "s.json").write_text("{not json")
    assert cli.main(["design", "--target", str(tmp_path / "s.json"), "--cells", "4",
                     "--out", str(tmp_path / "o")]) == 3


@pytest.mark.parametrize("argv", [
    ["design", "--target", "x.json", "--cells", "0", "--out", "o.json"],
    ["design", "--cells", "3"],
    ["no-such-command"],
    ["spectrum", "--schedule", "x", "--truncate", "two", "--lambda-max", "1", "--out", "o"],
])
def test_usage_errors(tmp_path, capsys, argv):
    assert cli.main(argv) == 4
    assert error_of(capsys)["exit_code"] == 4


def test_spectrum_single_neumann_cell(tmp_path):
    sched = tmp_path / "one.json"
    sched.write_text(Schedule.from_cells([1.0], [0.0], []).dumps())
    out = tmp_path / "sp.csv"
    assert cli.main(["spectrum", "--schedule", str(sched), "--truncate", "1",
                     "--lambda-max", "50", "--out", str(out)]) == 0
    assert np.allclose(read_spectrum_csv(out.read_text()), [0.0, PI2, 4 * PI2], atol=1e-10)


def test_spectrum_with_oracle(tmp_path, capsys):
    rng = np.random.default_rng(8)
    sched = tmp_path / "three.json"
    sched.write_text(Schedule.from_cells(list(rng.uniform(0.4, 1.0, 3)),
                                         list(rng.uniform(0.0, 1.0, 3)),
                                         list(rng.uniform(1.0, 10.0, 2))).dumps())
    out = tmp_path / "sp.csv"
    assert cli.main(["spectrum", "--schedule", str(sched), "--truncate", "3",
                     "--lambda-max", "60", "--out", str(out), "--oracle"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["max_deviation"] <= 1e-6
    rows = list(csv.DictReader(ln for ln in out.read_text().splitlines() if not ln.startswith("#")))
    assert {"method", "fd_lambda", "deviation"} <= set(rows[0])


def test_spectrum_empty_window(tmp_path, designed):
    _, _, sched = designed
    out = tmp_path / "e.csv"
    assert cli.main(["spectrum", "--schedule", sched, "--truncate", "5",
                     "--lambda-max", "0", "--out", str(out)]) == 0
    assert out.read_text() == "index,lambda,bracket_lo,bracket_hi,method\n"


def test_spectrum_values_round_trip(tmp_path, designed):
    _, _, sched = designed
    out = tmp_path / "sp.csv"
    cli.main(["spectrum", "--schedule", sched, "--truncate", "6", "--lambda-max", "5",
              "--out", str(out)])
    for row in csv.DictReader(out.read_text().splitlines()):
        assert repr(float(row["lambda"])) == repr(float(f"{float(row['lambda']):.17g}"))


def run_verify(tmp_path, sched, target, *extra):
    out = tmp_path / "report.json"
    code = cli.main(["verify", "--schedule", sched, "--target", target, "--truncate", "24",
                     "--lambda-max", "5", "--threshold", "0.05", "--skip-head", "8",
                     "--out", str(out), *extra])
    return code, json.loads(out.read_text())


def test_verify_pass(designed):
    tmp_path, target, sched = designed
    code, report = run_verify(tmp_path, sched, target)
    assert code == 0 and report["passed"]


def test_verify_wrong_set(designed):
    tmp_path, _, sched = designed
    wrong = write_target(tmp_path / "w.json", [2.0])
    code, report = run_verify(tmp_path, sched, wrong)
    assert code == 6 and not report["passed"]


def test_verify_decoupled_is_exact(designed):
    tmp_path, target, sched = designed
    code, report = run_verify(tmp_path, sched, target, "--decouple")
    assert code == 0
    assert max(report["distances"]) <= 1e-10


def test_tune_chain_command(tmp_path):
    out = tmp_path / "tc.json"
    assert cli.main(["tune-chain", "--targets", "1,2,3", "--coupling", "1000",
                     "--tol", "1e-8", "--out", str(out)]) == 0
    sched = Schedule.loads(out.read_text())
    assert np.allclose(sched.meta["eigenvalues"][3:6], [1, 2, 3], atol=1e-8)


def test_extension_command_is_deterministic(tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        assert cli.main(["extension", "--n", "40", "--m", "16", "--xi-clusters", "1,4",
                         "--mu", "0.5", "--seed", "3", "--out", str(out)]) == 0
        outs.append(out.read_text())
    assert outs[0] == outs[1]
    report = json.loads(outs[0])
    assert report["defects"]["weyl"] <= 1e-11
    assert len(report["clustering"]["rows"]) == 4


def test_rp_norms_command(tmp_path):
    out = tmp_path / "rp.csv"
    assert cli.main(["rp-norms", "--k-max", "200", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert list(rows[0]) == ["k", "l2_sq", "grad_sq", "ratio"]
    assert int(rows[-1]["k"]) == 200 and float(rows[-1]["ratio"]) >= 0.999


def test_help_exits_cleanly(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["verify", "--help"])
    assert info.value.code == 0
    assert "--skip-head" in capsys.readouterr().out


def test_atomic_write_leaves_no_temp(tmp_path):
    cli.write_atomic(str(tmp_path / "f.txt"), "hello")
    assert [p.name for p in tmp_path.iterdir()] == ["f.txt"]
