import csv
import json
import math
from pathlib import Path

import mpmath as mp
import numpy as np
import pytest

from stokes_atlas import cli

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def without_timestamp(text):
    return [ln for ln in text.splitlines() if not ln.lstrip().startswith('"timestamp"')]


@pytest.mark.parametrize("name,argv", [
    ("analyze_ode.json", ["analyze", "--mode", "ode", "--a", "0.1", "--b", "0.25,0.55"]),
    ("analyze_gkz.json", ["analyze", "--mode", "gkz", "--p", "1", "--q", "2", "--a", "0.1", "--b", "0.25,0.55,0.9"]),
])
def test_golden_reports(capsys, name, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert without_timestamp(out) == without_timestamp((GOLDEN / name).read_text())


def test_ode_report_contents(capsys):
    _, out, _ = run(capsys, "analyze", "--mode", "ode", "--a", "0.1", "--b", "0.25,0.55")
    rep = cli.loads(out)
    assert rep["stokes"]["constants"]["sigma"] == 1
    mats = rep["stokes"]["matrices"]
    assert set(mats) == {"S_0", "S_pi"}
    for m in mats.values():
        assert len(m) == 2 and all(len(row) == 2 and all(len(e) == 2 for e in row) for row in m)


def test_gkz_report_contents(capsys):
    _, out, _ = run(capsys, "analyze", "--mode", "gkz", "--p", "1", "--q", "2", "--a", "0.1", "--b", "0.25,0.55,0.9")
    rep = cli.loads(out)
    assert rep["gkz"]["sigma_eff"] == 2 and rep["gkz"]["rank"] == 3
    assert rep["regular"] is False


def test_regular_gkz_has_no_stokes_section(capsys):
    code, out, _ = run(capsys, "analyze", "--mode", "gkz", "--p", "3", "--q", "2",
                       "--a", "0.1,0.2,0.3", "--b", "0.25,0.55,0.7")
    rep = cli.loads(out)
    assert code == 0 and rep["regular"] is True and "stokes" not in rep


def test_round_trip(capsys):
    _, out, _ = run(capsys, "analyze", "--mode", "ode", "--a", "0.1+0.2i", "--b", "0.25,0.55-0.1i,0.8")
    rep = cli.loads(out)
    assert cli.loads(cli.dumps(rep)) == rep
    assert cli.dumps(cli.loads(cli.dumps(rep))) == cli.dumps(rep)


def test_float_format_round_trips():
    for v in [0.1, 1 / 3, -2.5e-300, 1e22, 123456789.123456789, 2.0]:
        assert float(cli.dumps(v)) == v


def test_parse_complex():
    assert cli.parse_complex("0.3-0.2i") == 0.3 - 0.2j
    assert cli.parse_complex("-1e-3+2i") == -1e-3 + 2j
    assert cli.parse_complex("i") == 1j
    assert cli.parse_complex("-2.5") == -2.5
    with pytest.raises(cli.UsageError):
        cli.parse_complex("abc")
    assert cli.parse_complex_list("") == []


def test_exit_codes(capsys):
    assert run(capsys, "analyze", "--a", "0.1", "--b", "1.1,0.55")[0] == 3
    assert run(capsys, "analyze", "--a", "0.1", "--b", "0.2,0.4,0.6", "--matrix", "S_pi")[0] == 4
    assert run(capsys, "analyze", "--a", "zz", "--b", "0.5")[0] == 2
    code, _, err = run(capsys, "eval", "--gamma-series", "--p", "1", "--q", "2", "--a", "0.1",
                       "--b", "0.25,0.55,0.9", "--i", "1", "--x", "0,1,1,1")
    assert code == 5 and "DomainError" in err
    with pytest.raises(SystemExit) as exc:
        cli.main(["analyze", "--mode", "bogus"])
    assert exc.value.code == 2


def test_verify_sigma4_exit0_with_advisory(capsys):
    code, out, _ = run(capsys, "verify", "--a", "0.1", "--b", "0.15,0.35,0.6,0.8,0.95")
    rep = cli.loads(out)
    assert code == 0
    assert all(s["advisory"] for s in rep["samples"])


def test_verify_genericity_exit(capsys):
    assert run(capsys, "verify", "--a", "0.1", "--b", "1.1,0.55")[0] == 3


def test_verify_is_deterministic(capsys):
    argv = ["verify", "--p", "1", "--q", "2", "--samples", "3", "--seed", "7"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert without_timestamp(a) == without_timestamp(b)


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_slice_sigma1_zero_angles(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "slice", "--p", "2", "--q", "2", "--a", "0.1,0.3", "--b", "0.25,0.55,0.9",
                     "--fixed-args", "0,0,0,0", "--out", str(out))
    rows = _read_csv(out)
    assert code == 0
    assert rows[0] == ["theta1_rad", "pair_label", "h1", "h2", "branch_sign", "n"]
    assert np.allclose(sorted(float(r[0]) for r in rows[1:]), [math.pi / 2, 3 * math.pi / 2])
    assert (tmp_path / "s_rotation.csv").exists()


def test_slice_sweep_rows_and_linearity(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    run(capsys, "slice", "--p", "1", "--q", "2", "--a", "0.1", "--b", "0.25,0.55,0.9",
        "--fixed-args", "0,0,0", "--sweep", "--pair", "0,0", "--out", str(out))
    rows = _read_csv(out)[1:]
    assert len(rows) == 720
    for sign in ("1", "-1"):
        pts = [(float(r[0]), float(r[1])) for r in rows if r[5] == sign and r[2] == "sps1_h0"]
        d = np.diff(np.unwrap([t for _, t in pts]))
        # theta_1 moves opposite to arg x_{p+1}, one grid step at a time
        assert np.allclose(d, -2 * math.pi / 360)


def test_slice_row_count_is_twice_pairs(capsys):
    code, out, _ = run(capsys, "slice", "--p", "1", "--q", "4", "--a", "0.1",
                       "--b", "0.2,0.35,0.5,0.65,0.8", "--fixed-args", "0.1,0.2,0.3,0.4,0.5")
    rows = list(csv.reader(out.splitlines()))[1:]
    n_pairs = 4 + 6  # I_4 has four elements: four (0,h) pairs and C(4,2) (h1,h2) pairs
    assert code == 0 and len(rows) == 2 * n_pairs


@pytest.mark.parametrize("a,b,x,exact", [
    ("", "1", "1", float(mp.besseli(0, 2))),  # 0F1(;1;1) = I_0(2)
    ("0.3+0.1i", "0.3+0.1i", "0.7", math.exp(0.7)),  # cancelling parameters
])
def test_eval_examples(capsys, a, b, x, exact):
    _, out, _ = run(capsys, "eval", "--fpq", "--a", a, "--b", b, "--x", x)
    rep = json.loads(out)
    assert abs(complex(*rep["value"]) - exact) <= rep["err_estimate"]
    _, out, _ = run(capsys, "eval", "--fpq", "--a", a, "--b", b, "--x", x, "--tol", "1e-16")
    assert abs(complex(*json.loads(out)["value"]) - exact) < 1e-14


def test_eval_gamma_series_shift(capsys):
    base = ["eval", "--gamma-series", "--p", "1", "--q", "2", "--a", "0.1", "--b", "0.25,0.55,0.9",
            "--i", "2", "--x", "0.7,0.8i,1.1,-0.6+0.2i"]
    _, a, _ = run(capsys, *base)
    _, b, _ = run(capsys, *base, "--shift", "3")
    va, vb = complex(*json.loads(a)["value"]), complex(*json.loads(b)["value"])
    assert abs(va - vb) < 1e-13 * abs(va)


def test_eval_lift(capsys):
    code, out, _ = run(capsys, "eval", "--lift", "--p", "1", "--q", "3", "--a", "0.1",
                       "--b", "0.25,0.55,0.9,0.7", "--i", "1", "--x", "0.7,0.8i,1.1,-0.6+0.2i,0.9")
    assert code == 0 and math.isfinite(json.loads(out)["value"][0])
