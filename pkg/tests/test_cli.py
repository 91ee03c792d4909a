import json
import os

import pytest

from xideform import __version__
from xideform.cli import ZeroCacheEntry, cache_dir, main
from xideform.zerofind import Rect, ZeroRecord


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_jmap(capsys):
    code, out, _ = run(capsys, "eval", "--spec", "zeta", "--what", "jmap", "--t", "-1", "--s", "-0.25+40i")
    assert code == 0
    assert out.startswith("J_t(s) = (0.2127554796")


def test_eval_ft_first_term(capsys):
    code, out, _ = run(capsys, "eval", "--spec", "zeta", "--what", "ft", "--t", "-1", "--s", "10")
    assert code == 0
    value = float(out.split("=")[1].split("+")[0].strip(" ("))
    assert abs(value - 1) < 2e-3
    assert "err = " in out and "digits = 34" in out


def test_eval_both_routes(capsys):
    code, out, _ = run(capsys, "eval", "--what", "xit", "--t", "-1", "--s", "0.3+20i", "--route", "both",
                       "--digits", "20")
    assert code == 0
    assert "route = fourier" in out and "route = contour" in out
    assert out.rstrip().endswith("agree")


@pytest.mark.parametrize("what", ["F", "xiF", "gamma", "gammat"])
def test_eval_other_quantities(capsys, what):
    code, out, _ = run(capsys, "eval", "--spec", "chi4", "--what", what, "--t", "-1", "--s", "0.5+3i", "--digits", "20")
    assert code == 0 and "err = " in out


def test_eval_phi_psi_btn(capsys):
    assert run(capsys, "eval", "--what", "phi", "--u", "0.2", "--digits", "20")[0] == 0
    code, out, _ = run(capsys, "eval", "--what", "psi", "--v", "1", "--route", "both", "--digits", "20")
    assert code == 0 and "quadrature" in out and "closed form" in out
    assert run(capsys, "eval", "--what", "btn", "--t", "-1", "--n", "2", "--s", "-0.25+30i", "--digits", "20",
               "--target", "1e-8")[0] == 0


def test_usage_errors(capsys):
    assert run(capsys, "eval", "--what", "nope")[0] == 2
    assert run(capsys, "eval", "--what", "ft", "--s", "1+i")[0] == 2          # missing --t
    assert run(capsys, "eval", "--what", "ft", "--t", "-1", "--s", "abc")[0] == 2
    assert run(capsys, "eval", "--spec", "missing.json", "--what", "F", "--s", "2")[0] == 2
    assert run(capsys, "zeros", "--t", "-1", "--strip", "0:-1")[0] == 2


def test_numeric_error_exit(capsys):
    code, _, err = run(capsys, "eval", "--what", "F", "--s", "1")
    assert code == 3 and "PoleError" in err
    code, _, err = run(capsys, "eval", "--what", "xit", "--t", "-1", "--s", "0.5+200i", "--route", "fourier")
    assert code == 3 and "PrecisionError" in err


def test_zeros_deterministic_and_cached(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["zeros", "--spec", "zeta", "--t", "-1", "--strip", "-0.3:-0.2", "--ymin", "100", "--ymax", "120"]
    assert run(capsys, *args, "--out", str(a))[0] == 0
    entries = list(cache_dir().glob("zeros-*.json"))
    assert entries
    assert run(capsys, *args, "--out", str(b))[0] == 0            # served from the cache
    assert run(capsys, *args, "--out", str(tmp_path / "c"), "--no-cache")[0] == 0
    for name in ("zeros_ft.csv", "zeros_xit.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes() == (tmp_path / "c" / name).read_bytes()
    lines = (a / "zeros_ft.csv").read_text().splitlines()
    assert lines[0] == "re,im,residual,method" and len(lines) > 1


def test_stale_cache_ignored(capsys, tmp_path):
    args = ["zeros", "--t", "-1", "--strip", "-0.3:-0.2", "--ymin", "100", "--ymax", "105", "--kind", "ft"]
    assert run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
    (path,) = cache_dir().glob("zeros-*.json")
    data = json.loads(path.read_text())
    data["tool_version"] = "0.0.0"
    data["zeros"] = []
    path.write_text(json.dumps(data))
    assert run(capsys, *args, "--out", str(tmp_path / "b"))[0] == 0
    assert (tmp_path / "a" / "zeros_ft.csv").read_text() == (tmp_path / "b" / "zeros_ft.csv").read_text()


def test_zeros_large_t_series_only(capsys, tmp_path):
    code, out, _ = run(capsys, "zeros", "--spec", "chi4", "--t", "-30", "--strip", "-1:0", "--ymax", "100",
                       "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "zeros_ft.csv").exists() and not (tmp_path / "zeros_xit.csv").exists()


def test_failed_run_leaves_no_files(capsys, tmp_path):
    # F_t zeros succeed, then xi_t at |t| beyond the cap fails: nothing may be written
    code, _, err = run(capsys, "zeros", "--t", "-9", "--strip", "-0.3:-0.2", "--ymin", "20", "--ymax", "30",
                       "--kind", "both", "--out", str(tmp_path / "z"), "--no-cache")
    assert code == 3 and "DomainError" in err
    assert not (tmp_path / "z").exists() or not any((tmp_path / "z").iterdir())
    code, _, _ = run(capsys, "witness", "--spec", "zeta", "--t", "-9", "--out", str(tmp_path / "w"))
    assert code == 3
    assert not (tmp_path / "w").exists() or not any((tmp_path / "w").iterdir())


def test_cache_entry_round_trip():
    z = ZeroRecord(complex(-0.25, 100.5), 1e-12, 4, "newton", (0.1,), 1, True)
    e = ZeroCacheEntry("abc", -1.0, Rect(-0.3, -0.2, 0.0, 1.0), "F_t", (34, "1e-12"), [z], [], __version__)
    back = ZeroCacheEntry.from_json(json.loads(json.dumps(e.to_json())))
    assert back.zeros[0].center == z.center and back.region == e.region and back.t == e.t


def test_witness_json(capsys, tmp_path):
    code, out, _ = run(capsys, "witness", "--spec", "chi4", "--t", "-1", "--out", str(tmp_path))
    assert code == 0
    data = json.loads((tmp_path / "witness.json").read_text())
    assert data["off_line"] is True
    assert float(data["off_line_margin"]) >= float(data["xi_radius"])
    assert data["provenance"]["spec"] == "chi4"
    assert "off the critical line: yes" in out


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and __version__ in out
