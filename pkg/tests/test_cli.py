import json
import math

import pytest

from spiderweb.cli import main
from spiderweb.curves import level_curve, save_curve_csv
from spiderweb.entire_product import preset


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def cosh_file(tmp_path):
    path = tmp_path / "cosh.json"
    path.write_text(json.dumps(preset("cosh_sqrt").to_dict()))
    return str(path)


def test_eval(capsys, cosh_file):
    code, out, _ = run(capsys, "eval", "--function", cosh_file, "4", "1+2j", "lp:0.5,3.0")
    assert code == 0
    rows = out.strip().splitlines()
    assert rows[0].split("\t") == ["point", "log_mod", "arg"]
    assert float(rows[1].split("\t")[1]) == pytest.approx(1.32501, abs=1e-5)


def test_eval_errors(capsys, tmp_path, cosh_file):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "eval", "--function", str(bad), "1")[0] == 2
    assert run(capsys, "eval", "--function", cosh_file, "abc")[0] == 2
    a1 = (math.pi / 2) ** 2
    code, _, err = run(capsys, "eval", "--function", cosh_file, "--", repr(-a1))
    assert code == 3 and "zero" in err


def test_growth(capsys, cosh_file):
    code, out, _ = run(capsys, "growth", "--function", cosh_file, "--lo", "1", "--hi", "3", "--samples", "3")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "log_r,log_M,log_m" and lines[-1].startswith("# order_estimate=")
    for line in lines[1:4]:
        lr, lm, lmin = map(float, line.split(","))
        r = math.exp(lr)
        assert lm == pytest.approx(math.log(math.cosh(math.sqrt(r))), abs=1e-9)
        assert lmin == pytest.approx(math.log(abs(math.cos(math.sqrt(r)))), abs=1e-8)
    assert run(capsys, "growth", "--function", cosh_file, "--lo", "3", "--hi", "1")[0] == 2


def test_verify_theorem1(capsys, tmp_path):
    out = tmp_path / "o"
    code, _, _ = run(capsys, "verify", "theorem1", "--preset", "cosh_sqrt", "--out", str(out))
    assert code == 0
    rep = json.loads((out / "theorem1.json").read_text())
    assert rep["ok"] and rep["report"]["margin"] > 0
    assert "48*sqrt(2)/pi" in rep["constants"] and rep["inputs"]["a"] == 1.0
    code, _, _ = run(capsys, "verify", "theorem1", "--preset", "cosh_sqrt", "--log-t", "2", "--a", "0.5",
                     "--out", str(out))
    assert code == 2


def test_verify_theorem1_curve_file(capsys, tmp_path):
    f = preset("cosh_sqrt")
    save_curve_csv(level_curve(f, 2.9, 18.1, math.log(2.0), 200), tmp_path / "c.csv")
    code, _, _ = run(capsys, "verify", "theorem1", "--preset", "cosh_sqrt", "--curve", str(tmp_path / "c.csv"),
                     "--log-t", "3", "--a", "5", "--out", str(tmp_path))
    assert code == 0


def test_verify_lemma34(capsys, tmp_path):
    code, _, _ = run(capsys, "verify", "lemma34", "--preset", "cosh_sqrt", "--out", str(tmp_path))
    assert code == 0
    rows = (tmp_path / "lemma34.csv").read_text().strip().splitlines()
    assert len(rows) == 21


def test_verify_other(capsys, tmp_path):
    o = str(tmp_path)
    assert run(capsys, "verify", "theorem2", "--preset", "power:q=3", "--seed", "3", "--out", o)[0] == 0
    assert run(capsys, "verify", "poisson", "--preset", "cosh_sqrt", "--log-r", "2", "--log-r0", "3",
               "--out", o)[0] == 0
    assert run(capsys, "verify", "poisson", "--preset", "cosh_sqrt", "--log-r", "3", "--log-r0", "2",
               "--out", o)[0] == 2
    assert run(capsys, "verify", "milloux", "--preset", "cosh_sqrt", "--log-r", "4", "--log-r0", "5",
               "--log-t", "2", "--out", o)[0] == 0
    code, _, _ = run(capsys, "verify", "cascade", "--preset", "power:q=3", "--out", o)
    assert code == 0
    rep = json.loads((tmp_path / "cascade.json").read_text())
    assert [s["outcome"] for s in rep["report"]["steps"]][:3] == ["stretch"] * 3


def test_raster_deterministic(capsys, tmp_path):
    args = ["raster", "--preset", "power:q=3", "--resolution", "96", "96"]
    assert run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
    assert run(capsys, *args, "--out", str(tmp_path / "b"), "--threads", "3")[0] == 0
    for name in ("grid.pgm", "rings.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_bad_usage(capsys):
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "eval", "1")[0] == 2
