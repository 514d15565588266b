import json
import subprocess
import sys

import pytest

from chasm.cli import main


@pytest.fixture
def formula(tmp_path):
    path = tmp_path / "f.ac"
    assert main(["gen", "--family", "random-homogeneous-formula", "--d", "12", "--s", "80",
                 "--seed", "3", "-o", str(path)]) == 0
    return path


def test_gen_writes_metadata(formula):
    meta = json.loads(formula.with_name("f.gen.json").read_text())
    assert meta["degree"] == 12 and meta["violations"] == []


def test_depth4_hom(formula):
    assert main(["depth4", "--t", "4", "--pass", "hom", str(formula)]) == 0
    report = json.loads(formula.with_name("f.report.json").read_text())
    assert report["max_bottom_degree"] <= 4
    assert report["audit"]["pit_equal"] is True
    assert formula.with_name("f.d4").exists()


@pytest.mark.parametrize("name", ["general", "hom-alt"])
def test_depth4_other_passes(formula, name):
    assert main(["depth4", "--t", "3", "--pass", name, str(formula)]) == 0


def test_depth4_shallow(tmp_path):
    path = tmp_path / "s.ac"
    assert main(["gen", "--family", "shallow", "--delta", "2", "--d", "16", "-o", str(path)]) == 0
    assert main(["depth4", "--t", "4", "--pass", "shallow", str(path)]) == 0


def test_depth4_rejects_t0(formula, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["depth4", "--t", "0", str(formula)])
    assert exc.value.code == 2
    assert "--t" in capsys.readouterr().err


def test_verify_self(formula, capsys):
    assert main(["verify", str(formula), "--against", str(formula)]) == 0
    assert json.loads(capsys.readouterr().out)["equal"] is True


def test_verify_against_depth4(formula, capsys):
    main(["depth4", "--t", "4", str(formula)])
    capsys.readouterr()
    assert main(["verify", str(formula), "--against", str(formula.with_name("f.d4"))]) == 0


def test_verify_detects_difference(tmp_path, formula, capsys):
    other = tmp_path / "g.ac"
    main(["gen", "--family", "random-homogeneous-formula", "--d", "12", "--s", "80",
          "--seed", "4", "-o", str(other)])
    capsys.readouterr()
    assert main(["verify", str(formula), "--against", str(other)]) == 1
    assert "witness" in json.loads(capsys.readouterr().out)


def test_vsbr_and_report(formula, capsys):
    assert main(["vsbr", str(formula)]) == 0
    vrep = formula.with_name("f.vsbr.report.json")
    assert json.loads(vrep.read_text())["pit_equal"]
    main(["depth4", "--t", "4", str(formula)])
    capsys.readouterr()
    assert main(["report", "--json", str(vrep), str(formula.with_name("f.report.json"))]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["violations"] for r in rows] == [0, 0]


def test_homogenize(tmp_path):
    path = tmp_path / "c.ac"
    path.write_text("circuit c p=101 nvars=2\ngate g0 = var 0\ngate g1 = var 1\n"
                    "gate g2 = mul g0 g1\ngate g3 = add g2 g0\noutput g3\n")
    assert main(["homogenize", str(path)]) == 0
    assert json.loads((tmp_path / "c.hom.report.json").read_text())["pit_equal"]


def test_rank_cert(tmp_path):
    path = tmp_path / "m.ac"
    assert main(["gen", "--family", "imm", "--n", "2", "--d", "4", "-o", str(path)]) == 0
    assert main(["tensor", "rank-cert", "--c", "4", str(path)]) == 0
    cert = json.loads((tmp_path / "m.cert.json").read_text())
    assert cert["exact"] and cert["within_bound"]
    assert (tmp_path / "m.rank").read_text().startswith("rank")


def test_brute_rank(tmp_path, capsys):
    path = tmp_path / "w.tensor"
    path.write_text("tensor p=2 shape=2x2x2\n0 0 1 1\n0 1 0 1\n1 0 0 1\n")
    assert main(["tensor", "brute-rank", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["rank"] == 3


def test_missing_file_exit_1(tmp_path, capsys):
    assert main(["vsbr", str(tmp_path / "nope.ac")]) == 1
    assert "chasm: error" in capsys.readouterr().err


def test_module_entry_point(formula):
    out = subprocess.run([sys.executable, "-m", "chasm.cli", "verify", str(formula),
                          "--against", str(formula)], capture_output=True, text=True)
    assert out.returncode == 0
