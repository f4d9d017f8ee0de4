import json

import pytest

from defectlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out.strip(), err.strip()


def test_ext(capsys):
    assert run(capsys, "ext", "Z/4", "Z/6") == (0, "Z/2", "")
    code, out, _ = run(capsys, "--json", "ext", "Z^2 + Z/3", "Z/9")
    assert code == 0 and json.loads(out) == {"group": "Z/3"}


def test_residue(capsys):
    assert run(capsys, "residue", "--fixture", "ice-pole") == (0, "8", "")
    code, out, _ = run(capsys, "residue", "--fixture", "paths-three-defects", "--json")
    vals = sorted(tuple(r["value"]["t"]) for r in json.loads(out)["residues"])
    assert vals == [(0, 1), (1, 0), (1, 1)]


@pytest.mark.parametrize("name", ["paths", "ice", "dominoes", "ice-cubes-3d"])
def test_check_cocycle(capsys, name):
    assert run(capsys, "check-cocycle", "--fixture", name)[:2] == (0, "ok")


def test_fixture_list_and_emit(capsys, tmp_path):
    code, out, _ = run(capsys, "fixtures", "list")
    assert code == 0 and "ice-pole" in out
    path = tmp_path / "ice.json"
    assert run(capsys, "fixtures", "emit", "ice-pole", "-o", str(path))[0] == 0
    assert run(capsys, "residue", "--project", str(path)) == (0, "8", "")
    code, out, _ = run(capsys, "fixtures", "emit", "paths")
    assert len(json.loads(out)["tiles"]["tiles"]) == 21


def test_homology(capsys):
    code, out, _ = run(capsys, "homology", "--fixture", "ice", "--kind", "conway-lagarias")
    assert (code, out) == (0, "Z")
    code, out, _ = run(capsys, "homology", "--fixture", "ice")
    assert out.splitlines() == ["0: Z", "1: Z^3", "2: Z^5"]
    code, out, _ = run(capsys, "homology", "--fixture", "golden-mean", "--kind", "invariant", "--radius", "1",
                       "--coeff", "Z/2", "--degree", "1")
    assert out == "1: Z/2 + Z/2 + Z/2"


def test_tilt_and_analyze(capsys):
    assert run(capsys, "tilt", "--fixture", "ice-gap")[:2] == (0, "diverging(window-limited)")
    code, out, _ = run(capsys, "--json", "analyze", "--fixture", "ice-pole")
    doc = json.loads(out)
    assert doc["classification"]["kind"] == "codimension-2" and "#" in doc["map"]


def test_evolve_and_cohomologous(capsys):
    code, out, _ = run(capsys, "--json", "evolve", "--fixture", "ice-pole", "--ca", "shift:1,0", "--steps", "2")
    doc = json.loads(out)
    assert code == 0 and doc["residues_constant"] and doc["identities_ok"]
    code, out, _ = run(capsys, "cohomologous", "--fixture", "ice", "--other", "shift:1,0", "--max-radius", "1")
    assert code == 0 and out.startswith(("cohomologous", "not found"))


def test_deterministic_output(capsys):
    a = run(capsys, "--json", "tilt", "--fixture", "paths-boundary", "--seed", "3")
    b = run(capsys, "--json", "tilt", "--fixture", "paths-boundary", "--seed", "3")
    assert a == b


@pytest.mark.parametrize(
    "argv",
    [
        ("residue", "--fixture", "nope"),
        ("ext", "Q", "Z"),
        ("residue", "--fixture", "ice-cubes-pole"),
        ("evolve", "--fixture", "ice-pole", "--ca", "shift:1"),
        ("residue",),
    ],
)
def test_errors_exit_2_with_json(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert set(json.loads(err)) == {"error", "message"}


def test_thread_cap_is_validated(capsys, monkeypatch):
    monkeypatch.setenv("DEFECTLAB_THREADS", "x")
    assert run(capsys, "homology", "--fixture", "ice")[0] == 2
    monkeypatch.setenv("DEFECTLAB_THREADS", "4")
    assert run(capsys, "homology", "--fixture", "ice")[0] == 0
