from __future__ import annotations

import numpy as np
import pytest

from dcmc.cli import main
from dcmc.geometry import read_obj
from dcmc.io import read_trailer

CYL = """
r1 = 0.5
r2 = 0.5
window.m0 = -5
window.m1 = 4
window.n0 = -5
window.n1 = 4
"""

DRESS = """
r1 = 0.5
r2 = 0.3
window.m0 = -8
window.m1 = 7
window.n0 = -8
window.n1 = 7
seed.kind = rng
seed.rng = 3
"""


@pytest.fixture()
def cfg(tmp_path):
    def write(text, name="run.cfg"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write


def run(*args):
    return main([*args, "--quiet"])


def test_cylinder(cfg, tmp_path):
    out = tmp_path / "out"
    assert run("cylinder", "--config", cfg(CYL), "--out", str(out)) == 0
    v, f = read_obj(out / "dcmc.obj")
    assert v.shape == (100, 3) and len(f) == 81
    rep = read_trailer(out / "dcmc_cylinder_report.txt")
    assert rep["passed"] and max(rep["integrability"].values()) < 1e-10
    rows = [line.split(",") for line in (out / "dcmc_metric.csv").read_text().splitlines()[1:]]
    lu = [float(r[2]) for r in rows if r[2]]
    assert max(lu) - min(lu) < 1e-10


def test_identity_dress_matches_cylinder(cfg, tmp_path):
    assert run("cylinder", "--config", cfg(CYL), "--out", str(tmp_path / "a")) == 0
    assert run("dress", "--config", cfg(CYL), "--out", str(tmp_path / "b")) == 0
    assert (tmp_path / "a" / "dcmc.obj").read_bytes() == (tmp_path / "b" / "dcmc.obj").read_bytes()


def test_dress_deterministic(cfg, tmp_path):
    c = cfg(DRESS)
    for d in ("a", "b"):
        assert run("dress", "--config", c, "--out", str(tmp_path / d)) == 0
    for name in ("dcmc.obj", "dcmc_dress_report.txt", "dcmc_metric.csv", "dcmc_lattice.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rep = read_trailer(tmp_path / "a" / "dcmc_dress_report.txt")
    assert rep["passed"] and "seed=3" in rep["seed"]
    assert max(v for k, v in rep["integrability"].items()) < 1e-7


def test_seed_flag_overrides(cfg, tmp_path):
    assert run("dress", "--config", cfg(DRESS), "--out", str(tmp_path / "a"), "--seed", "11") == 0
    rep = read_trailer(tmp_path / "a" / "dcmc_dress_report.txt")
    assert "seed=11" in rep["seed"]


def test_verify(cfg, tmp_path):
    out = str(tmp_path / "v")
    assert run("cylinder", "--config", cfg(CYL), "--out", out) == 0
    lat = str(tmp_path / "v" / "dcmc_lattice.json")
    assert run("verify", "--lattice", lat, "--out", out, "--shift", "1:0", "--shift", "0:1", "--shift", "2:3") == 0
    certs = read_trailer(tmp_path / "v" / "dcmc_verify_report.txt")["certificates"]
    assert all(c["accepted"] and abs(c["phase"]) < 1e-9 for c in certs)


def test_verify_dressed_rejects(cfg, tmp_path):
    out = str(tmp_path / "d")
    assert run("dress", "--config", cfg(DRESS), "--out", out) == 0
    lat = str(tmp_path / "d" / "dcmc_lattice.json")
    assert run("verify", "--lattice", lat, "--out", out, "--shift", "1:1") == 0
    (cert,) = read_trailer(tmp_path / "d" / "dcmc_verify_report.txt")["certificates"]
    assert not cert["accepted"] and cert["stage"] == "metric"


def test_verify_errors(cfg, tmp_path):
    assert run("verify", "--lattice", str(tmp_path / "nope.json"), "--shift", "1:0") == 3
    assert run("verify", "--lattice", str(tmp_path / "nope.json"), "--shift", "0:0") == 1
    assert run("verify", "--lattice", str(tmp_path / "nope.json")) == 1


def test_export(cfg, tmp_path):
    out = str(tmp_path / "e")
    assert run("cylinder", "--config", cfg(CYL), "--out", out) == 0
    assert run("export", "--lattice", str(tmp_path / "e" / "dcmc_lattice.json"), "--out", str(tmp_path / "x")) == 0
    assert (tmp_path / "x" / "dcmc.obj").read_bytes() == (tmp_path / "e" / "dcmc.obj").read_bytes()
    lax = (tmp_path / "x" / "dcmc_lax.csv").read_text().splitlines()
    assert lax[0].startswith("m,n,p,q") and len(lax) == 101


def test_spectral_cylinder(cfg, tmp_path):
    c = cfg("spectral.k = 2\nspectral.l = 0\nr1 = 0.5\n")
    assert run("spectral", "--config", c, "--out", str(tmp_path)) == 0
    rep = read_trailer(tmp_path / "dcmc_spectral_report.txt")
    res = {r["label"]: r for r in rep["residues"]}
    assert abs(res["lambda_+"]["value"][0] - 1) < 1e-6 and abs(res["-lambda_+"]["value"][0] + 1) < 1e-6
    assert rep["necessary"]["passed"] and rep["sufficient"]["passed"]


def test_spectral_genus1(cfg, tmp_path):
    c = cfg("spectral.k = 2\nspectral.l = 2\nspectral.a2.num = -0.2, 0.5, -0.2\nspectral.a2.den = 0, 1\nspectral.a2.var = nu\n")
    assert run("spectral", "--config", c, "--out", str(tmp_path)) == 0
    text = (tmp_path / "dcmc_spectral_report.txt").read_text()
    curve = text.split("== curve ==")[1].split("==")[0]
    assert "branch pair 1: (0.5+0j, 2+0j)" in curve
    rep = read_trailer(text)
    assert rep["curve"]["genus"] == 1 and abs(rep["a_cycles"][0]["value"][0]) < 1e-6


def test_spectral_odd_k(cfg, capsys):
    assert main(["spectral", "--config", cfg("\nspectral.k = 3\n")]) == 1
    assert "run.cfg:2:" in capsys.readouterr().err


def test_bad_config_line(cfg, capsys):
    assert main(["cylinder", "--config", cfg("r1 = 0.5\nN = many\n")]) == 1
    assert "run.cfg:2:" in capsys.readouterr().err


def test_missing_config_is_io_error(tmp_path):
    assert run("cylinder", "--config", str(tmp_path / "none.cfg")) == 3


def test_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--shift", "1-0"])
    assert exc.value.code == 1


def test_unwritable_output(cfg, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run("cylinder", "--config", cfg(CYL), "--out", str(blocker / "sub")) == 3
