import csv
import json
import math
import subprocess
import sys

import pytest

from cylend import __version__, cli
from cylend.config import OUTPUT_ENV


def run(capsys, *argv):
    code = cli.main(list(argv))
    status = json.loads(capsys.readouterr().out)
    assert status["exit_code"] == code
    return code, status


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    return tmp_path


def test_geometry(capsys, out):
    code, st = run(capsys, "geometry", "--set", f"output.dir={json.dumps(str(out))}", "--set", "alpha=0.5")
    assert code == 0 and st["status"] == "ok" and st["reason"] == "ok"
    doc = json.loads((out / "geometry.json").read_text())
    assert doc["version"] == __version__ and doc["command"] == "geometry"
    assert doc["config"]["alpha"] == 0.5


def test_certify_auto_alpha(capsys, out):
    code, _ = run(capsys, "certify", "--set", f"output.dir={json.dumps(str(out))}")
    assert code == 0
    doc = json.loads((out / "certificate.json").read_text())
    assert doc["certificate"]["holds"] is True
    assert doc["config"]["alpha"] > doc["alpha_star"]
    assert abs(doc["alpha_star"] - doc["alpha_star_closed_form"]) < 1e-10


def test_spectrum_certified_and_reproducible(capsys, out):
    args = ["spectrum", "--set", f"alpha={math.pi / 4 - 2e-4!r}", "--set", "mesh.h=0.06",
            "--set", "output.eigenvector_csv=true"]
    blobs = []
    d = out / "run"
    for _ in range(2):
        code, st = run(capsys, *args, "--set", f"output.dir={json.dumps(str(d))}")
        assert code == 0 and len(st["artifacts"]) == 2
        blobs.append(((d / "spectrum.json").read_bytes(), (d / "eigenvector.csv").read_bytes()))
    assert blobs[0] == blobs[1]
    doc = json.loads(blobs[0][0])
    assert doc["spectrum"]["primary"]["count_below_threshold"] >= 1
    assert isinstance(doc["config"]["end"]["L"], float)


def test_sweep(capsys, out):
    code, st = run(capsys, "sweep", "--set", f"output.dir={json.dumps(str(out))}")
    assert code == 0
    with open(out / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    ell = [float(r["ell"]) for r in rows]
    assert len(rows) == 6 and all(a > b for a, b in zip(ell, ell[1:]))
    svg = (out / "sweep.svg").read_text()
    assert svg.startswith("<?xml") and "</svg>" in svg


def test_mesh_with_profile(capsys, out):
    code, _ = run(capsys, "mesh", "--set", f"output.dir={json.dumps(str(out))}", "--set", "alpha=0.5",
                  "--set", "end.L=5", "--set", "mesh.h=0.1", "--set", "output.profile_csv=true")
    assert code == 0
    doc = json.loads((out / "mesh.json").read_text())
    assert doc["summary"]["euler_characteristic"] == -1
    with open(out / "profile.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["r", "F"] and float(rows[-1][1]) == pytest.approx((2 * math.pi) ** 2)


def test_env_output_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    code, st = run(capsys, "geometry", "--set", "alpha=0.5")
    assert code == 0 and (tmp_path / "env" / "geometry.json").exists()


def test_config_file(capsys, out):
    cfg = out / "run.json"
    cfg.write_text(json.dumps({"alpha": 0.4, "output": {"dir": str(out / "o")}}))
    code, _ = run(capsys, "geometry", "-c", str(cfg))
    assert code == 0
    assert json.loads((out / "o" / "geometry.json").read_text())["config"]["alpha"] == 0.4


@pytest.mark.parametrize(
    "argv,code,reason",
    [
        (["geometry", "--set", "alpha=0.9"], 2, "config"),
        (["mesh", "--set", "alpha=0.6", "--set", "alpha_prime=0.7", "--set", "end.L=5"], 2, "geometry"),
        (["spectrum", "--set", "mesh.h=-1"], 2, "config"),
        (["geometry", "--set", "colour=1"], 2, "config"),
        (["spectrum", "--set", "alpha=0.5", "--set", "end.L=5", "--set", "mesh.h=0.1", "--set", "solver.tol=1e-30"], 3, "solver"),
        (["geometry", "-c", "/nonexistent/run.json"], 2, "config"),
    ],
)
def test_error_exit_codes(capsys, out, argv, code, reason):
    got, st = run(capsys, *argv, "--set", f"output.dir={json.dumps(str(out))}")
    assert got == code and st["status"] == "error" and st["reason"] == reason


def test_usage_error(capsys):
    code, st = run(capsys, "frobnicate")
    assert code == 2 and st["reason"] == "usage"


def test_module_entry_point(tmp_path):
    p = subprocess.run([sys.executable, "-m", "cylend", "geometry", "--set", "alpha=0.5",
                        "--set", f"output.dir={json.dumps(str(tmp_path))}"], capture_output=True, text=True)
    assert p.returncode == 0
    assert json.loads(p.stdout)["status"] == "ok"
    v = subprocess.run([sys.executable, "-m", "cylend", "--version"], capture_output=True, text=True)
    assert __version__ in v.stdout
