import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from elastic_plasmon import cli
from elastic_plasmon.cloaking import CalrReport
from elastic_plasmon.errors import SingularSystemError
from elastic_plasmon.kernels import LameParams


def _rows(path):
    text = path.read_text()
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return text, list(csv.reader(io.StringIO("\n".join(lines))))


def test_spectrum_rows(tmp_path):
    assert cli.main(["spectrum", "--out", str(tmp_path)]) == 0
    text, rows = _rows(tmp_path / "spectrum.csv")
    assert text.startswith("# version: ")
    assert rows[0] == ["family", "n", "xi", "e"]
    table = {(int(r[0]), int(r[1])): float(r[2]) for r in rows[1:]}
    assert len(table) == 30
    assert table[(1, 2)] == pytest.approx(0.3, abs=1e-15)
    assert table[(1, 1)] == pytest.approx(0.5, abs=1e-15)
    assert table[(2, 1)] == pytest.approx(0.5, abs=1e-15)


def test_set_override(tmp_path):
    assert cli.main(["spectrum", "--out", str(tmp_path), "--set", "n_max=3", "--set", "background.mu=2.0"]) == 0
    text, rows = _rows(tmp_path / "spectrum.csv")
    assert len(rows) == 10
    assert '"mu": 2.0' in text.splitlines()[1]


def test_config_file(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"n_max": 2}))
    assert cli.main(["spectrum", "--config", str(conf), "--out", str(tmp_path)]) == 0
    assert len(_rows(tmp_path / "spectrum.csv")[1]) == 7


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--set", "background.lambda=-5"],
        ["spectrum", "--set", "n_max=0"],
        ["spectrum", "--set", "nokey"],
        ["spectrum", "--config", "/nonexistent.json"],
        ["sweep", "--set", "deltas=[-1]"],
        ["sweep", "--set", "source={}"],
        ["verify", "--set", "suite=[\"bogus\"]"],
        ["spectrum", "--threads", "0"],
    ],
)
def test_bad_config_exits_1(argv, tmp_path):
    assert cli.main(argv + ["--out", str(tmp_path)]) == 1


def test_singular_exits_3(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise SingularSystemError("singular")

    monkeypatch.setattr(cli, "calr_verdict", boom)
    assert cli.main(["cloak", "--out", str(tmp_path)]) == 3


def test_verify_failure_exits_2(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "run_verify_suite", lambda *a, **k: [{"check": "x", "pass": False}])
    assert cli.main(["verify", "--out", str(tmp_path)]) == 2
    assert json.loads((tmp_path / "verify.json").read_text())["all_pass"] is False


def test_verify_split_passes(tmp_path):
    assert cli.main(["verify", "--out", str(tmp_path), "--set", 'suite=["split", "cloak"]']) == 0
    payload = json.loads((tmp_path / "verify.json").read_text())
    assert payload["all_pass"] is True and len(payload["reports"]) == 2


def test_sweep_deterministic_across_threads(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["sweep", "--out", str(a)]) == 0
    assert cli.main(["sweep", "--out", str(b), "--threads", "3"]) == 0
    for name in ("sweep.csv", "sweep.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    meta = json.loads((a / "sweep.json").read_text())
    assert meta["n_points"] == 7


def test_cloak_outputs(tmp_path):
    args = ["cloak", "--out", str(tmp_path), "--set", 'deltas={"start": 1e-2, "stop": 1e-5, "num": 4}', "--set", "source.n_max=30"]
    assert cli.main(args) == 0
    _, rows = _rows(tmp_path / "cloak.csv")
    assert len(rows) == 5
    payload = json.loads((tmp_path / "cloak.json").read_text())
    assert isinstance(payload["resonant"], bool)


def test_critical_catalog():
    bg = LameParams.background(2.0, 1.0)
    rows = cli.critical_catalog(bg, 4, 0.0, [1.0])
    c1 = {r["n"]: r["value"] for r in rows if r["branch"] == "C1"}
    assert c1[2] == pytest.approx(-4.0)
    assert min(c1) == 2
    assert {r["branch"] for r in rows} == {"C1", "C21", "C22", "C3"}


def test_critical_command(tmp_path):
    assert cli.main(["critical", "--out", str(tmp_path), "--set", "n_max=3"]) == 0
    _, rows = _rows(tmp_path / "critical.csv")
    assert rows[0] == ["branch", "n", "eps_other", "target", "value"]


def test_json_formatting():
    text = cli.dumps({"b": np.float64(0.1), "a": [1, True, np.bool_(False), 1 + 2j, float("nan")]})
    assert text == '{"a": [1, true, false, {"im": 2.0000000000000000e+00, "re": 1.0000000000000000e+00}, "nan"], "b": 1.0000000000000001e-01}\n'


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "elastic_plasmon", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == cli.__version__
