import csv
import io
import json
from importlib import resources

import jsonschema
import pytest

from holoflow.cli import RunConfig, UsageError, run

COMMANDS = {
    "infinity": ["--poly", "[[1,0],[0,0],[1,0]]"],
    "separatrix": ["--poly", "z2p1", "--eps", "1e-3"],
    "portrait": ["--poly", "z2p1", "--grid", "3x3"],
    "winding": ["--poly", "z2p1", "--z0", "0,0.5"],
    "ctime-probe": ["--t1", "0.1", "--t2", "0.03", "--grid", "3x3"],
    "xi-approx": ["--m", "4", "--grid", "3x5", "--path", "rect 0.5 0.5"],
    "report": ["--poly", "[[0,0],[-3,0],[0,0],[1,0]]"],
}


def schema(name):
    text = resources.files("holoflow").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


def invoke(args):
    out, err = io.StringIO(), io.StringIO()
    code = run(args, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.mark.parametrize("cmd", sorted(COMMANDS))
def test_subcommand_output_validates(workdir, cmd):
    code, out, err = invoke([cmd, *COMMANDS[cmd], "--out-prefix", "out/x"])
    assert code == 0, err
    doc = json.loads(out)
    jsonschema.validate(doc, schema(cmd), cls=jsonschema.Draft202012Validator)
    assert doc["files"]
    for f in doc["files"]:
        assert (workdir / f).is_file()
        if f.endswith(".json"):
            jsonschema.validate(json.loads((workdir / f).read_text()), schema(cmd),
                                cls=jsonschema.Draft202012Validator)


@pytest.mark.parametrize("cmd", sorted(COMMANDS))
def test_determinism(tmp_path, monkeypatch, cmd):
    blobs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        monkeypatch.chdir(d)
        code, out, _ = invoke([cmd, *COMMANDS[cmd], "--out-prefix", "res"])
        assert code == 0
        files = {p.name: p.read_bytes() for p in sorted(d.iterdir())}
        blobs.append((out, files))
    assert blobs[0] == blobs[1]


def test_infinity_content(workdir):
    _, out, _ = invoke(["infinity", "--poly", "[[1,0],[0,0],[1,0]]"])
    eqs = json.loads(out)["equilibria"]
    assert [e["p"] for e in eqs] == [[1.0, 0.0], [-1.0, 0.0]]
    assert [e["alpha"] for e in eqs] == [1.0, -1.0]
    assert all(e["kind"] == "saddle" for e in eqs)
    assert eqs[0]["seed_point"] == [1000.0, 0.0]


def test_separatrix_csv_is_real_axis(workdir):
    _, out, _ = invoke(["separatrix", "--poly", "z2p1", "--out-prefix", "s"])
    rows = list(csv.DictReader(open("s.separatrix.csv")))
    assert rows and set(rows[0]) == {"t", "re", "im", "tag"}
    assert max(abs(float(r["im"])) for r in rows) < 1e-6


def test_portrait_files(workdir):
    code, out, _ = invoke(["portrait", "--poly", "z2p1", "--grid", "2x2", "--out-prefix", "p"])
    assert code == 0
    svg = (workdir / "p.portrait.svg").read_text()
    assert svg.startswith("<svg") and 'class="separatrix"' in svg and 'class="orbit"' in svg
    assert (workdir / "p.trajectories.csv").read_text().startswith("t,re,im,tag\n")


def test_config_file_and_precedence(workdir):
    (workdir / "c.json").write_text(json.dumps({"system": "z2p1", "eps": 0.01, "out_prefix": "cfg"}))
    _, out, _ = invoke(["infinity", "--config", "c.json"])
    doc = json.loads(out)
    assert doc["equilibria"][0]["seed_point"] == [100.0, 0.0]
    assert doc["files"] == ["cfg.infinity.json"]
    _, out, _ = invoke(["infinity", "--config", "c.json", "--eps", "0.1"])
    assert json.loads(out)["equilibria"][0]["seed_point"] == pytest.approx([10.0, 0.0])


@pytest.mark.parametrize(
    "args",
    [
        ["bogus"],
        ["infinity", "--no-such-flag"],
        ["infinity", "--poly", "not json"],
        ["infinity", "--rtol", "-1"],
        ["infinity", "--escape-radius", "10"],
        ["infinity", "--poly", "cosh-shift"],
        ["infinity", "--poly", "[[1,0],[1,0]]"],
        ["portrait", "--grid", "0x3"],
        ["portrait", "--window=1,0,0,1"],
        ["winding", "--poly", "z2p1"],
        ["xi-approx", "--m", "3"],
        ["xi-approx", "--zeros", "/nonexistent/zeros.txt"],
        ["xi-approx", "--path", "spiral 2"],
        ["ctime-probe", "--t1", "-1"],
    ],
)
def test_usage_errors_exit_2(workdir, args):
    code, out, _ = invoke(args)
    assert code == 2
    assert out == ""


def test_unknown_config_key(workdir):
    (workdir / "c.json").write_text(json.dumps({"colour": "red"}))
    assert invoke(["infinity", "--config", "c.json"])[0] == 2


def test_bad_zero_file_is_usage_error(workdir):
    (workdir / "z.txt").write_text("14.1\n3.0\n")
    assert invoke(["xi-approx", "--zeros", "z.txt"])[0] == 2


def test_numerical_failure_exit_1(workdir):
    # the real axis of z^2+1 escapes, so there is no periodic orbit through 1
    code, out, _ = invoke(["winding", "--poly", "z2p1", "--z0", "1,0"])
    assert code == 1
    doc = json.loads(out)
    jsonschema.validate(doc, schema("error"), cls=jsonschema.Draft202012Validator)
    assert doc["error"] == "NumericalFailure"


def test_branch_point_failure_exit_1(workdir):
    code, out, _ = invoke(["xi-approx", "--m", "40", "--z0", "3,0", "--grid", "2x2"])
    assert code == 1
    assert json.loads(out)["error"] == "BranchPointHit"


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig(rtol=0)
    with pytest.raises(UsageError):
        RunConfig(escape_radius=1e3)
    assert RunConfig().integrator.rtol == 1e-10
