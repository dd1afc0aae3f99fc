import json

import pytest

from fivepoint.cli import main
from fivepoint.generators import circle_metric, equilateral_metric, line_metric, mixture_metric, star_metric


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, m in (("star", star_metric()), ("circle", circle_metric()), ("equilateral", equilateral_metric()),
                    ("line", line_metric()), ("mixture", mixture_metric()[0])):
        p = tmp_path / f"{name}.json"
        p.write_text(m.dumps())
        out[name] = str(p)
    return out


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_check_exit_codes(files, capsys, tmp_path):
    code, out = run(capsys, "check", files["star"])
    assert code == 1 and "center p" in out
    assert run(capsys, "check", files["circle"])[0] == 0
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "check", str(bad))[0] == 2
    assert run(capsys, "check", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "check", '{"labels": ["a", "b"], "d": [[0, 1], [2, 0]]}')[0] == 2


def test_check_json_and_tol(files, capsys):
    code, out = run(capsys, "check", files["star"], "--format", "json")
    obj = json.loads(out)
    assert code == 1 and obj["witness"]["center"] == "p"
    # a loose enough tolerance accepts the star
    assert run(capsys, "check", files["star"], "--tol", "1.0")[0] == 0


def test_tense(files, capsys):
    code, out = run(capsys, "tense", files["circle"])
    assert code == 0 and "triples (5)" in out and "Cyclic" in out
    code, out = run(capsys, "tense", files["equilateral"], "--format", "json")
    obj = json.loads(out)
    assert obj["triples"] == [] and obj["configuration"]["kind"] == "NoMatch"
    obj = json.loads(run(capsys, "tense", files["line"], "--format", "json")[1])
    assert obj["quads"] and obj["quints"]


def test_classify(capsys):
    code, out = run(capsys, "classify")
    assert code == 0 and out.startswith("16 configurations, 3 terminal")
    code, out = run(capsys, "classify", "--format", "json")
    obj = json.loads(out)
    assert obj["matches_fixture"] and len(obj["nodes"]) == 16 and len(obj["terminal_configurations"]) == 3
    code, dot = run(capsys, "classify", "--format", "dot")
    assert dot.startswith("digraph") and dot.count("[label=") >= 16


def test_embed_verify_round_trip(files, capsys, tmp_path):
    cert = tmp_path / "circle.cert.json"
    assert run(capsys, "embed", files["circle"], "--format", "json", "--output", str(cert))[0] == 0
    assert json.loads(cert.read_text())["kind"] == "Circle"
    code, out = run(capsys, "verify", files["circle"], str(cert))
    assert code == 0 and "PASS" in out
    # the same certificate does not fit another metric
    assert run(capsys, "verify", files["equilateral"], str(cert))[0] == 1


def test_embed_exit_codes(files, capsys):
    code, out = run(capsys, "embed", files["equilateral"])
    assert code == 0 and out.startswith("Euclidean")
    assert run(capsys, "embed", files["star"])[0] == 1
    code, out = run(capsys, "embed", files["mixture"])
    assert code == 3 and "not constructive" in out
    assert run(capsys, "embed", files["circle"], "--format", "dot")[0] == 2


def test_sample(capsys, tmp_path):
    out_dir = tmp_path / "spheres"
    assert run(capsys, "sample", "sphere", "--count", "10", "--seed", "1", "--output", str(out_dir))[0] == 0
    paths = sorted(out_dir.iterdir())
    assert len(paths) == 10
    for p in paths:
        assert run(capsys, "check", str(p))[0] == 0
    code, out = run(capsys, "sample", "circle", "--count", "0")
    assert code == 0 and out == ""
    assert run(capsys, "sample", "circle", "--param", "length=-1")[0] == 2
    assert run(capsys, "sample", "klein")[0] == 2
    code, out = run(capsys, "sample", "euclidean", "--count", "2", "--format", "text")
    assert code == 0 and len(out.splitlines()) == 2


def test_sampled_circle_round_trips(capsys, tmp_path):
    out_dir = tmp_path / "c"
    run(capsys, "sample", "circle", "--output", str(out_dir))
    (path,) = out_dir.iterdir()
    cert = tmp_path / "c.cert"
    assert run(capsys, "embed", str(path), "--format", "json", "-o", str(cert))[0] == 0
    assert run(capsys, "verify", str(path), str(cert))[0] == 0


def test_output_is_deterministic(files, capsys):
    a = run(capsys, "embed", files["circle"], "--format", "json")[1]
    b = run(capsys, "embed", files["circle"], "--format", "json")[1]
    assert a == b
    a = run(capsys, "sample", "doubled_polygon", "--count", "3", "--seed", "5", "--format", "json")[1]
    b = run(capsys, "sample", "doubled_polygon", "--count", "3", "--seed", "5", "--format", "json")[1]
    assert a == b and len(a.splitlines()) == 3
