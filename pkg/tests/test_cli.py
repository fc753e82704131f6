import io
import json
import subprocess
import sys

import pytest

from cubecat.cli import emit_report, parse_object, run
from cubecat.errors import SchemaError
from cubecat.presheaf import boundary, dump_presheaf, representable
from cubecat.report import Report
from cubecat.site import SymmetricGroup, crossed_table, get_site


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_hom_count_example():
    code, out, _ = call("hom-count", "--site", "plain", "--src", "2", "--dst", "1", "--format", "text")
    assert (code, out.strip()) == (0, "4")
    code, out, _ = call("hom-count", "--site", "connections", "--src", "4", "--dst", "4")
    doc = json.loads(out)
    assert doc["count"] == doc["formula"] == 961


def test_verify_example():
    code, out, _ = call("verify", "--site", "connections", "--suite", "cube-axioms", "--max-degree", "3")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] is True and doc["suite"] == "cube-axioms" and doc["checks"] > 0


def test_homology_example():
    code, out, _ = call("homology", "--site", "plain", "--object", "boundary:2", "--top-dim", "1")
    assert code == 0
    assert [g["betti"] for g in json.loads(out)["homology"]] == [1, 1]


def test_homology_text():
    code, out, _ = call("homology", "--site", "plain", "--object", "boundary:3", "--top-dim", "2", "--format", "text")
    assert out.split("\n")[:3] == ["H0 = Z^1", "H1 = Z^0", "H2 = Z^1"]


def test_json_is_deterministic():
    a = call("realize", "--site", "plain", "--object", "tensor:rep:1:boundary:2", "--top-dim", "2")
    b = call("realize", "--site", "plain", "--object", "tensor:rep:1:boundary:2", "--top-dim", "2")
    assert a == b and a[0] == 0
    c = call("boundary", "2", "--site", "connections", "--compare")
    d = call("boundary", "2", "--site", "connections", "--compare")
    assert c == d and json.loads(c[1])["agrees_with_coequalizer"] is True


def test_object_grammar():
    site = get_site("plain")
    assert parse_object("2", 3, site).sizes() == representable(2, 3, site).sizes()
    assert parse_object("rep:1", 3, site).sizes() == [2, 3, 4, 5]
    assert parse_object("boundary:2", 3, site).sizes() == [4, 8, 12, 16]
    assert parse_object("cylinder:rep:0", 3, site).sizes() == [2, 3, 4, 5]
    assert parse_object("tensor:rep:1:rep:1", 3, site).sizes() == representable(2, 3, site).sizes()
    for bad in ("", "cone:1", "rep", "rep:x", "boundary:0", "rep:1:2"):
        with pytest.raises(SchemaError.__mro__[1]):
            parse_object(bad, 3, site)


def test_compose_and_normalize():
    face = {"src": 1, "dst": 1, "gamma": [0], "sigma": {"map": [0]}, "delta": [0], "xi": []}
    conn = {"src": 2, "dst": 1, "gamma": [0, 1], "sigma": {"map": [0, 0]}, "delta": [0], "xi": []}
    code, out, _ = call("compose", json.dumps(face), json.dumps(conn))
    doc = json.loads(out)
    assert code == 0 and doc["kind"] == "collapse" and doc["normal_form"]["sigma"]["map"] == [0, 0]
    span = {"src": 1, "dst": 2, "gamma": [0], "f": {"map": [0]}, "xi": [1]}
    code, out, _ = call("normalize", json.dumps(span), "--site", "plain")
    doc = json.loads(out)
    assert doc["kind"] == "face" and doc["normal_form"]["delta"] == [0] and doc["normal_form"]["xi"] == [1]


def test_compose_from_file(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"src": 0, "dst": 1, "gamma": [], "sigma": {"map": []}, "delta": [], "xi": [0]}))
    ident = json.dumps({"src": 1, "dst": 1, "gamma": [0], "sigma": {"map": [0]}, "delta": [0], "xi": []})
    code, out, _ = call("compose", ident, f"@{p}")
    assert code == 0 and json.loads(out)["normal_form"]["xi"] == [0]


def test_tensor_command():
    code, out, _ = call("tensor", "rep:1", "rep:1", "--site", "plain", "--max-degree", "2")
    doc = json.loads(out)
    assert code == 0 and doc["sizes"] == [4, 8, 13]


def test_presheaf_check(tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(dump_presheaf(boundary(2, 2, "plain")[0])))
    code, out, _ = call("presheaf-check", str(good))
    doc = json.loads(out)
    assert code == 0 and doc["valid"] and doc["sizes"] == [4, 8, 12] and doc["dim"] == 1

    bad_doc = json.loads(good.read_text())
    for a in bad_doc["action"]:
        if (a["morphism"]["src"], a["morphism"]["dst"]) == (0, 1):
            k = sorted(a["map"])[0]
            a["map"][k] = next(v for v in sorted(set(a["map"].values())) if v != a["map"][k])
            break
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(bad_doc))
    code, out, _ = call("presheaf-check", str(bad))
    doc = json.loads(out)
    assert code == 1 and doc["valid"] is False and len(doc["pair"]) == 2
    assert all("sigma" in m for m in doc["pair"] if m is not None)

    junk = tmp_path / "junk.json"
    junk.write_text('{"site": "plain"}')
    code, _, err = call("presheaf-check", str(junk))
    assert code == 2 and "error" in err


def test_file_object(tmp_path):
    p = tmp_path / "b.json"
    p.write_text(json.dumps(dump_presheaf(boundary(2, 3, "plain")[0])))
    code, out, _ = call("homology", "--site", "plain", "--object", f"file:{p}", "--top-dim", "1")
    assert [g["betti"] for g in json.loads(out)["homology"]] == [1, 1]


def test_usage_errors():
    assert call("frobnicate")[0] == 2
    assert call("hom-count", "--src", "1")[0] == 2
    assert call("hom-count", "--src", "-1", "--dst", "1")[0] == 2
    assert call("homology", "--object", "cone:2")[0] == 2
    assert call("hom-count", "--site", "cubes", "--src", "1", "--dst", "1")[0] == 2
    assert call("homology", "--object", "rep:4", "--max-degree", "3")[0] == 2


def test_crossed_table_flag(tmp_path):
    doc = crossed_table(SymmetricGroup(), 2)
    good = tmp_path / "s.json"
    good.write_text(json.dumps(doc))
    code, out, _ = call("verify", "--crossed-table", str(good), "--suite", "site-axioms")
    assert code == 0 and json.loads(out)["passed"]
    doc["action"]["1,2"][1][0] = doc["action"]["1,2"][0][0]
    bad = tmp_path / "b.json"
    bad.write_text(json.dumps(doc))
    code, out, _ = call("verify", "--crossed-table", str(bad), "--suite", "site-axioms")
    rep = json.loads(out)
    assert code == 1 and not rep["passed"]
    assert any("witness" in r for r in rep["results"] if not r["passed"])
    code, out, _ = call("verify", "--crossed-table", str(bad), "--suite", "cube-axioms")
    assert code == 1


def test_default_degrees():
    _, out, _ = call("verify", "--site", "plain", "--suite", "site-axioms")
    assert json.loads(out)["max_degree"] == 3
    _, out, _ = call("verify", "--site", "symmetric", "--suite", "site-axioms")
    assert json.loads(out)["max_degree"] == 2


def test_emit_report_shapes():
    rep = Report("demo", "plain", 1)
    rep.check("x").record(True)
    assert json.loads(emit_report(rep)) == {
        "suite": "demo",
        "site": "plain",
        "max_degree": 1,
        "passed": True,
        "checks": 1,
        "results": [{"name": "x", "passed": True, "checks": 1, "failures": 0}],
    }
    rep.check("y").record(False, ["g", "f"])
    assert "witness ['g', 'f']" in emit_report(rep, "text")


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "cubecat.cli", "hom-count", "--site", "plain", "--src", "2", "--dst", "1", "--format", "text"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0 and res.stdout.strip() == "4"
