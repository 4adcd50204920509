import dataclasses
import io
import json

import pytest

from robinson import cli
from robinson.catalog import get_entry
from robinson.expr import Chart
from robinson.geometry import CoframeField, coframe_to_manifest


def run(*argv):
    buf = io.StringIO()
    code = cli.main(list(argv), out=buf)
    return code, buf.getvalue()


def test_classify_catalog_entry_text_and_json(tmp_path):
    code, text = run("classify", "catalog:kerr-nut-ads-6", "--seed", "7")
    assert code == 0
    assert "seed=7" in text and "classes:" in text
    path = tmp_path / "r.json"
    code, _ = run("classify", "catalog:kerr-nut-ads-6", "--seed", "7", "--json", str(path))
    d = json.loads(path.read_text())
    assert d["header"]["seed"] == 7 and d["header"]["samples"] == 8
    assert d["classes"]["G_0^{1,1}"]["member"] is True
    assert set(d) >= {"components", "classes", "families", "flags", "invariance", "warnings"}


def test_json_output_is_byte_stable():
    _, a = run("classify", "catalog:cahen-wallach-6", "--json", "-")
    _, b = run("classify", "catalog:cahen-wallach-6", "--json", "-")
    assert a == b
    json.loads(a)


def test_classify_manifest_file(tmp_path):
    p = tmp_path / "m.toml"
    p.write_text(coframe_to_manifest(get_entry("minkowski-6").coframe))
    code, text = run("classify", str(p))
    assert code == 0 and "torsion_free" in text


def test_validation_errors_exit_2(tmp_path, capsys):
    assert run("classify", "catalog:nope")[0] == 2
    assert run("classify", "catalog:minkowski-4", "--samples", "2")[0] == 2
    assert run("classify", "catalog:minkowski-4", "--tol", "0.5")[0] == 2
    assert run("transform", "catalog:minkowski-4")[0] == 2
    assert run("transform", "catalog:minkowski-4", "--alpha", "0,0")[0] == 2
    assert run("bogus")[0] == 2


def test_malformed_manifest_reports_line_and_column(tmp_path, capsys):
    text = coframe_to_manifest(get_entry("minkowski-4").coframe)
    p = tmp_path / "bad.toml"
    p.write_text(text.replace('kappa = ["1"', 'kappa = ["1+*u"', 1))
    code, _ = run("classify", str(p))
    err = capsys.readouterr().err
    assert code == 2
    assert "line" in err and "column" in err


def test_singular_coframe_exits_3(tmp_path, capsys):
    ch = Chart.build([("u", -1, 1), ("x", -1, 1), ("y", -1, 1), ("v", -1, 1)])
    cf = CoframeField.from_strings(ch, ["1", "0", "0", "0"], ["1", "0", "0", "0"], [["0", "1", "i", "0"]])
    p = tmp_path / "sing.toml"
    p.write_text(coframe_to_manifest(cf))
    assert run("classify", str(p))[0] == 3
    assert run("verify", str(p))[0] == 3


def test_verify_passes_on_catalog_entry():
    code, text = run("verify", "catalog:kundt-generic-6")
    assert code == 0
    assert "quadratic identity" in text


def test_transform_conformal_and_tier_violation():
    code, text = run("transform", "catalog:rt-generic-6", "--conformal=-0.3*v")
    assert code == 0 and "G_{-1}^{0,0}" in text
    code, _ = run("transform", "catalog:cahen-wallach-6", "--alpha", "0,0,0,0,0,1", "--tier", "kerr-schild")
    assert code == 2
    code, out = run("transform", "catalog:cahen-wallach-6", "--alpha", "0.1*x1,0,0,0,0,0",
                    "--tier", "kerr-schild", "--json", "-")
    assert code == 0 and json.loads(out)["comparison"]["ok"]


def test_catalog_list_export_and_run(monkeypatch):
    code, text = run("catalog", "list")
    assert code == 0 and "cahen-wallach-6" in text
    code, text = run("catalog", "export", "minkowski-4")
    assert code == 0 and "[coframe]" in text
    assert run("catalog", "run", "minkowski-4", "cahen-wallach-6")[0] == 0
    # an entry whose record disagrees with its classification gives exit code 4
    wrong = dataclasses.replace(get_entry("minkowski-4"), expected_flags={"geodesic": False})
    monkeypatch.setattr(cli, "get_entry", lambda name: wrong)
    code, text = run("catalog", "run", "minkowski-4")
    assert code == 4 and "flag geodesic" in text


def test_catalog_export_needs_one_name():
    assert run("catalog", "export")[0] == 2
