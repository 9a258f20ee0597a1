import json

import jsonschema
import pytest
from hypothesis import given, settings, strategies as st

from hsoscan.corpus import all_listings, random_program
from hsoscan.pipeline import analyze
from hsoscan.report import (
    ReportIOError, build_report, load_schema, report_for, serialize, write_report,
)
from support import load, prog

VALIDATOR = jsonschema.Draft202012Validator(load_schema())


def report(program, catalog, rules, **kw):
    res = analyze(program, catalog, rules, **kw)
    return json.loads(report_for(res, program.app_id))


def test_listing1_report(catalog, rules):
    r = report(load("listing1"), catalog, rules, taint=True)
    VALIDATOR.validate(r)
    assert (r["stats"]["hsos"], r["stats"]["suspicious"], r["stats"]["hsdfs"]) == (1, 1, 3)
    (h,) = r["hsos"]
    assert h["trigger"]["categories"] == ["PackageManager"]
    assert len(h["hiddenSensitiveApis"]) == 4
    assert "category" not in h
    assert all(d["hsoIndex"] == 0 for d in r["hsdfs"])
    assert list(r) == ["appId", "toolVersion", "stats", "hsos", "hsdfs", "diagnostics"]


def test_empty_program(catalog, rules):
    r = report(prog("", "empty"), catalog, rules, taint=True)
    VALIDATOR.validate(r)
    assert r["hsos"] == [] and r["hsdfs"] == [] and r["diagnostics"] == []
    assert all(v == 0 for k, v in r["stats"].items() if k != "conventionalByCategory")
    assert r["stats"]["conventionalByCategory"] == {}


def test_conventional_carries_category(catalog, rules):
    r = report(load("listing2_sdk"), catalog, rules)
    VALIDATOR.validate(r)
    assert r["hsos"][0]["category"] == "SdkVersion"
    assert r["stats"]["conventionalByCategory"] == {"SdkVersion": 1}


def test_schema_rejects_missing_category(catalog, rules):
    r = report(load("listing2_sdk"), catalog, rules)
    del r["hsos"][0]["category"]
    with pytest.raises(jsonschema.ValidationError):
        VALIDATOR.validate(r)


@pytest.mark.parametrize("stem", all_listings())
def test_listings_validate_and_repeat(stem, catalog, rules):
    p = load(stem)
    a = report_for(analyze(p, catalog, rules, taint=True), stem)
    b = report_for(analyze(load(stem), catalog, rules, taint=True), stem)
    assert a == b
    VALIDATOR.validate(json.loads(a))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.booleans(), st.booleans())
def test_random_reports(catalog, rules, seed, cyclic, screened):
    p = prog(random_program(seed, cyclic=cyclic), f"r{seed}")
    res = analyze(p, catalog, rules if screened else [], taint=True,
                  source_mode="default+extended")
    data = report_for(res, p.app_id)
    assert data == report_for(analyze(p, catalog, rules if screened else [], taint=True,
                                      source_mode="default+extended"), p.app_id)
    assert b"dummyMain" not in data and b"<synthetic>" not in data
    r = json.loads(data)
    VALIDATOR.validate(r)
    for h in r["hsos"]:
        if h["verdict"] == "Suspicious":
            assert h["trigger"]["origins"] and h["trigger"]["ctb"] and h["hiddenSensitiveApis"]
    text = serialize(r, "text")
    assert text.decode().startswith(f"app {p.app_id}")


def test_unknown_format():
    with pytest.raises(ValueError):
        serialize({}, "xml")


def test_write_failure(tmp_path):
    with pytest.raises(ReportIOError):
        write_report(b"{}", tmp_path / "missing" / "r.json")


def test_build_report_key_order(catalog, rules):
    res = analyze(load("listing2_ui"), catalog, rules)
    r = build_report(res.findings, res.hsdfs, res.stats, "x")
    assert list(r["hsos"][0]) == [
        "method", "methodKind", "condStmt", "condition", "arm", "hiddenSensitiveApis",
        "distinctiveApis", "trigger", "verdict", "category",
    ]
