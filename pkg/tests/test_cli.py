import json
import subprocess
import sys

import pytest

from hsoscan.cli import main
from hsoscan.corpus import all_listings, listing_path

L1 = str(listing_path("listing1"))
SDK = str(listing_path("listing2_sdk"))


def run(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    out, err = capsys.readouterr()
    return exc.value.code, out, err


def test_listing1_taint(capsys):
    code, out, _ = run(["analyze", L1, "--taint"], capsys)
    assert code == 0
    r = json.loads(out)
    assert r["stats"]["suspicious"] == 1 and len(r["hsdfs"]) == 3
    assert r["appId"] == "listing1"


def test_fail_on_suspicious(capsys):
    assert run(["analyze", L1, "--fail-on-suspicious"], capsys)[0] == 1
    assert run(["analyze", SDK, "--fail-on-suspicious"], capsys)[0] == 0


def test_missing_input(capsys, tmp_path):
    missing = str(tmp_path / "missing.ir")
    code, _, err = run(["analyze", missing], capsys)
    assert code == 2 and missing in err


def test_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.ir"
    bad.write_text("class A { plain method void m() { x = ; } }\n")
    code, _, err = run(["analyze", str(bad)], capsys)
    assert code == 2 and "bad.ir" in err


@pytest.mark.parametrize("extra", [
    ["--sources-extended"],
    ["--budget", "0"],
    ["--budget", "many"],
    ["--rule2", "loose"],
    ["--format", "xml"],
    ["--no-whitelist", "--whitelist", "w.json"],
    ["--catalog-dir", "/nonexistent/dir"],
    ["--whitelist", "/nonexistent/w.json"],
    ["--dump-cfg", "Nope#m"],
    ["--no-such-flag"],
])
def test_config_errors(capsys, extra):
    assert run(["analyze", L1, *extra], capsys)[0] == 3


def test_bad_whitelist_content(capsys, tmp_path):
    w = tmp_path / "w.json"
    w.write_text('[{"category": "X", "originPatterns": []}]')
    code, _, err = run(["analyze", L1, "--whitelist", str(w)], capsys)
    assert code == 3 and "originPatterns" in err


def test_bad_catalog(capsys, tmp_path):
    (tmp_path / "triggers.csv").write_text("signature_or_field,category\na.B#c,Timey\n")
    code, _, err = run(["analyze", L1, "--catalog-dir", str(tmp_path)], capsys)
    assert code == 3 and "triggers.csv:2" in err


def test_no_whitelist_funnel(capsys):
    for path in map(lambda s: str(listing_path(s)), all_listings()):
        _, out, _ = run(["analyze", path], capsys)
        default = json.loads(out)["stats"]
        _, out, _ = run(["analyze", path, "--no-whitelist"], capsys)
        bare = json.loads(out)["stats"]
        conv = sum(default["conventionalByCategory"].values())
        assert bare["hsos"] == default["suspicious"] + conv == bare["suspicious"]


def test_multiple_inputs(capsys, tmp_path):
    files = [str(listing_path(s)) for s in ("listing1", "listing2_sdk", "listing3_time")]
    code, out, err = run(["analyze", *files, "--out", str(tmp_path / "a")], capsys)
    assert code == 0 and out == ""
    lines = err.strip().splitlines()
    assert lines[-1] == "total: files=3 suspicious=2"
    first = {p.name: p.read_bytes() for p in (tmp_path / "a").iterdir()}
    assert sorted(first) == ["listing1.json", "listing2_sdk.json", "listing3_time.json"]
    run(["analyze", *files[::-1], "--out", str(tmp_path / "b")], capsys)
    second = {p.name: p.read_bytes() for p in (tmp_path / "b").iterdir()}
    assert first == second


def test_out_file_and_text(capsys, tmp_path):
    out = tmp_path / "r.txt"
    code, stdout, _ = run(["analyze", L1, "--format", "text", "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    assert out.read_text().startswith("app listing1")


def test_dump_cfg(capsys):
    code, out, err = run(["analyze", L1, "--dump-cfg", "ED#checkPackageName"], capsys)
    assert code == 0 and err.startswith('digraph "ED#checkPackageName"')
    json.loads(out)


def test_budget_flag(capsys):
    code, out, _ = run(["analyze", L1, "--budget", "2"], capsys)
    r = json.loads(out)
    assert code == 0 and any("budget-exhausted" in d for d in r["diagnostics"])


def test_corpus_gen_and_score(capsys, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"plantedHsos": [{"category": "Time", "depth": 1},
                                                {"category": "Location", "depth": 2}],
                                "plantedConventional": ["File"], "plantedFlows": 1}))
    code, _, _ = run(["corpus", "gen", "--seed", "42", "--spec", str(spec),
                      "--out", str(tmp_path / "g")], capsys)
    assert code == 0
    app = tmp_path / "g" / "app.ir"
    code, _, _ = run(["analyze", str(app), "--taint", "--out", str(tmp_path / "r.json")], capsys)
    assert code == 0
    code, out, _ = run(["corpus", "score", "--report", str(tmp_path / "r.json"),
                        "--truth", str(tmp_path / "g" / "truth.json")], capsys)
    s = json.loads(out)
    assert code == 0
    assert s["suspicious"]["recall"] == 1.0 and s["suspicious"]["precision"] == 1.0
    assert s["categoryAccuracy"] == 1.0 and s["falseSuspicious"] == 0
    assert s["hsdfs"] == {"expected": 1, "reported": 1}


def test_corpus_gen_bad_spec(capsys, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"plantedHsos": [{"category": "Weather"}]}))
    code, _, err = run(["corpus", "gen", "--seed", "1", "--spec", str(spec),
                        "--out", str(tmp_path)], capsys)
    assert code == 3 and "Weather" in err


def test_score_app_mismatch(capsys, tmp_path):
    (tmp_path / "r.json").write_text(json.dumps({"appId": "x", "hsos": []}))
    (tmp_path / "t.json").write_text(json.dumps({"appId": "app"}))
    code, _, _ = run(["corpus", "score", "--report", str(tmp_path / "r.json"),
                      "--truth", str(tmp_path / "t.json")], capsys)
    assert code == 3


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "hsoscan.cli", "analyze", L1,
                           "--fail-on-suspicious"], capture_output=True)
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["stats"]["suspicious"] == 1
