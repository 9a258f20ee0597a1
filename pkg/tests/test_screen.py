import json
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from hsoscan.corpus import EXPECTED
from hsoscan.graphs import build_callgraph
from hsoscan.hsb import locate_hsbs
from hsoscan.pipeline import analyze
from hsoscan.screen import (
    BUILTIN_CATEGORIES, CONVENTIONAL, SUSPICIOUS, ConventionalRule, WhitelistError,
    load_whitelist, parse_whitelist, screen_all, screen_hso,
)
from hsoscan.trigger import SystemApi, SystemProperty, infer_trigger
from support import load, method, prog


def inference(origins, catalog, kind="plain"):
    """A trigger inference with hand-picked origins on a one-branch method."""
    p = prog(method(["if c goto Lt else Lj", "Lt: call static android.hardware.Camera#open()",
                     "Lj: return"], kind=kind))
    cg = build_callgraph(p)
    (cand,) = locate_hsbs(p, cg, catalog)
    inf = infer_trigger(p, cg, catalog, cand)
    return p, replace(inf, origins=frozenset(origins))


def test_bundled_whitelist(rules):
    assert len(rules) == 7
    assert sorted(r.category for r in rules) == sorted(BUILTIN_CATEGORIES)
    assert not any(r.is_custom for r in rules)


def test_empty_whitelist():
    assert parse_whitelist([]) == []


@pytest.mark.parametrize("data,pointer", [
    ([{"category": "X", "originPatterns": []}], "#/0/originPatterns"),
    ([{"category": "", "originPatterns": ["a"]}], "#/0/category"),
    ([{"category": "X", "originPatterns": ["a"], "context": "sometimes"}], "#/0/context"),
    ([{"category": "X", "originPatterns": ["a"], "extra": 1}], "#/0"),
    ({"category": "X"}, "#"),
])
def test_invalid_rules(data, pointer):
    with pytest.raises(WhitelistError) as err:
        parse_whitelist(data, "w.json")
    assert err.value.pointer == "w.json" + pointer


def test_bad_json_names_line(tmp_path):
    path = tmp_path / "w.json"
    path.write_text('[\n  {"category": "X",\n  }\n]\n', encoding="utf-8")
    with pytest.raises(WhitelistError) as err:
        load_whitelist(path)
    assert err.value.pointer.endswith(":3")


def test_custom_rule_round_trip(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps([{"category": "Debug", "originPatterns": ["android.os.Debug#*"]}]))
    (rule,) = load_whitelist(path)
    assert rule.is_custom and rule.context == "none"
    assert rule.covers("android.os.Debug#isDebuggerConnected")


def test_sdk_int_is_conventional(catalog, rules):
    p, inf = inference([SystemProperty("android.os.Build$VERSION#SDK_INT")], catalog)
    f = screen_hso(inf, rules, p, catalog)
    assert (f.verdict, f.category) == (CONVENTIONAL, "SdkVersion")


def test_listing1_is_suspicious(listing1, listing1_cg, catalog, rules):
    (cand,) = locate_hsbs(listing1, listing1_cg, catalog)
    f = screen_hso(infer_trigger(listing1, listing1_cg, catalog, cand), rules, listing1, catalog)
    assert f.verdict == SUSPICIOUS and f.category is None


def test_single_rule_must_cover_all_origins(catalog, rules):
    ui = SystemApi("android.view.View#getId")
    p, inf = inference([ui], catalog, kind="callback")
    assert screen_hso(inf, rules, p, catalog).category == "UserInterface"
    p, inf = inference([ui, SystemApi("java.util.Calendar#get")], catalog, kind="callback")
    assert screen_hso(inf, rules, p, catalog).verdict == SUSPICIOUS


def test_context_constraint(catalog, rules):
    p, inf = inference([SystemApi("android.view.View#getId")], catalog, kind="plain")
    assert screen_hso(inf, rules, p, catalog).verdict == SUSPICIOUS


def test_tie_break_smallest_category(catalog):
    ref = "android.os.Debug#isDebuggerConnected"
    p, inf = inference([SystemApi(ref)], catalog)
    two = [ConventionalRule("Zeta", (ref,)), ConventionalRule("Alpha", ("android.os.*",))]
    assert screen_hso(inf, two, p, catalog).category == "Alpha"
    assert screen_hso(inf, two[::-1], p, catalog).category == "Alpha"


def test_no_hsos_no_findings(catalog, rules):
    assert screen_all([], rules, prog(""), catalog) == []


def test_listing2_and_3_to_8(catalog, rules):
    conv, susp = {}, 0
    for stem, (verdict, category) in EXPECTED.items():
        if stem == "listing1":
            continue
        res = analyze(load(stem), catalog, rules)
        (f,) = res.findings
        assert f.verdict == verdict, stem
        if verdict == CONVENTIONAL:
            conv[stem] = f.category
            assert f.category == category
        else:
            susp += 1
    assert len(conv) == 7 and len(set(conv.values())) == 7 and susp == 6


REFS = [
    "android.os.Build$VERSION#SDK_INT", "android.view.View#getId", "java.io.File#exists",
    "android.content.Context#checkSelfPermission", "android.net.NetworkInfo#getType",
    "android.content.Intent#getAction", "android.content.SharedPreferences#getInt",
    "java.util.Calendar#get", "android.os.Build#MODEL",
]


def _origin(ref):
    return SystemProperty(ref) if "Build" in ref else SystemApi(ref)


@settings(max_examples=150, deadline=None)
@given(st.sets(st.sampled_from(REFS), min_size=1, max_size=3),
       st.sampled_from(["plain", "callback", "lifecycle"]), st.data())
def test_monotone_and_order_free(catalog, rules, refs, kind, data):
    p, inf = inference([_origin(r) for r in refs], catalog, kind=kind)
    subset = data.draw(st.lists(st.sampled_from(rules), unique=True))
    order = data.draw(st.permutations(rules))
    small = screen_hso(inf, subset, p, catalog)
    full = screen_hso(inf, rules, p, catalog)
    # adding rules never turns a conventional verdict suspicious
    assert not (full.suspicious and not small.suspicious)
    shuffled = screen_hso(inf, order, p, catalog)
    assert (shuffled.verdict, shuffled.category) == (full.verdict, full.category)
    assert screen_hso(inf, [], p, catalog).suspicious
