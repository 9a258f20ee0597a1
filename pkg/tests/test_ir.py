import pytest
from hypothesis import given, settings, strategies as st

from hsoscan.corpus import all_listings, listing_text, random_program
from hsoscan.ir import (
    Cond, DuplicateSignature, Invoke, ParseError, UnknownLabel, format_program, lint_program,
    lookup_method, parse_program,
)
from support import method, prog


def structure(p):
    return [(c.name, c.superclass, c.interfaces, c.fields,
             [(m.signature, m.kind, m.param_names, m.locals, [s.form for s in m.body])
              for m in c.methods]) for c in p.classes]


def test_minimal_program():
    p = prog("class A { plain method void m() { return; } }")
    assert len(p.classes) == 1
    ms = list(p.methods())
    assert len(ms) == 1 and len(ms[0].body) == 1


def test_listing1_shape(listing1):
    assert len(listing1.classes) == 2
    m = lookup_method(listing1, "MainActivity#onCreate")
    conds = [s for s in m.body if isinstance(s.form, Cond)]
    assert len(conds) == 1
    then_start = m.target(conds[0].form.then_label)
    calls = [s.form.call.callee for s in m.body[then_start:]
             if isinstance(s.form, Invoke)]
    assert "android.telephony.SmsManager#sendDataMessage" in calls


def test_unknown_label_names_method_and_label():
    with pytest.raises(UnknownLabel) as err:
        prog(method(["goto Lmissing", "return"]))
    assert err.value.label == "Lmissing"
    assert err.value.method == "A#m"
    assert "Lmissing" in str(err.value) and "A#m" in str(err.value)


def test_lookup(listing1):
    m = lookup_method(listing1, "ED#checkPackageName")
    assert m is not None and m.kind == "plain"
    assert lookup_method(listing1, "android.telephony.TelephonyManager#getDeviceId") is None
    assert lookup_method(prog(""), "A#m") is None


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        prog("class A {\n  plain method void m() {\n    x = ;\n  }\n}\n")
    assert err.value.line == 3


def test_duplicate_signature():
    text = "class A { plain method void m() { return; } plain method void m(int a) { return; } }"
    with pytest.raises(DuplicateSignature):
        prog(text)


def test_cond_normalized_with_two_labels():
    p = prog(method(["if c goto L", "x = 1", "L: return"]))
    m = lookup_method(p, "A#m")
    cond = m.body[0].form
    assert cond.else_label in m.labels and cond.then_label in m.labels
    assert m.target(cond.else_label) == 1


def test_comments_and_strings_round_trip():
    text = method(['x = "a \\"quoted\\" # not a comment"', "# a comment", "return"])
    p = prog(text)
    again = prog(format_program(p))
    assert structure(p) == structure(again)


@pytest.mark.parametrize("stem", all_listings())
def test_listing_round_trip(stem):
    p = parse_program(listing_text(stem), stem)
    assert structure(parse_program(format_program(p))) == structure(p)
    assert lint_program(p) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_random_round_trip(seed, cyclic):
    p = prog(random_program(seed, cyclic=cyclic))
    q = prog(format_program(p))
    assert structure(p) == structure(q)
    # printing is a fixed point after one round
    assert format_program(q) == format_program(p)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_parse_deterministic(seed):
    text = random_program(seed, cyclic=True)
    a, b = prog(text), prog(text)
    assert [[s.id for s in m.body] for m in a.methods()] == \
        [[s.id for s in m.body] for m in b.methods()]
    for m in a.methods():
        for s in m.body:
            if isinstance(s.form, Cond):
                assert s.form.then_label in m.labels and s.form.else_label in m.labels
