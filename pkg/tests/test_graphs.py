from collections import deque

import pytest
from hypothesis import given, settings, strategies as st

from hsoscan.corpus import oracle_sites, random_program
from hsoscan.graphs import (
    DUMMY_MAIN, all_branch_sites, build_callgraph, build_cfg, cfg_to_dot, dominators,
    extract_branch_sites, reachable_methods, resolve_call,
)
from hsoscan.ir import Cond, Invoke, lookup_method
from support import method, prog


def naive_idom(succ, root):
    """Immediate dominators by vertex removal: d dominates n iff n is unreachable without d."""
    nodes = set(succ) | {t for ts in succ.values() for t in ts}

    def reach(avoid):
        seen, stack = set(), [root]
        while stack:
            n = stack.pop()
            if n in seen or n == avoid:
                continue
            seen.add(n)
            stack.extend(succ.get(n, ()))
        return seen

    live = reach(None)
    dom = {n: {d for d in live if d == n or n not in reach(d)} for n in live}
    out = {root: None}
    for n in live - {root}:
        strict = dom[n] - {n}
        # the closest strict dominator is the one dominated by all the others
        out[n] = next(d for d in strict if strict <= dom[d])
    assert nodes >= live
    return out


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 15))
    succ = {}
    for i in range(n):
        succ[i] = tuple(sorted(set(draw(st.lists(st.integers(0, n - 1), max_size=3)))))
    return succ


@settings(max_examples=300, deadline=None)
@given(graphs())
def test_dominators_match_naive(succ):
    assert dominators(succ, 0) == naive_idom(succ, 0)


def test_straight_line_single_block():
    p = prog(method(["x = 1", "y = 2", "c = 3", "return"]))
    cfg = build_cfg(lookup_method(p, "A#m"))
    assert len(cfg.blocks) == 1
    assert cfg.idom[cfg.entry] is None


DIAMOND = method(["if c goto Lt else Le", "Lt: x = 1", "goto Lj", "Le: x = 2", "Lj: return"])


def test_diamond():
    p = prog(DIAMOND)
    cfg = build_cfg(lookup_method(p, "A#m"))
    assert len(cfg.blocks) == 4
    cond_block = cfg.block_of[0]
    assert cfg.ipdom[cond_block] == cfg.block_of[4]
    sites = extract_branch_sites(cfg)
    assert len(sites) == 1
    assert sites[0].join == 4


def test_diamond_regions_exact():
    p = prog(method(["if c goto Lt else Le", "Lt: x = 1", "goto Lj", "Le: x = 2", "Lj: return"]))
    (s,) = all_branch_sites(p)
    # the goto belongs to the then arm
    assert s.then_region == frozenset({1, 2}) and s.else_region == frozenset({3})


def test_empty_else():
    p = prog(method(["if c goto Lt else Lj", "Lt: x = 1", "Lj: return"]))
    (s,) = all_branch_sites(p)
    assert s.then_region == frozenset({1})
    assert s.else_region == frozenset()


def test_nested_ifs():
    p = prog(method([
        "if c goto Lo else Lj", "Lo: if x goto Li else Lk", "Li: y = 1", "Lk: nop", "Lj: return",
    ]))
    sites = all_branch_sites(p)
    assert len(sites) == 2
    outer, inner = sorted(sites, key=lambda s: s.cond_stmt)
    assert inner.then_region < outer.then_region
    assert inner.else_region <= outer.then_region
    assert {(s.method, s.cond_stmt, s.cond_vars, s.then_region, s.else_region) for s in sites} \
        == set(oracle_sites(p))


def test_listing1_then_region(listing1):
    m = lookup_method(listing1, "MainActivity#onCreate")
    sites = [s for s in all_branch_sites(listing1) if s.method == m.key]
    (site,) = sites
    wanted = {"getDeviceId", "getLine1Number", "getSubscriberId", "sendDataMessage"}
    ids = {st.id for st in m.body if isinstance(st.form, Invoke) and st.form.call.name in wanted}
    assert len(ids) == 4 and ids <= site.then_region


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_regions_match_path_enumeration(seed, cyclic):
    p = prog(random_program(seed, cyclic=cyclic))
    mine = {(s.method, s.cond_stmt, s.cond_vars, s.then_region, s.else_region)
            for s in all_branch_sites(p)}
    assert mine == set(oracle_sites(p))


def _naive_ipdom_blocks(cfg):
    rev = {b: [] for b in range(len(cfg.blocks) + 1)}
    for b, outs in cfg.succ.items():
        for o in outs:
            rev[o].append(b)
    return naive_idom(rev, cfg.exit)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_postdominators_match_naive(seed):
    p = prog(random_program(seed, cyclic=True))
    for m in p.methods():
        cfg = build_cfg(m)
        naive = _naive_ipdom_blocks(cfg)
        got = {b: d for b, d in cfg.ipdom.items() if b in naive}
        assert got == naive


CALLBACKS = """
class Act extends android.app.Activity implements android.view.View$OnClickListener {
  lifecycle method void onCreate() { return; }
  callback method void onClick(android.view.View v) { return; }
  plain method void helper() { return; }
}
"""


def test_dummy_main_edges():
    cg = build_callgraph(prog(CALLBACKS))
    out = [e for e in cg.edges if e[0] == DUMMY_MAIN]
    assert sorted(e[2] for e in out) == ["Act#onClick", "Act#onCreate"]


CHA = """
class A { plain method void m() { return; } }
class B extends A { plain method void m() { return; } }
class C { plain method void go(A x) { call virtual A#m() on x; return; } }
"""


def test_cha_includes_override():
    p = prog(CHA)
    cg = build_callgraph(p)
    assert set(cg.targets("C#go", 0)) == {"A#m", "B#m"}


def _subtypes(program, name):
    # walk the class list repeatedly until no new subclass shows up
    out = {name}
    changed = True
    while changed:
        changed = False
        for cls in program.classes:
            parents = {cls.superclass, *cls.interfaces}
            if cls.name not in out and parents & out:
                out.add(cls.name)
                changed = True
    return out


def _oracle_edges(program):
    edges = set()
    for m in program.methods():
        for s in m.body:
            if not isinstance(s.form, Invoke):
                continue
            call = s.form.call
            # nearest definition at or above the static owner
            owner, target = call.owner, None
            while owner is not None:
                if lookup_method(program, f"{owner}#{call.name}") is not None:
                    target = f"{owner}#{call.name}"
                    break
                cls = program.class_named(owner)
                owner = cls.superclass if cls else None
            targets = {target or call.callee}
            if call.kind == "virtual":
                for sub in _subtypes(program, call.owner) - {call.owner}:
                    if lookup_method(program, f"{sub}#{call.name}") is not None:
                        targets.add(f"{sub}#{call.name}")
            edges |= {(m.key, s.id, t) for t in targets}
    return edges


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_callgraph_matches_class_scan(seed, cyclic):
    p = prog(random_program(seed, cyclic=cyclic, max_stmts=200, max_methods=30))
    cg = build_callgraph(p)
    assert {e for e in cg.edges if e[0] != DUMMY_MAIN} == _oracle_edges(p)


def test_thirty_method_program():
    p = prog(random_program(7, max_stmts=300, max_methods=30))
    assert sum(1 for _ in p.methods()) >= 20
    cg = build_callgraph(p)
    assert {e for e in cg.edges if e[0] != DUMMY_MAIN} == _oracle_edges(p)


def _bfs(cg, method, roots):
    adj = {}
    for caller, _, callee in cg.edges:
        adj.setdefault(caller, set()).add(callee)
    start = {callee for caller, sid, callee in cg.edges if caller == method and sid in roots}
    seen, queue = set(start), deque(start)
    while queue:
        for n in adj.get(queue.popleft(), ()):
            if n not in seen:
                seen.add(n)
                queue.append(n)
    return seen


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.booleans(), st.data())
def test_reachability_matches_bfs(seed, cyclic, data):
    p = prog(random_program(seed, cyclic=cyclic))
    cg = build_callgraph(p)
    m = data.draw(st.sampled_from(sorted(m.key for m in p.methods())))
    body = lookup_method(p, m).body
    roots = set(data.draw(st.lists(st.integers(0, max(len(body) - 1, 0)), max_size=6)))
    assert reachable_methods(cg, m, roots) == _bfs(cg, m, roots)


def test_reachability_empty_roots(listing1, listing1_cg):
    assert reachable_methods(listing1_cg, "MainActivity#onCreate", set()) == set()


def test_listing1_reachability(listing1, listing1_cg):
    (site,) = [s for s in all_branch_sites(listing1) if s.method == "MainActivity#onCreate"]
    m = lookup_method(listing1, site.method)
    calls = {i for i in site.then_region if isinstance(m.body[i].form, Invoke)}
    got = reachable_methods(listing1_cg, site.method, calls)
    assert {"android.telephony.TelephonyManager#getDeviceId",
            "android.telephony.SmsManager#sendDataMessage"} <= got


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_adding_a_class_keeps_edges(seed):
    text = random_program(seed, cyclic=True)
    p = prog(text)
    base = sorted(c.name for c in p.classes)[0]
    names = sorted({m.signature.name for m in p.methods() if m.signature.owner == base})
    extra = "".join(f"  plain method void {n}() {{ return; }}\n" for n in names[:2])
    q = prog(text + f"class Zz extends {base} {{\n{extra}}}\n")
    assert set(build_callgraph(p).edges) <= set(build_callgraph(q).edges)


def test_resolve_call_external():
    p = prog(CHA)
    m = lookup_method(p, "C#go")
    assert resolve_call(p, m.body[0].form.call) == ("A#m", "B#m")


def test_dot_dump():
    p = prog(DIAMOND)
    dot = cfg_to_dot(build_cfg(lookup_method(p, "A#m")))
    assert dot.startswith('digraph "A#m"') and "->" in dot


def test_unreachable_code_is_not_a_site():
    p = prog(method(["return", "if c goto Lt else Lj", "Lt: x = 1", "Lj: return"]))
    assert all_branch_sites(p) == []
    assert oracle_sites(p) == []


@pytest.mark.parametrize("stem", ["listing1", "listing7_pkgmgr"])
def test_listing_sites_match_oracle(stem):
    from support import load
    p = load(stem)
    mine = {(s.method, s.cond_stmt, s.cond_vars, s.then_region, s.else_region)
            for s in all_branch_sites(p)}
    assert mine == set(oracle_sites(p))
    assert all(isinstance(lookup_method(p, s.method).body[s.cond_stmt].form, Cond)
               for s in all_branch_sites(p))
