"""Brute-force reference implementations used to cross-check the analyses.

Everything here is re-derived from the IR by enumeration: post-dominance by
vertex removal, branch regions and reaching definitions by walking simple
paths, call targets by scanning the class list. Only the ``ir`` module and
catalog data are shared with the main analyses. Cost is exponential, so
inputs are size-guarded.
"""

from __future__ import annotations

from ..ir import (
    EXIT, THIS, Assign, BinOp, Cond, Const, FieldLoad, FieldStore, Invoke, Local, Return,
    expr_uses, lookup_method, stmt_def, stmt_successors, stmt_uses,
)

MAX_STMTS = 100
ENTRY = "entry"


class SizeError(ValueError):
    pass


def _guard(program, limit):
    n = sum(len(m.body) for m in program.methods())
    if n > limit:
        raise SizeError(f"program has {n} statements; oracles accept at most {limit}")


# -- intra-procedural facts --------------------------------------------------

def _reach(m, start, avoid=None) -> set:
    """Statements (and EXIT) reachable from ``start`` without entering ``avoid``."""
    seen = set()
    stack = [start]
    while stack:
        s = stack.pop()
        if s in seen or s == avoid:
            continue
        seen.add(s)
        if s != EXIT:
            stack.extend(stmt_successors(m, s))
    return seen


def _live(m) -> set:
    return _reach(m, 0) - {EXIT} if m.body else set()


def _postdominates(m, p, s) -> bool:
    if EXIT not in _reach(m, s):
        return False
    if p == s:
        return True
    return EXIT not in _reach(m, s, avoid=p)


def _join(m, c):
    """Nearest strict post-dominator of ``c``; None when it is the method exit."""
    if EXIT not in _reach(m, c):
        return None
    strict = [p.id for p in m.body if p.id != c and _postdominates(m, p.id, c)]
    for p in strict:
        if all(q == p or _postdominates(m, q, p) for q in strict):
            return p
    return None


def _path_region(m, start, stop) -> set:
    region = set()

    def walk(s, on_path):
        if s == EXIT or s in stop or s in on_path:
            return
        region.add(s)
        on_path.add(s)
        for n in stmt_successors(m, s):
            walk(n, on_path)
        on_path.discard(s)

    walk(start, set())
    return region


def _preds(m) -> dict:
    out = {st.id: [] for st in m.body}
    for st in m.body:
        for s in stmt_successors(m, st.id):
            if s != EXIT:
                out[s].append(st.id)
    return out


def _reaching(m, u, var, live, preds) -> set:
    """Definitions of ``var`` with a definition-free path to ``u``; ENTRY for method entry."""
    if u not in live:
        return set()
    found = set()
    if u == 0:
        found.add(ENTRY)

    def back(p, on_path):
        if p in on_path or p not in live:
            return
        if stmt_def(m.body[p].form) == var:
            found.add(p)
            return
        if p == 0:
            found.add(ENTRY)
        on_path.add(p)
        for q in preds[p]:
            back(q, on_path)
        on_path.discard(p)

    for p in preds[u]:
        back(p, set())
    return found


def _direct_guards(m, d) -> set:
    out = set()
    for st in m.body:
        if not isinstance(st.form, Cond):
            continue
        c = st.id
        if d != c and _postdominates(m, d, c):
            continue
        if any(s != EXIT and _postdominates(m, d, s) for s in stmt_successors(m, c)):
            out.add(c)
    return out


# -- class hierarchy ---------------------------------------------------------

def _is_subtype(program, sub, sup) -> bool:
    if sub == sup:
        return True
    cls = program.class_named(sub)
    if cls is None:
        return False
    parents = ([cls.superclass] if cls.superclass else []) + list(cls.interfaces)
    return any(_is_subtype(program, p, sup) for p in parents)


def _targets(program, call) -> list:
    found = None
    cur, seen = call.owner, set()
    while cur is not None and cur not in seen:
        seen.add(cur)
        if f"{cur}#{call.name}" in program.index:
            found = f"{cur}#{call.name}"
            break
        cls = program.class_named(cur)
        cur = cls.superclass if cls else None
    out = {found or call.callee}
    if call.kind == "virtual":
        for cls in program.classes:
            if cls.name != call.owner and _is_subtype(program, cls.name, call.owner) \
                    and f"{cls.name}#{call.name}" in program.index:
                out.add(f"{cls.name}#{call.name}")
    return sorted(out)


def _call_sites(program, callee) -> list:
    out = []
    for m in program.methods():
        for st in m.body:
            if isinstance(st.form, Invoke) and callee in _targets(program, st.form.call):
                out.append((m, st.id))
    return out


def _closure(program, roots) -> set:
    out = set()

    def visit(sig):
        if sig in out:
            return
        out.add(sig)
        m = lookup_method(program, sig)
        if m is None:
            return
        for st in m.body:
            if isinstance(st.form, Invoke):
                for t in _targets(program, st.form.call):
                    visit(t)

    for r in roots:
        visit(r)
    return out


# -- branch location ---------------------------------------------------------

def oracle_sites(program) -> list:
    """(method, cond, cond vars, then region, else region) for every usable conditional."""
    out = []
    for m in program.methods():
        live = _live(m)
        for st in m.body:
            if not isinstance(st.form, Cond) or st.id not in live:
                continue
            join = _join(m, st.id)
            stop = {st.id} if join is None else {st.id, join}
            t, e = stmt_successors(m, st.id)
            then_r, else_r = _path_region(m, t, stop), _path_region(m, e, stop)
            if then_r & else_r:
                continue
            out.append((m.key, st.id, frozenset(expr_uses(st.form.cond)),
                        frozenset(then_r), frozenset(else_r)))
    return out


def oracle_hsbs(program, catalog, limit: int = MAX_STMTS) -> set:
    """{(method, cond, arm, arm apis, sibling apis)} straight from the two rules."""
    _guard(program, limit)
    out = set()
    for key, cond, cvars, then_r, else_r in oracle_sites(program):
        m = lookup_method(program, key)
        regions = {"then": then_r, "else": else_r}
        apis = {}
        for arm, region in regions.items():
            roots = set()
            for sid in region:
                if isinstance(m.body[sid].form, Invoke):
                    roots.update(_targets(program, m.body[sid].form.call))
            apis[arm] = frozenset(s for s in _closure(program, roots) if s in catalog.sensitive)
        for arm, other in (("then", "else"), ("else", "then")):
            if not apis[arm] - apis[other]:
                continue
            touched = set()
            for sid in regions[arm]:
                touched.update(stmt_uses(m.body[sid].form))
                d = stmt_def(m.body[sid].form)
                if d:
                    touched.add(d)
            if cvars & touched:
                continue
            out.add((key, cond, arm, apis[arm], apis[other]))
    return out


# -- trigger origins ---------------------------------------------------------

def _param_index(m, var):
    if var == THIS:
        return -1
    if var in m.param_names:
        return m.param_names.index(var)
    return None


def oracle_origins(program, catalog, site, limit: int = MAX_STMTS) -> set:
    """Origin keys found by enumerating every simple backward def-use path.

    ``site`` is ``(method key, cond stmt id)``.
    """
    _guard(program, limit)
    method, cond = site
    cache = {}

    def facts(key):
        if key not in cache:
            m = lookup_method(program, key)
            cache[key] = (m, _live(m), _preds(m))
        return cache[key]

    origins = set()

    def guards(m, d):
        out, stack = set(), [d]
        while stack:
            for c in _direct_guards(m, stack.pop()):
                if c not in out:
                    out.add(c)
                    stack.append(c)
        return sorted(out)

    def successors(node):
        key, u, var = node
        m, live, preds = facts(key)
        for d in sorted(_reaching(m, u, var, live, preds), key=str):
            if d == ENTRY:
                idx = _param_index(m, var)
                if idx is None:
                    continue
                if m.kind != "plain":
                    origins.add(("EntryPoint", f"{key}/{idx}"))
                    continue
                for caller, cs in _call_sites(program, key):
                    call = caller.body[cs].form.call
                    if idx == -1:
                        if call.receiver is not None:
                            yield (caller.key, cs, call.receiver.name)
                    elif idx < len(call.args):
                        arg = call.args[idx]
                        if isinstance(arg, Local):
                            yield (caller.key, cs, arg.name)
                        else:
                            origins.add(("Constant", arg.render()))
                continue
            form = m.body[d].form
            if isinstance(form, Assign):
                expr = form.expr
                if isinstance(expr, Const):
                    origins.add(("Constant", expr.render()))
                    for g in guards(m, d):
                        for v in expr_uses(m.body[g].form.cond):
                            yield (key, g, v)
                elif isinstance(expr, Local):
                    yield (key, d, expr.name)
                elif isinstance(expr, BinOp):
                    for o in (expr.left, expr.right):
                        if isinstance(o, Local):
                            yield (key, d, o.name)
                elif isinstance(expr, FieldLoad):
                    yield from field_origin(key, d, expr)
            elif isinstance(form, Invoke):
                yield from call_origin(key, d, form.call)

    def field_origin(key, d, expr):
        owner = program.resolve_field(expr.owner, expr.field)
        ref = f"{owner}#{expr.field}"
        for r in (expr.ref, ref):
            if r in catalog.system_properties:
                origins.add(("SystemProperty", r))
                return
        if program.class_named(owner) is None:
            origins.add(("Unresolved", "unmodeled-field"))
            if expr.receiver is not None:
                yield (key, d, expr.receiver.name)
            return
        stores = []
        for m2 in program.methods():
            if m2.signature.owner != owner:
                continue
            for st in m2.body:
                f = st.form
                if isinstance(f, FieldStore) and f.field == expr.field \
                        and program.resolve_field(f.owner, f.field) == owner:
                    stores.append((m2.key, st.id, f.source))
        if not stores:
            origins.add(("Unresolved", "unmodeled-field"))
        yield from stores

    def call_origin(key, d, call):
        if call.callee in catalog.system_apis or call.callee in catalog.system_properties:
            origins.add(("SystemApi", call.callee))
            return
        follow_receiver = False
        for t in _targets(program, call):
            if t in catalog.system_apis or t in catalog.system_properties:
                origins.add(("SystemApi", t))
                continue
            callee = lookup_method(program, t)
            if callee is not None:
                follow_receiver = True
                for st in callee.body:
                    if isinstance(st.form, Return) and st.form.value is not None:
                        yield (t, st.id, st.form.value)
            else:
                origins.add(("Unresolved", "external-no-body"))
                follow_receiver = True
                for a in call.args:
                    if isinstance(a, Local):
                        yield (key, d, a.name)
        if follow_receiver and call.receiver is not None:
            yield (key, d, call.receiver.name)

    def walk(node, on_path):
        if node in on_path:
            return
        on_path.add(node)
        for nxt in list(successors(node)):
            walk(nxt, on_path)
        on_path.discard(node)

    m = lookup_method(program, method)
    for v in sorted(set(expr_uses(m.body[cond].form.cond))):
        walk((method, cond, v), set())
    return origins


# -- taint -------------------------------------------------------------------

def _reads(form) -> list:
    if isinstance(form, Assign):
        if isinstance(form.expr, Local):
            return [form.expr.name]
        if isinstance(form.expr, BinOp):
            return [o.name for o in (form.expr.left, form.expr.right) if isinstance(o, Local)]
        return []
    if isinstance(form, FieldStore):
        return [form.source]
    if isinstance(form, Return):
        return [form.value] if form.value else []
    if isinstance(form, Invoke):
        names = [a.name for a in form.call.args if isinstance(a, Local)]
        if form.call.receiver is not None:
            names.append(form.call.receiver.name)
        return names
    return []


def oracle_taint(program, catalog, source_mode: str = "default",
                 limit: int = MAX_STMTS) -> set:
    """{(source, sink)} pairs with ``source = (method, stmt, sig)`` and
    ``sink = (method, stmt, sig, arg)``, by exhaustive simple-path search."""
    _guard(program, limit)
    if source_mode == "default":
        sources = {s for s, o in catalog.sources.items() if o == "default"}
    else:
        sources = set(catalog.sources)
    cache = {}

    def facts(key):
        if key not in cache:
            m = lookup_method(program, key)
            cache[key] = (m, _live(m), _preds(m))
        return cache[key]

    def field_key(owner, name):
        return f"{program.resolve_field(owner, name)}#{name}"

    def successors(node, hits):
        if node[0] == "field":
            for m in program.methods():
                for st in m.body:
                    f = st.form
                    if isinstance(f, Assign) and isinstance(f.expr, FieldLoad) \
                            and field_key(f.expr.owner, f.expr.field) == node[1]:
                        yield ("def", m.key, st.id, f.target)
            return
        if node[0] == "def":
            _, key, d, var = node
        else:
            _, key, idx = node
            mm = lookup_method(program, key)
            var = THIS if idx == -1 else mm.param_names[idx]
            d = ENTRY
        m, live, preds = facts(key)
        for st in m.body:
            u, form = st.id, st.form
            if var not in _reads(form) or d not in _reaching(m, u, var, live, preds):
                continue
            if isinstance(form, Assign):
                yield ("def", key, u, form.target)
            elif isinstance(form, FieldStore):
                if form.source == var:
                    yield ("field", field_key(form.owner, form.field))
            elif isinstance(form, Return):
                for caller, cs in _call_sites(program, key):
                    tgt = caller.body[cs].form.target
                    if tgt is not None:
                        yield ("def", caller.key, cs, tgt)
            elif isinstance(form, Invoke):
                call = form.call
                targets = _targets(program, call)
                positions = [i for i, a in enumerate(call.args) if a == Local(var)]
                sink = call.callee if call.callee in catalog.sinks else \
                    next((t for t in targets if t in catalog.sinks), None)
                if sink:
                    for i in positions:
                        hits.add((key, u, sink, i))
                on_recv = call.receiver is not None and call.receiver.name == var
                bodiless = False
                for t in targets:
                    callee = lookup_method(program, t)
                    if callee is None:
                        bodiless = True
                        continue
                    for i in positions:
                        if i < len(callee.param_names):
                            yield ("param", t, i)
                    if on_recv:
                        yield ("param", t, -1)
                if bodiless and form.target is not None and (positions or on_recv):
                    yield ("def", key, u, form.target)

    out = set()
    for m in program.methods():
        for st in m.body:
            f = st.form
            if not isinstance(f, Invoke) or f.target is None:
                continue
            if f.call.callee in sources:
                sig = f.call.callee
            else:
                sig = next((t for t in _targets(program, f.call) if t in sources), None)
                if sig is None:
                    continue
            hits = set()

            def walk(node, on_path):
                if node in on_path:
                    return
                on_path.add(node)
                for nxt in list(successors(node, hits)):
                    walk(nxt, on_path)
                on_path.discard(node)

            walk(("def", m.key, st.id, f.target), set())
            for h in hits:
                out.add(((m.key, st.id, sig), h))
    return out
