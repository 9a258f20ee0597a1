"""Forward taint propagation from source APIs to sink arguments.

Taint lives on three kinds of nodes: a local defined at a statement, a
method parameter at entry, and a field (keyed by its declaring class, with
no distinction between receiver objects). Propagation follows def-use
chains from reaching definitions, so a redefinition kills taint.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .apimap import ApiCatalog
from .graphs import DUMMY_MAIN, ENTRY_DEF, CallGraph, reaching_defs
from .ir import (
    Assign, BinOp, FieldLoad, FieldStore, Invoke, Local, Program, Return, lookup_method,
)

SOURCE_MODES = ("default", "default+extended")


@dataclass(frozen=True)
class TaintFlow:
    source: tuple  # (method, stmt id, source signature)
    sink: tuple  # (method, stmt id, sink signature, argument index)
    path: tuple  # ((method, stmt id), ...)

    @property
    def key(self) -> tuple:
        return (self.source[0], self.source[1], self.sink[0], self.sink[1], self.sink[3])


@dataclass(frozen=True)
class HsdfFinding:
    flow: TaintFlow
    hso: object  # the suspicious HsoFinding
    hso_index: int


def _node_order(node) -> tuple:
    kind = node[0]
    if kind == "def":
        return (node[1], node[2], 0, node[3])
    if kind == "param":
        return (node[1], -1, node[2], "")
    return (node[1], -2, 0, "")


class _FlowGraph:
    def __init__(self, program: Program, cg: CallGraph, catalog: ApiCatalog):
        self.program = program
        self.cg = cg
        self.catalog = catalog
        self._uses = {}
        loads = {}
        for m in program.methods():
            for st in m.body:
                form = st.form
                if isinstance(form, Assign) and isinstance(form.expr, FieldLoad):
                    ref = self.field_key(form.expr.owner, form.expr.field)
                    loads.setdefault(ref, []).append((m.key, st.id, form.target))
        self.loads = {k: sorted(v) for k, v in loads.items()}

    def field_key(self, owner: str, name: str) -> str:
        return f"{self.program.resolve_field(owner, name)}#{name}"

    def uses(self, method: str) -> dict:
        """(def id, local) -> sorted stmt ids reading that definition."""
        if method not in self._uses:
            m = lookup_method(self.program, method)
            out = {}
            for sid, env in reaching_defs(m).items():
                for var in _reads(m.body[sid].form):
                    for d in env.get(var, ()):
                        out.setdefault((d, var), set()).add(sid)
            self._uses[method] = {k: sorted(v) for k, v in out.items()}
        return self._uses[method]

    def is_sink(self, method: str, sid: int, call) -> str:
        if call.callee in self.catalog.sinks:
            return call.callee
        for t in self.cg.targets(method, sid):
            if t in self.catalog.sinks:
                return t
        return ""

    def step(self, node):
        """Yield (via, successor) edges and (via, sink) hits for one node."""
        if node[0] == "field":
            for m, sid, target in self.loads.get(node[1], ()):
                yield None, ("def", m, sid, target)
            return
        if node[0] == "def":
            _, method, d, var = node
        else:
            _, method, idx = node
            m = lookup_method(self.program, method)
            var = m.param_names[idx] if idx >= 0 else "this"
            d = ENTRY_DEF
        m = lookup_method(self.program, method)
        for u in self.uses(method).get((d, var), ()):
            form = m.body[u].form
            here = (method, u)
            if isinstance(form, Assign):
                expr = form.expr
                if isinstance(expr, Local) or isinstance(expr, BinOp):
                    yield None, ("def", method, u, form.target)
            elif isinstance(form, FieldStore):
                if form.source == var:
                    yield here, ("field", self.field_key(form.owner, form.field))
            elif isinstance(form, Return):
                for caller, cs in self.cg.call_sites_of(method):
                    if caller == DUMMY_MAIN:
                        continue
                    target = lookup_method(self.program, caller).body[cs].form.target
                    if target is not None:
                        yield here, ("def", caller, cs, target)
            elif isinstance(form, Invoke):
                yield from self._call_edges(method, u, form, var)

    def _call_edges(self, method, u, form, var):
        call = form.call
        here = (method, u)
        positions = [i for i, a in enumerate(call.args) if a == Local(var)]
        on_receiver = call.receiver is not None and call.receiver.name == var
        sink = self.is_sink(method, u, call)
        if sink:
            for i in positions:
                yield here, ("sink", method, u, sink, i)
        wraps = False
        for t in self.cg.targets(method, u):
            callee = lookup_method(self.program, t)
            if callee is None:
                wraps = True
                continue
            for i in positions:
                if i < len(callee.param_names):
                    yield here, ("param", t, i)
            if on_receiver:
                yield here, ("param", t, -1)
        if wraps and form.target is not None and (positions or on_receiver):
            # no body to look into: the result carries whatever went in
            yield None, ("def", method, u, form.target)


def _reads(form) -> list:
    """Locals whose value can move into another node at this statement."""
    if isinstance(form, Assign):
        expr = form.expr
        if isinstance(expr, Local):
            return [expr.name]
        if isinstance(expr, BinOp):
            return [o.name for o in (expr.left, expr.right) if isinstance(o, Local)]
        return []
    if isinstance(form, FieldStore):
        return [form.source]
    if isinstance(form, Return):
        return [form.value] if form.value is not None else []
    if isinstance(form, Invoke):
        out = [a.name for a in form.call.args if isinstance(a, Local)]
        if form.call.receiver is not None:
            out.append(form.call.receiver.name)
        return out
    return []


def find_sources(program: Program, cg: CallGraph, catalog: ApiCatalog,
                 source_mode: str = "default") -> list:
    """Sorted (method, stmt id, signature) of source calls whose result is kept."""
    if source_mode not in SOURCE_MODES:
        raise ValueError(f"unknown source mode {source_mode!r}")
    sources = catalog.source_set(source_mode)
    out = []
    for m in sorted(program.methods(), key=lambda m: m.key):
        for st in m.body:
            form = st.form
            if not isinstance(form, Invoke) or form.target is None:
                continue
            if form.call.callee in sources:
                out.append((m.key, st.id, form.call.callee))
                continue
            hits = sorted(t for t in cg.targets(m.key, st.id) if t in sources)
            if hits:
                out.append((m.key, st.id, hits[0]))
    return out


def taint_analyze(program: Program, cg: CallGraph, catalog: ApiCatalog,
                  source_mode: str = "default") -> list:
    """All source-to-sink flows, one per (source stmt, sink stmt, argument)."""
    graph = _FlowGraph(program, cg, catalog)
    flows = []
    for method, sid, sig in find_sources(program, cg, catalog, source_mode):
        target = lookup_method(program, method).body[sid].form.target
        start = ("def", method, sid, target)
        parent = {start: None}
        queue = deque([start])
        hits = {}
        while queue:
            node = queue.popleft()
            edges = sorted(graph.step(node), key=lambda e: _node_order(e[1]) if e[1][0] != "sink"
                           else (e[1][1], e[1][2], 1, str(e[1][4])))
            for via, nxt in edges:
                if nxt[0] == "sink":
                    key = (nxt[1], nxt[2], nxt[4])
                    if key not in hits:
                        hits[key] = (nxt, _path(parent, node, via, nxt))
                    continue
                if nxt not in parent:
                    parent[nxt] = (node, via)
                    queue.append(nxt)
        for key in sorted(hits):
            sink, path = hits[key]
            flows.append(TaintFlow((method, sid, sig), (sink[1], sink[2], sink[3], sink[4]), path))
    return flows


def _location(node):
    return (node[1], node[2]) if node[0] == "def" else None


def _path(parent, node, via, sink) -> tuple:
    steps = [(sink[1], sink[2]), via]
    cur = node
    while cur is not None:
        steps.append(_location(cur))
        link = parent[cur]
        if link is None:
            break
        cur, v = link
        steps.append(v)
    out = []
    for loc in reversed(steps):
        if loc is not None and (not out or out[-1] != loc):
            out.append(loc)
    return tuple(out)


def detect_hsdf(flows, findings) -> list:
    """Pair each flow with every suspicious finding whose hidden arm holds its source."""
    out = []
    for flow in flows:
        method, sid, _ = flow.source
        for i, f in enumerate(findings):
            if f.suspicious and f.method == method and sid in f.region:
                out.append(HsdfFinding(flow, f, i))
    return out
