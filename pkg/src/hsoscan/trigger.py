"""Backward, inter-procedural trigger inference for hidden sensitive branches.

Starting from the locals of a branch condition, the analysis walks def-use
chains backwards across returns, parameters and call receivers until each
chain ends in a system API, a system property, a constant, an entry-point
parameter, or something it cannot model.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Union

from .apimap import ApiCatalog, categorize
from .graphs import (
    DUMMY_MAIN, ENTRY_DEF, CallGraph, control_dependences, reaching_defs,
)
from .hsb import HsbCandidate
from .ir import (
    Assign, BinOp, Const, FieldLoad, FieldStore, Invoke, Local, Program, Return,
    expr_uses, lookup_method,
)

DEFAULT_BUDGET = 10_000


@dataclass(frozen=True)
class SystemApi:
    signature: str

    def key(self):
        return ("SystemApi", self.signature)


@dataclass(frozen=True)
class SystemProperty:
    field: str

    def key(self):
        return ("SystemProperty", self.field)


@dataclass(frozen=True)
class Constant:
    literal: Const

    def key(self):
        return ("Constant", self.literal.render())


@dataclass(frozen=True)
class EntryPoint:
    method: str
    index: int  # -1 is the receiver

    def key(self):
        return ("EntryPoint", f"{self.method}/{self.index}")


@dataclass(frozen=True)
class Unresolved:
    reason: str  # depth-limit | external-no-body | unmodeled-field

    def key(self):
        return ("Unresolved", self.reason)


Origin = Union[SystemApi, SystemProperty, Constant, EntryPoint, Unresolved]


def origin_sort_key(o) -> tuple:
    return o.key()


def is_system_origin(o) -> bool:
    return isinstance(o, (SystemApi, SystemProperty))


def origin_ref(o) -> Optional[str]:
    if isinstance(o, SystemApi):
        return o.signature
    if isinstance(o, SystemProperty):
        return o.field
    return None


@dataclass(frozen=True)
class TriggerInference:
    candidate: HsbCandidate
    origins: frozenset
    ctb: tuple  # ((method, stmt id), ...) in discovery order
    categories: frozenset
    visited: int
    exhausted: bool

    @property
    def is_hso(self) -> bool:
        return any(is_system_origin(o) for o in self.origins)

    def system_refs(self) -> list:
        return sorted({origin_ref(o) for o in self.origins if is_system_origin(o)})


class AnalysisContext:
    """Per-program caches shared by trigger inference runs."""

    def __init__(self, program: Program, cg: CallGraph, catalog: ApiCatalog):
        self.program = program
        self.cg = cg
        self.catalog = catalog
        self._rd = {}
        self._cd = {}
        self._stores = None

    def reaching(self, method: str) -> dict:
        if method not in self._rd:
            self._rd[method] = reaching_defs(lookup_method(self.program, method))
        return self._rd[method]

    def guards(self, method: str, stmt_id: int) -> list:
        """Conditionals ``stmt_id`` is transitively control dependent on, sorted."""
        if method not in self._cd:
            self._cd[method] = control_dependences(lookup_method(self.program, method))
        cd = self._cd[method]
        out, stack = set(), list(cd.get(stmt_id, ()))
        while stack:
            c = stack.pop()
            if c not in out:
                out.add(c)
                stack.extend(cd.get(c, ()))
        return sorted(out)

    def stores_to(self, ref: str) -> list:
        if self._stores is None:
            self._stores = {}
            for m in sorted(self.program.methods(), key=lambda m: m.key):
                for st in m.body:
                    if isinstance(st.form, FieldStore):
                        owner = self.program.resolve_field(st.form.owner, st.form.field)
                        if owner != m.signature.owner:
                            continue  # heap flow across classes is not modeled
                        key = f"{owner}#{st.form.field}"
                        self._stores.setdefault(key, []).append((m.key, st.id))
        return self._stores.get(ref, [])


def infer_trigger(program: Program, cg: CallGraph, catalog: ApiCatalog,
                  candidate: HsbCandidate, budget: Optional[int] = DEFAULT_BUDGET,
                  context: Optional[AnalysisContext] = None,
                  trace: Optional[list] = None) -> TriggerInference:
    """Trace the candidate's condition locals back to their origins.

    ``budget`` caps the number of (method, stmt, local) triples processed;
    None means unbounded. ``trace`` receives every processed triple.
    """
    if budget is not None and budget < 1:
        raise ValueError("budget must be >= 1")
    ctx = context or AnalysisContext(program, cg, catalog)
    site = candidate.site
    origins = set()
    ctb = {}
    ctb[(site.method, site.cond_stmt)] = None
    work = deque((site.method, site.cond_stmt, v) for v in sorted(site.cond_vars))
    visited = set()
    exhausted = False

    def push(method, stmt_id, var):
        if (method, stmt_id, var) not in visited:
            work.append((method, stmt_id, var))

    def mark(method, stmt_id):
        ctb.setdefault((method, stmt_id), None)

    while work:
        item = work.popleft()
        if item in visited:
            continue
        if budget is not None and len(visited) >= budget:
            origins.add(Unresolved("depth-limit"))
            exhausted = True
            break
        visited.add(item)
        if trace is not None:
            trace.append(item)
        method, stmt_id, var = item
        m = lookup_method(program, method)
        defs = ctx.reaching(method).get(stmt_id, {}).get(var, ())
        for d in sorted(defs):
            if d == ENTRY_DEF:
                idx = m.param_index(var)
                if idx is None:
                    continue
                if m.is_entry:
                    origins.add(EntryPoint(method, idx))
                    continue
                for caller, call_site in sorted(cg.call_sites_of(method)):
                    if caller == DUMMY_MAIN:
                        continue
                    call = lookup_method(program, caller).body[call_site].form.call
                    if idx == -1:
                        if call.receiver is None:
                            continue
                        mark(caller, call_site)
                        push(caller, call_site, call.receiver.name)
                    elif idx < len(call.args):
                        mark(caller, call_site)
                        arg = call.args[idx]
                        if isinstance(arg, Local):
                            push(caller, call_site, arg.name)
                        else:
                            origins.add(Constant(arg))
                continue

            mark(method, d)
            form = m.body[d].form
            if isinstance(form, Assign):
                expr = form.expr
                if isinstance(expr, Const):
                    origins.add(Constant(expr))
                    # a constant chosen under a conditional is really decided by that conditional
                    for guard in ctx.guards(method, d):
                        mark(method, guard)
                        for v in sorted(set(expr_uses(m.body[guard].form.cond))):
                            push(method, guard, v)
                elif isinstance(expr, Local):
                    push(method, d, expr.name)
                elif isinstance(expr, BinOp):
                    for operand in (expr.left, expr.right):
                        if isinstance(operand, Local):
                            push(method, d, operand.name)
                elif isinstance(expr, FieldLoad):
                    _field_step(program, catalog, ctx, method, d, expr, origins, push, mark)
            elif isinstance(form, Invoke):
                _call_step(program, cg, catalog, method, d, form.call, origins, push, mark)

    categories = categorize(catalog, [origin_ref(o) for o in origins if is_system_origin(o)])
    return TriggerInference(candidate, frozenset(origins), tuple(ctb), categories,
                            len(visited), exhausted)


def _field_step(program, catalog, ctx, method, d, expr, origins, push, mark):
    owner = program.resolve_field(expr.owner, expr.field)
    ref = f"{owner}#{expr.field}"
    if catalog.is_system_property(expr.ref) or catalog.is_system_property(ref):
        origins.add(SystemProperty(expr.ref if catalog.is_system_property(expr.ref) else ref))
        return
    if program.is_external_class(owner):
        # an external object's attribute behaves like an unmodeled getter
        origins.add(Unresolved("unmodeled-field"))
        if expr.receiver is not None:
            push(method, d, expr.receiver.name)
        return
    stores = ctx.stores_to(ref)
    if not stores:
        origins.add(Unresolved("unmodeled-field"))
    for m2, s in stores:
        mark(m2, s)
        push(m2, s, lookup_method(program, m2).body[s].form.source)


def _call_step(program, cg, catalog, method, d, call, origins, push, mark):
    if catalog.is_system(call.callee):
        origins.add(SystemApi(call.callee))
        return
    track_receiver = False
    for target in sorted(cg.targets(method, d)):
        if catalog.is_system(target):
            origins.add(SystemApi(target))
            continue
        callee = lookup_method(program, target)
        if callee is not None:
            track_receiver = True
            for st in callee.body:
                if isinstance(st.form, Return) and st.form.value is not None:
                    mark(target, st.id)
                    push(target, st.id, st.form.value)
        else:
            origins.add(Unresolved("external-no-body"))
            track_receiver = True
            for arg in call.args:
                if isinstance(arg, Local):
                    push(method, d, arg.name)
    if track_receiver and call.receiver is not None:
        push(method, d, call.receiver.name)


def infer_all(program: Program, cg: CallGraph, catalog: ApiCatalog, candidates,
              budget: Optional[int] = DEFAULT_BUDGET) -> list:
    ctx = AnalysisContext(program, cg, catalog)
    return [infer_trigger(program, cg, catalog, c, budget, ctx) for c in candidates]


def detect_hsos(program: Program, cg: CallGraph, catalog: ApiCatalog, candidates,
                budget: Optional[int] = DEFAULT_BUDGET) -> list:
    """Inferences for the candidates whose trigger involves a system origin."""
    return [inf for inf in infer_all(program, cg, catalog, candidates, budget) if inf.is_hso]
