"""Control-flow graphs, dominators, branch regions and the CHA call graph."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .ir import (
    EXIT, THIS, CallExpr, Cond, Invoke, MethodDef, Program, expr_uses, stmt_def,
    stmt_successors,
)

DUMMY_MAIN = "<synthetic>#dummyMain"


@dataclass(frozen=True)
class Cfg:
    method: str
    blocks: tuple  # tuple of tuples of statement ids
    succ: dict  # block -> tuple of blocks (exit block included)
    pred: dict
    entry: int
    exit: int
    idom: dict  # block -> immediate dominator (entry maps to None)
    ipdom: dict  # block -> immediate post-dominator (exit maps to None)
    dead: frozenset  # blocks unreachable from entry
    block_of: dict  # stmt id -> block
    method_def: MethodDef = field(repr=False, compare=False, hash=False)

    def first_stmt(self, block: int) -> Optional[int]:
        if block == self.exit:
            return None
        return self.blocks[block][0]


@dataclass(frozen=True)
class BranchSite:
    method: str
    cond_stmt: int
    cond_vars: frozenset
    then_region: frozenset
    else_region: frozenset
    join: Optional[int]  # None when the post-dominator is the synthetic exit

    def region(self, arm: str) -> frozenset:
        return self.then_region if arm == "then" else self.else_region


def dominators(succ: dict, root) -> dict:
    """Immediate dominators of every node reachable from ``root``.

    Iterative algorithm of Cooper, Harvey and Kennedy over reverse postorder.
    """
    order, seen = [], set()
    stack = [(root, iter(succ.get(root, ())))]
    seen.add(root)
    while stack:
        node, it = stack[-1]
        for nxt in it:
            if nxt not in seen:
                seen.add(nxt)
                stack.append((nxt, iter(succ.get(nxt, ()))))
                break
        else:
            order.append(node)
            stack.pop()
    rpo = list(reversed(order))
    pos = {n: i for i, n in enumerate(rpo)}
    preds = {n: [] for n in rpo}
    for n in rpo:
        for s in succ.get(n, ()):
            if s in pos:
                preds[s].append(n)
    idom = {root: root}

    def intersect(a, b):
        while a != b:
            while pos[a] > pos[b]:
                a = idom[a]
            while pos[b] > pos[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for n in rpo[1:]:
            done = [p for p in preds[n] if p in idom]
            if not done:
                continue
            new = done[0]
            for p in done[1:]:
                new = intersect(p, new)
            if idom.get(n) != new:
                idom[n] = new
                changed = True
    idom[root] = None
    return idom


def build_cfg(method: MethodDef) -> Cfg:
    body = method.body
    n = len(body)
    leaders = {0} if n else set()
    for st in body:
        succs = stmt_successors(method, st.id)
        if isinstance(st.form, Cond) or len(succs) != 1 or succs[0] != st.id + 1:
            leaders.update(s for s in succs if s != EXIT)
            if st.id + 1 < n:
                leaders.add(st.id + 1)
    starts = sorted(leaders)
    blocks = []
    for i, start in enumerate(starts):
        end = starts[i + 1] if i + 1 < len(starts) else n
        blocks.append(tuple(range(start, end)))
    block_of = {sid: b for b, ids in enumerate(blocks) for sid in ids}
    exit_block = len(blocks)
    succ = {}
    for b, ids in enumerate(blocks):
        outs = []
        for s in stmt_successors(method, ids[-1]):
            tgt = exit_block if s == EXIT else block_of[s]
            if tgt not in outs:
                outs.append(tgt)
        succ[b] = tuple(outs)
    succ[exit_block] = ()
    pred = {b: [] for b in succ}
    for b, outs in succ.items():
        for s in outs:
            pred[s].append(b)
    pred = {b: tuple(ps) for b, ps in pred.items()}

    if blocks:
        idom = dominators(succ, 0)
        dead = frozenset(b for b in range(len(blocks)) if b not in idom)
    else:
        idom = {exit_block: None}
        dead = frozenset()
    # post-dominators on the reversed graph restricted to nodes reaching exit
    ipdom = dominators({b: pred[b] for b in pred}, exit_block)
    entry = 0 if blocks else exit_block
    return Cfg(method.key, tuple(blocks), succ, pred, entry, exit_block,
               idom, ipdom, dead, block_of, method)


def _region(method: MethodDef, start: int, stop: set) -> frozenset:
    if start == EXIT or start in stop:
        return frozenset()
    seen = {start}
    queue = deque([start])
    while queue:
        sid = queue.popleft()
        for s in stmt_successors(method, sid):
            if s == EXIT or s in stop or s in seen:
                continue
            seen.add(s)
            queue.append(s)
    return frozenset(seen)


def extract_branch_sites(cfg: Cfg, diagnostics: Optional[list] = None) -> list:
    """One :class:`BranchSite` per live conditional with disjoint regions."""
    method = cfg.method_def
    sites = []
    for st in method.body:
        if not isinstance(st.form, Cond):
            continue
        block = cfg.block_of[st.id]
        if block in cfg.dead:
            continue
        pd = cfg.ipdom.get(block)
        join = cfg.first_stmt(pd) if pd is not None else None
        stop = {st.id} | ({join} if join is not None else set())
        then_succ, else_succ = stmt_successors(method, st.id)
        then_region = _region(method, then_succ, stop)
        else_region = _region(method, else_succ, stop)
        if then_region & else_region:
            if diagnostics is not None:
                diagnostics.append(f"skipped-site {cfg.method}:{st.id}: overlapping branch regions")
            continue
        sites.append(BranchSite(cfg.method, st.id, frozenset(expr_uses(st.form.cond)),
                                then_region, else_region, join))
    return sites


# -- call graph --------------------------------------------------------------

@dataclass(frozen=True)
class CallGraph:
    nodes: frozenset
    edges: tuple  # (caller, call-site stmt id, callee)
    dummy_main: str
    callees: dict = field(hash=False, compare=False, repr=False)  # (caller, stmt) -> tuple
    callers: dict = field(hash=False, compare=False, repr=False)  # callee -> tuple of (caller, stmt)
    out: dict = field(hash=False, compare=False, repr=False)  # caller -> tuple of callees

    def targets(self, method: str, stmt_id: int) -> tuple:
        return self.callees.get((method, stmt_id), ())

    def call_sites_of(self, method: str) -> tuple:
        return self.callers.get(method, ())


def _ancestors(program: Program, name: str) -> set:
    out, stack = set(), [name]
    while stack:
        cur = stack.pop()
        if cur in out:
            continue
        out.add(cur)
        cls = program.class_named(cur)
        if cls is not None:
            if cls.superclass:
                stack.append(cls.superclass)
            stack.extend(cls.interfaces)
    return out


def _defines(program: Program, cls_name: str, method: str) -> bool:
    return f"{cls_name}#{method}" in program.index


def _resolve_upward(program: Program, owner: str, name: str) -> Optional[str]:
    seen = set()
    cur = owner
    while cur is not None and cur not in seen:
        seen.add(cur)
        if _defines(program, cur, name):
            return f"{cur}#{name}"
        cls = program.class_named(cur)
        cur = cls.superclass if cls else None
    return None


def resolve_call(program: Program, call: CallExpr) -> tuple:
    """Call targets under class hierarchy analysis, sorted."""
    found = _resolve_upward(program, call.owner, call.name)
    targets = {found or call.callee}
    if call.kind == "virtual":
        for cls in program.classes:
            if cls.name != call.owner and call.owner in _ancestors(program, cls.name):
                if _defines(program, cls.name, call.name):
                    targets.add(f"{cls.name}#{call.name}")
    return tuple(sorted(targets))


def build_callgraph(program: Program) -> CallGraph:
    edges = []
    nodes = {DUMMY_MAIN}
    entry_methods = [m for m in program.methods() if m.is_entry]
    for i, m in enumerate(entry_methods):
        edges.append((DUMMY_MAIN, i, m.key))
    for m in program.methods():
        nodes.add(m.key)
        for st in m.body:
            if isinstance(st.form, Invoke):
                for tgt in resolve_call(program, st.form.call):
                    edges.append((m.key, st.id, tgt))
    callees, callers, out = {}, {}, {}
    for caller, sid, callee in edges:
        nodes.add(callee)
        callees.setdefault((caller, sid), []).append(callee)
        callers.setdefault(callee, []).append((caller, sid))
        if callee not in out.setdefault(caller, []):
            out[caller].append(callee)
    return CallGraph(
        frozenset(nodes), tuple(edges), DUMMY_MAIN,
        {k: tuple(v) for k, v in callees.items()},
        {k: tuple(v) for k, v in callers.items()},
        {k: tuple(v) for k, v in out.items()},
    )


def reachable_methods(cg: CallGraph, method: str, roots) -> set:
    """Transitive callees of the call sites ``roots`` inside ``method``."""
    out = set()
    queue = deque()
    for sid in sorted(roots):
        for tgt in cg.targets(method, sid):
            if tgt not in out:
                out.add(tgt)
                queue.append(tgt)
    while queue:
        cur = queue.popleft()
        for tgt in cg.out.get(cur, ()):
            if tgt not in out:
                out.add(tgt)
                queue.append(tgt)
    return out


def cfg_to_dot(cfg: Cfg) -> str:
    name = cfg.method.replace('"', '\\"')
    lines = [f'digraph "{name}" {{']
    for b, ids in enumerate(cfg.blocks):
        style = ", style=dashed" if b in cfg.dead else ""
        lines.append(f'  b{b} [label="B{b} [{ids[0]}..{ids[-1]}]"{style}];')
    lines.append(f'  b{cfg.exit} [label="exit", shape=doublecircle];')
    for b, outs in cfg.succ.items():
        for s in outs:
            lines.append(f"  b{b} -> b{s};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- reaching definitions ----------------------------------------------------

ENTRY_DEF = -1  # pseudo definition: value flows in from method entry


def reaching_defs(method: MethodDef) -> dict:
    """Map stmt id -> {local: frozenset of def stmt ids} holding before the stmt.

    ``ENTRY_DEF`` in a set means the local may still carry its value from
    method entry (parameters, ``this``, or an undefined local).
    """
    body = method.body
    if not body:
        return {}
    names = {THIS, *method.param_names, *(n for _, n in method.locals)}
    entry = {n: frozenset({ENTRY_DEF}) for n in names}
    ins = {0: entry}
    outs = {}
    work = deque([0])
    queued = {0}
    while work:
        sid = work.popleft()
        queued.discard(sid)
        cur = ins[sid]
        d = stmt_def(body[sid].form)
        out = dict(cur)
        if d is not None:
            out[d] = frozenset({sid})
        if outs.get(sid) == out:
            continue
        outs[sid] = out
        for s in stmt_successors(method, sid):
            if s == EXIT:
                continue
            prev = ins.get(s)
            if prev is None:
                new = out
            else:
                new = {n: prev.get(n, frozenset()) | out.get(n, frozenset()) for n in names}
            if prev != new or s not in outs:
                ins[s] = new
                if s not in queued:
                    queued.add(s)
                    work.append(s)
    return ins


def all_branch_sites(program: Program, diagnostics: Optional[list] = None) -> list:
    sites = []
    for m in sorted(program.methods(), key=lambda m: m.key):
        sites.extend(extract_branch_sites(build_cfg(m), diagnostics))
    return sites


def control_dependences(method: MethodDef) -> dict:
    """Map stmt id -> frozenset of conditional stmt ids it is directly control dependent on.

    ``d`` depends on conditional ``c`` when ``d`` post-dominates one successor
    of ``c`` but does not strictly post-dominate ``c`` itself.
    """
    body = method.body
    if not body:
        return {}
    rev = {EXIT: []}
    for st in body:
        rev.setdefault(st.id, [])
    for st in body:
        for s in stmt_successors(method, st.id):
            rev[s].append(st.id)
    ipdom = dominators(rev, EXIT)

    def pdom_chain(n):
        # n and all its post-dominators, excluding EXIT
        out = []
        while n is not None and n != EXIT:
            out.append(n)
            n = ipdom.get(n)
        return out

    deps = {}
    for st in body:
        if not isinstance(st.form, Cond) or st.id not in ipdom:
            continue
        strict = set(pdom_chain(st.id)[1:])
        for s in set(stmt_successors(method, st.id)):
            if s == EXIT or s not in ipdom:
                continue
            for d in pdom_chain(s):
                if d in strict:
                    break
                deps.setdefault(d, set()).add(st.id)
    return {k: frozenset(v) for k, v in deps.items()}
