"""Hidden sensitive branch location.

A branch arm qualifies when it reaches sensitive APIs its sibling does not
(rule 1) and touches none of the locals read by the condition (rule 2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .apimap import ApiCatalog
from .graphs import (
    ENTRY_DEF, BranchSite, CallGraph, all_branch_sites, reachable_methods, reaching_defs,
)
from .ir import Invoke, Program, lookup_method, stmt_def, stmt_uses

ARMS = ("then", "else")


@dataclass(frozen=True)
class HsbCandidate:
    site: BranchSite
    branch: str
    hsb_apis: frozenset
    sibling_apis: frozenset

    @property
    def distinctive(self) -> frozenset:
        return self.hsb_apis - self.sibling_apis

    @property
    def method(self) -> str:
        return self.site.method

    @property
    def region(self) -> frozenset:
        return self.site.region(self.branch)


def collect_branch_sensitive_apis(program: Program, cg: CallGraph, catalog: ApiCatalog,
                                  method: str, region) -> frozenset:
    m = lookup_method(program, method)
    calls = [sid for sid in region if isinstance(m.body[sid].form, Invoke)]
    reached = reachable_methods(cg, method, calls)
    return frozenset(sig for sig in reached if catalog.is_sensitive(sig))


def vars_used(program: Program, method: str, region) -> frozenset:
    """Every local read or written by a statement of the region."""
    m = lookup_method(program, method)
    out = set()
    for sid in region:
        form = m.body[sid].form
        out.update(stmt_uses(form))
        d = stmt_def(form)
        if d:
            out.add(d)
    return frozenset(out)


def condition_closure(program: Program, site: BranchSite) -> frozenset:
    """Condition locals plus every local feeding them intra-procedurally."""
    m = lookup_method(program, site.method)
    rd = reaching_defs(m)
    out = set()
    work = [(site.cond_stmt, v) for v in site.cond_vars]
    seen = set()
    while work:
        sid, var = work.pop()
        if (sid, var) in seen:
            continue
        seen.add((sid, var))
        out.add(var)
        for d in rd.get(sid, {}).get(var, ()):
            if d == ENTRY_DEF:
                continue
            for used in stmt_uses(m.body[d].form):
                work.append((d, used))
    return frozenset(out)


def locate_hsbs(program: Program, cg: CallGraph, catalog: ApiCatalog,
                sites: Optional[list] = None, rule2: str = "syntactic",
                diagnostics: Optional[list] = None) -> list:
    if rule2 not in ("syntactic", "closure"):
        raise ValueError(f"unknown rule2 mode {rule2!r}")
    if sites is None:
        sites = all_branch_sites(program, diagnostics)
    sites = sorted(sites, key=lambda s: (s.method, s.cond_stmt))
    out = []
    for site in sites:
        apis = {arm: collect_branch_sensitive_apis(program, cg, catalog, site.method,
                                                   site.region(arm))
                for arm in ARMS}
        cond_vars = site.cond_vars if rule2 == "syntactic" else condition_closure(program, site)
        for arm, other in (("then", "else"), ("else", "then")):
            if not apis[arm] - apis[other]:
                continue
            if cond_vars & vars_used(program, site.method, site.region(arm)):
                continue
            out.append(HsbCandidate(site, arm, apis[arm], apis[other]))
    return out
