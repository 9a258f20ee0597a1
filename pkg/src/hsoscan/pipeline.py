"""End-to-end analysis of one parsed program."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .apimap import ApiCatalog, default_catalog
from .graphs import all_branch_sites, build_callgraph
from .hsb import locate_hsbs
from .ir import Program, lint_program
from .screen import screen_all
from .taint import detect_hsdf, taint_analyze
from .trigger import DEFAULT_BUDGET, AnalysisContext, infer_trigger


@dataclass
class AnalysisResult:
    program: Program
    findings: list
    hsdfs: list
    flows: Optional[list]
    stats: dict
    diagnostics: list = field(default_factory=list)

    @property
    def suspicious(self) -> list:
        return [f for f in self.findings if f.suspicious]


def compute_stats(program: Program, sites, candidates, findings, flows, hsdfs) -> dict:
    conventional = {}
    for f in findings:
        if not f.suspicious:
            conventional[f.category] = conventional.get(f.category, 0) + 1
    return {
        "methods": sum(1 for _ in program.methods()),
        "branchSites": len(sites),
        "hsbCandidates": len(candidates),
        "hsos": len(findings),
        "conventionalByCategory": dict(sorted(conventional.items())),
        "suspicious": sum(1 for f in findings if f.suspicious),
        "taintFlows": len(flows) if flows is not None else 0,
        "hsdfs": len(hsdfs),
    }


def analyze(program: Program, catalog: Optional[ApiCatalog] = None, rules=(),
            taint: bool = False, source_mode: str = "default",
            budget: Optional[int] = DEFAULT_BUDGET, rule2: str = "syntactic") -> AnalysisResult:
    """Locate branches, infer triggers, screen, and optionally run taint."""
    catalog = catalog or default_catalog()
    diagnostics = list(lint_program(program))
    cg = build_callgraph(program)
    sites = all_branch_sites(program, diagnostics)
    candidates = locate_hsbs(program, cg, catalog, sites, rule2=rule2)
    ctx = AnalysisContext(program, cg, catalog)
    hsos = []
    for cand in candidates:
        inf = infer_trigger(program, cg, catalog, cand, budget, ctx)
        if inf.exhausted:
            diagnostics.append(f"budget-exhausted {cand.method}:{cand.site.cond_stmt} "
                               f"after {inf.visited} triples")
        if inf.is_hso:
            hsos.append(inf)
    findings = screen_all(hsos, rules, program, catalog)
    flows = None
    hsdfs = []
    if taint:
        flows = taint_analyze(program, cg, catalog, source_mode)
        hsdfs = detect_hsdf(flows, findings)
    stats = compute_stats(program, sites, candidates, findings, flows, hsdfs)
    return AnalysisResult(program, findings, hsdfs, flows, stats, diagnostics)
