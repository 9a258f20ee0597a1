"""Stable JSON and text renderings of analysis results."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from . import __version__

FORMATS = ("json", "text")
TOOL_VERSION = __version__


class ReportIOError(OSError):
    pass


def _loc(method: str, stmt: int) -> str:
    return f"{method}:{stmt}"


def render_hso(finding) -> dict:
    exp = finding.explanation
    out = {
        "method": exp["method"],
        "methodKind": exp["methodKind"],
        "condStmt": finding.inference.candidate.site.cond_stmt,
        "condition": exp["condition"],
        "arm": exp["arm"],
        "hiddenSensitiveApis": list(exp["hiddenSensitiveApis"]),
        "distinctiveApis": list(exp["distinctiveApis"]),
        "trigger": {
            "origins": [dict(o) for o in exp["triggerOrigins"]],
            "categories": list(exp["categories"]),
            "ctb": list(exp["ctb"]),
        },
        "verdict": finding.verdict,
    }
    if not finding.suspicious:
        out["category"] = finding.category
    return out


def render_flow(flow) -> dict:
    sm, ss, ssig = flow.source
    km, ks, ksig, arg = flow.sink
    return {
        "source": {"method": sm, "stmt": ss, "signature": ssig},
        "sink": {"method": km, "stmt": ks, "signature": ksig, "arg": arg},
        "path": [_loc(m, s) for m, s in flow.path],
    }


def render_hsdf(hsdf) -> dict:
    out = render_flow(hsdf.flow)
    out["hsoIndex"] = hsdf.hso_index
    return out


def build_report(findings, hsdfs, stats: dict, app_id: str = "", diagnostics=()) -> dict:
    return {
        "appId": app_id,
        "toolVersion": TOOL_VERSION,
        "stats": {
            "methods": stats["methods"],
            "branchSites": stats["branchSites"],
            "hsbCandidates": stats["hsbCandidates"],
            "hsos": stats["hsos"],
            "conventionalByCategory": dict(sorted(stats["conventionalByCategory"].items())),
            "suspicious": stats["suspicious"],
            "taintFlows": stats["taintFlows"],
            "hsdfs": stats["hsdfs"],
        },
        "hsos": [render_hso(f) for f in findings],
        "hsdfs": [render_hsdf(h) for h in hsdfs],
        "diagnostics": list(diagnostics),
    }


def _text(report: dict) -> str:
    st = report["stats"]
    lines = [
        f"app {report['appId']} (tool {report['toolVersion']})",
        f"methods={st['methods']} sites={st['branchSites']} candidates={st['hsbCandidates']} "
        f"hsos={st['hsos']} suspicious={st['suspicious']} flows={st['taintFlows']} hsdfs={st['hsdfs']}",
    ]
    for cat, n in st["conventionalByCategory"].items():
        lines.append(f"conventional {cat}={n}")
    for i, h in enumerate(report["hsos"]):
        verdict = h["verdict"] + (f"({h['category']})" if "category" in h else "")
        lines.append(f"hso[{i}] {verdict} {h['method']}:{h['condStmt']} arm={h['arm']}")
        lines.append(f"  condition: {h['condition']}")
        lines.append(f"  categories: {', '.join(h['trigger']['categories']) or '-'}")
        for o in h["trigger"]["origins"]:
            cat = f" [{o['category']}]" if "category" in o else ""
            lines.append(f"  origin {o['kind']} {o['ref']}{cat}")
        for api in h["hiddenSensitiveApis"]:
            lines.append(f"  hidden {api}")
        for c in h["trigger"]["ctb"]:
            lines.append(f"  ctb {c}")
    for d in report["hsdfs"]:
        lines.append(f"hsdf hso[{d['hsoIndex']}] {d['source']['signature']} -> "
                     f"{d['sink']['signature']}#{d['sink']['arg']} via {' > '.join(d['path'])}")
    for diag in report["diagnostics"]:
        lines.append(f"diagnostic {diag}")
    return "\n".join(lines) + "\n"


def serialize(report: dict, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(report, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if fmt == "text":
        return _text(report).encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


def emit_report(findings, hsdfs, stats: dict, format: str = "json", app_id: str = "",
                diagnostics=()) -> bytes:
    return serialize(build_report(findings, hsdfs, stats, app_id, diagnostics), format)


def report_for(result, app_id: str, format: str = "json") -> bytes:
    return emit_report(result.findings, result.hsdfs, result.stats, format, app_id,
                       result.diagnostics)


def write_report(data: bytes, path) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise ReportIOError(f"cannot write report to {path}: {exc.strerror or exc}") from None


def schema_path() -> Path:
    return Path(str(resources.files("hsoscan") / "data" / "report.schema.json"))


def load_schema() -> dict:
    return json.loads(schema_path().read_text(encoding="utf-8"))
