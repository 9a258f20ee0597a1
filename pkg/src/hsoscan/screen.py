"""Conventional-usage screening and explanation payloads."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fnmatch import fnmatchcase
from importlib import resources
from pathlib import Path
from typing import Optional

from .apimap import ApiCatalog, classify_trigger_origin
from .ir import Program, format_stmt, lookup_method
from .trigger import TriggerInference, is_system_origin, origin_ref

BUILTIN_CATEGORIES = (
    "SdkVersion", "UserInterface", "File", "Permission", "Network", "Intent",
    "SharedPreferences",
)
CONTEXTS = ("none", "callback", "lifecycle")
SUSPICIOUS = "Suspicious"
CONVENTIONAL = "Conventional"


class WhitelistError(Exception):
    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer
        self.message = message


@dataclass(frozen=True)
class ConventionalRule:
    category: str
    origin_patterns: tuple
    context: str = "none"

    @property
    def is_custom(self) -> bool:
        return self.category not in BUILTIN_CATEGORIES

    def covers(self, ref: str) -> bool:
        return any(fnmatchcase(ref, pat) for pat in self.origin_patterns)

    def context_holds(self, method_kind: str) -> bool:
        return self.context == "none" or self.context == method_kind


@dataclass(frozen=True)
class HsoFinding:
    inference: TriggerInference
    verdict: str
    category: Optional[str]
    explanation: dict

    @property
    def suspicious(self) -> bool:
        return self.verdict == SUSPICIOUS

    @property
    def method(self) -> str:
        return self.inference.candidate.method

    @property
    def region(self) -> frozenset:
        return self.inference.candidate.region


def parse_whitelist(data, source: str = "<whitelist>") -> list:
    if not isinstance(data, list):
        raise WhitelistError(f"{source}#", "expected a JSON array of rules")
    rules = []
    for i, item in enumerate(data):
        ptr = f"{source}#/{i}"
        if not isinstance(item, dict):
            raise WhitelistError(ptr, "rule must be an object")
        unknown = set(item) - {"category", "originPatterns", "context"}
        if unknown:
            raise WhitelistError(ptr, f"unknown keys {sorted(unknown)}")
        category = item.get("category")
        if not isinstance(category, str) or not category:
            raise WhitelistError(f"{ptr}/category", "category must be a non-empty string")
        patterns = item.get("originPatterns")
        if (not isinstance(patterns, list) or not patterns
                or not all(isinstance(p, str) and p for p in patterns)):
            raise WhitelistError(f"{ptr}/originPatterns", "originPatterns must be a non-empty list of strings")
        context = item.get("context", "none")
        if context not in CONTEXTS:
            raise WhitelistError(f"{ptr}/context", f"context must be one of {list(CONTEXTS)}")
        rules.append(ConventionalRule(category, tuple(patterns), context))
    return rules


def load_whitelist(path) -> list:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise WhitelistError(str(path), f"cannot read whitelist: {exc.strerror or exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WhitelistError(f"{path}:{exc.lineno}", exc.msg) from None
    return parse_whitelist(data, str(path))


def default_whitelist_path() -> Path:
    return Path(str(resources.files("hsoscan") / "data" / "whitelist.json"))


def default_whitelist() -> list:
    return load_whitelist(default_whitelist_path())


def explain(inference: TriggerInference, program: Program, catalog: ApiCatalog) -> dict:
    cand = inference.candidate
    m = lookup_method(program, cand.method)
    origins = []
    for o in sorted(inference.origins, key=lambda o: o.key()):
        kind, value = o.key()
        entry = {"kind": kind, "ref": value}
        if is_system_origin(o):
            entry["category"] = classify_trigger_origin(catalog, origin_ref(o))
        origins.append(entry)
    ctb = []
    for meth, sid in inference.ctb:
        form = lookup_method(program, meth).body[sid].form
        ctb.append(f"{meth}:{sid}: {format_stmt(form)}")
    return {
        "method": cand.method,
        "methodKind": m.kind,
        "arm": cand.branch,
        "condition": format_stmt(m.body[cand.site.cond_stmt].form),
        "triggerOrigins": origins,
        "categories": sorted(inference.categories),
        "ctb": ctb,
        "hiddenSensitiveApis": sorted(cand.hsb_apis),
        "distinctiveApis": sorted(cand.distinctive),
    }


def screen_hso(inference: TriggerInference, rules, program: Program,
               catalog: ApiCatalog) -> HsoFinding:
    """Conventional iff one rule covers every system origin in its context."""
    refs = inference.system_refs()
    kind = lookup_method(program, inference.candidate.method).kind
    matched = sorted({r.category for r in rules
                      if refs and r.context_holds(kind) and all(r.covers(x) for x in refs)})
    explanation = explain(inference, program, catalog)
    if matched:
        return HsoFinding(inference, CONVENTIONAL, matched[0], explanation)
    return HsoFinding(inference, SUSPICIOUS, None, explanation)


def screen_all(inferences, rules, program: Program, catalog: ApiCatalog) -> list:
    return [screen_hso(inf, rules, program, catalog) for inf in inferences]
