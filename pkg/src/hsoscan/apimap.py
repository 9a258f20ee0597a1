"""Declarative API catalogs: sensitive, system, trigger categories, sources, sinks."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Union

TRIGGER_CATEGORIES = (
    "Time", "SystemProperties", "Location", "SMS", "PackageManager", "Miscellaneous",
)
MISC = "Miscellaneous"

CATALOG_FILES = {
    "sensitive": ("signature", "permission"),
    "system": ("signature_or_field", "kind"),
    "triggers": ("signature_or_field", "category"),
    "sources": ("signature", "origin"),
    "sinks": ("signature",),
}


class CatalogError(Exception):
    def __init__(self, file, line: int, message: str):
        super().__init__(f"{file}:{line}: {message}")
        self.file = str(file)
        self.line = line
        self.message = message


@dataclass(frozen=True)
class ApiCatalog:
    sensitive: Mapping[str, frozenset]
    system_apis: frozenset
    system_properties: frozenset
    trigger_categories: Mapping[str, str]
    sources: Mapping[str, str]  # signature -> "default" | "extended"
    sinks: frozenset

    @property
    def system(self) -> frozenset:
        return self.system_apis | self.system_properties

    def is_sensitive(self, sig: str) -> bool:
        return sig in self.sensitive

    def is_system(self, ref: str) -> bool:
        return ref in self.system_apis or ref in self.system_properties

    def is_system_property(self, ref: str) -> bool:
        return ref in self.system_properties

    def source_set(self, mode: str = "default") -> frozenset:
        if mode == "default":
            return frozenset(s for s, o in self.sources.items() if o == "default")
        if mode in ("extended", "default+extended"):
            return frozenset(self.sources)
        raise ValueError(f"unknown source mode {mode!r}")

    def extended_sources(self) -> frozenset:
        return frozenset(s for s, o in self.sources.items() if o == "extended")


def classify_trigger_origin(catalog: ApiCatalog, origin: str) -> str:
    return catalog.trigger_categories.get(origin, MISC)


def categorize(catalog: ApiCatalog, refs) -> frozenset:
    """Trigger categories of a set of origins; Miscellaneous only when nothing more specific applies."""
    cats = {classify_trigger_origin(catalog, r) for r in refs}
    if len(cats) > 1:
        cats.discard(MISC)
    return frozenset(cats)


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("hsoscan") / "data" / f"{name}.csv"))


def _rows(name: str, path) -> list:
    header = CATALOG_FILES[name]
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CatalogError(path, 0, f"cannot read catalog: {exc.strerror or exc}") from None
    reader = csv.reader(io.StringIO(text))
    rows = []
    got_header = False
    for lineno, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        cells = tuple(c.strip() for c in row)
        if not got_header:
            if cells != header:
                raise CatalogError(path, lineno, f"expected header {','.join(header)}")
            got_header = True
            continue
        if len(cells) != len(header) or not all(cells):
            raise CatalogError(path, lineno, f"expected {len(header)} non-empty columns")
        rows.append((lineno, cells))
    if not got_header:
        raise CatalogError(path, 1, f"missing header {','.join(header)}")
    return rows


def load_catalog(paths: Union[None, str, os.PathLike, Mapping[str, object]] = None) -> ApiCatalog:
    """Load catalogs from a directory or a ``{name: path}`` mapping.

    Files absent from ``paths`` fall back to the bundled defaults.
    Sensitive signatures are always folded into the system set.
    """
    chosen = {name: bundled_path(name) for name in CATALOG_FILES}
    if isinstance(paths, Mapping):
        unknown = set(paths) - set(CATALOG_FILES)
        if unknown:
            raise CatalogError(sorted(unknown)[0], 0, "unknown catalog name")
        chosen.update({k: Path(v) for k, v in paths.items()})
    elif paths is not None:
        base = Path(paths)
        if not base.is_dir():
            raise CatalogError(base, 0, "catalog directory does not exist")
        for name in CATALOG_FILES:
            if (base / f"{name}.csv").exists():
                chosen[name] = base / f"{name}.csv"

    sensitive: dict = {}
    for _, (sig, perm) in _rows("sensitive", chosen["sensitive"]):
        sensitive.setdefault(sig, set()).add(perm)

    apis, props = set(), set()
    for lineno, (ref, kind) in _rows("system", chosen["system"]):
        if kind == "api":
            apis.add(ref)
        elif kind == "property":
            props.add(ref)
        else:
            raise CatalogError(chosen["system"], lineno, f"unknown kind {kind!r}")
    apis |= set(sensitive) - props

    triggers = {}
    for lineno, (ref, cat) in _rows("triggers", chosen["triggers"]):
        if cat not in TRIGGER_CATEGORIES:
            raise CatalogError(chosen["triggers"], lineno, f"unknown category {cat!r}")
        if triggers.get(ref, cat) != cat:
            raise CatalogError(chosen["triggers"], lineno, f"conflicting category for {ref}")
        triggers[ref] = cat

    sources = {}
    for lineno, (sig, origin) in _rows("sources", chosen["sources"]):
        if origin not in ("default", "extended"):
            raise CatalogError(chosen["sources"], lineno, f"unknown origin {origin!r}")
        if sources.get(sig) != "default":
            sources[sig] = origin

    sinks = frozenset(sig for _, (sig,) in _rows("sinks", chosen["sinks"]))
    return ApiCatalog(
        sensitive={k: frozenset(v) for k, v in sorted(sensitive.items())},
        system_apis=frozenset(apis),
        system_properties=frozenset(props),
        trigger_categories=dict(sorted(triggers.items())),
        sources=dict(sorted(sources.items())),
        sinks=sinks,
    )


_DEFAULT: Optional[ApiCatalog] = None


def default_catalog() -> ApiCatalog:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_catalog()
    return _DEFAULT
