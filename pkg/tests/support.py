"""Shared helpers for the test modules."""

from hsoscan.corpus import listing_path
from hsoscan.graphs import build_callgraph
from hsoscan.ir import parse_program


def load(stem):
    return parse_program(listing_path(stem).read_text(encoding="utf-8"), stem)


def prog(text, app_id="t"):
    return parse_program(text, app_id)


def method(body, locals_=("c", "x", "y"), kind="plain", params="", extra=""):
    """Wrap statement lines into a one-method program text."""
    decls = "".join(f"    local java.lang.Object {n};\n" for n in locals_)
    stmts = "".join(f"    {line};\n" for line in body)
    return (f"class A {{\n{extra}  {kind} method void m({params}) {{\n{decls}{stmts}  }}\n}}\n")


def with_cg(text):
    p = prog(text)
    return p, build_callgraph(p)
