"""Compact three-address IR: data model, parser, pretty-printer and lint.

A program file holds classes; each class holds fields and methods; each
method body is an ordered list of statements with dense integer ids.
Conditionals always carry two explicit successor labels after parsing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

__all__ = [
    "IRError", "ParseError", "DuplicateSignature", "UnknownLabel",
    "Const", "Local", "FieldLoad", "BinOp", "CallExpr",
    "Assign", "Invoke", "Cond", "Goto", "Return", "FieldStore", "Nop",
    "Statement", "Signature", "MethodDef", "ClassDef", "Program",
    "parse_program", "format_program", "format_stmt", "lookup_method",
    "stmt_uses", "stmt_def", "stmt_successors", "lint_program",
    "EXIT", "THIS",
]

THIS = "this"
EXIT = -1  # successor id standing for "leaves the method"

ARITH_OPS = {"+": "add", "-": "sub", "*": "mul", "&&": "and", "||": "or"}
REL_OPS = {"==": "eq", "!=": "ne", "<": "lt", "<=": "le", ">": "gt", ">=": "ge"}
OP_SYMBOLS = {v: k for k, v in {**ARITH_OPS, **REL_OPS}.items()}
NEGATED = {"eq": "ne", "ne": "eq", "lt": "ge", "ge": "lt", "gt": "le", "le": "gt"}
METHOD_KINDS = ("plain", "lifecycle", "callback")
CALL_KINDS = ("static", "virtual", "special")
KEYWORDS = {
    "class", "extends", "implements", "field", "method", "local", "call",
    "if", "goto", "else", "return", "nop", "on", "true", "false",
    *METHOD_KINDS, *CALL_KINDS,
}


class IRError(Exception):
    pass


class ParseError(IRError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class DuplicateSignature(IRError):
    def __init__(self, signature: str):
        super().__init__(f"duplicate method signature {signature}")
        self.signature = signature


class UnknownLabel(IRError):
    def __init__(self, method: str, label: str):
        super().__init__(f"{method}: unknown label {label}")
        self.method = method
        self.label = label


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: Union[int, str, bool]
    # bool is an int subclass; keep the kind so Const(True) != Const(1)
    kind: str = field(init=False, repr=False)

    def __post_init__(self):
        if isinstance(self.value, bool):
            kind = "bool"
        elif isinstance(self.value, int):
            kind = "int"
        elif isinstance(self.value, str):
            kind = "str"
        else:
            raise TypeError(f"unsupported literal {self.value!r}")
        object.__setattr__(self, "kind", kind)

    def render(self) -> str:
        if self.kind == "bool":
            return "true" if self.value else "false"
        if self.kind == "int":
            return str(self.value)
        escaped = self.value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        return f'"{escaped}"'


@dataclass(frozen=True)
class Local:
    name: str


@dataclass(frozen=True)
class FieldLoad:
    """Read of ``owner#field``; ``receiver`` is None for class-qualified reads."""

    receiver: Optional[Local]
    owner: str
    field: str

    @property
    def ref(self) -> str:
        return f"{self.owner}#{self.field}"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Union[Local, Const]
    right: Union[Local, Const]


@dataclass(frozen=True)
class CallExpr:
    kind: str
    owner: str
    name: str
    receiver: Optional[Local]
    args: tuple = ()

    @property
    def callee(self) -> str:
        return f"{self.owner}#{self.name}"


Expr = Union[Const, Local, FieldLoad, BinOp, CallExpr]
Operand = Union[Local, Const]


# -- statements --------------------------------------------------------------

@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr


@dataclass(frozen=True)
class Invoke:
    call: CallExpr
    target: Optional[str] = None


@dataclass(frozen=True)
class Cond:
    cond: Union[Local, BinOp]
    then_label: str
    else_label: str


@dataclass(frozen=True)
class Goto:
    label: str


@dataclass(frozen=True)
class Return:
    value: Optional[str] = None


@dataclass(frozen=True)
class FieldStore:
    receiver: Optional[Local]
    owner: str
    field: str
    source: str

    @property
    def ref(self) -> str:
        return f"{self.owner}#{self.field}"


@dataclass(frozen=True)
class Nop:
    pass


Form = Union[Assign, Invoke, Cond, Goto, Return, FieldStore, Nop]


@dataclass(frozen=True)
class Statement:
    id: int
    form: Form
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Signature:
    owner: str
    name: str
    params: tuple
    ret: str

    @property
    def key(self) -> str:
        return f"{self.owner}#{self.name}"

    def __str__(self) -> str:
        return self.key


@dataclass(frozen=True)
class MethodDef:
    signature: Signature
    kind: str
    param_names: tuple
    locals: tuple  # ((type, name), ...)
    body: tuple
    labels: dict = field(hash=False)

    @property
    def key(self) -> str:
        return self.signature.key

    @property
    def is_entry(self) -> bool:
        return self.kind in ("lifecycle", "callback")

    def label_of(self, stmt_id: int) -> Optional[str]:
        for name, sid in self.labels.items():
            if sid == stmt_id:
                return name
        return None

    def target(self, label: str) -> int:
        return self.labels[label]

    def local_type(self, name: str) -> Optional[str]:
        if name == THIS:
            return self.signature.owner
        for ty, pname in zip(self.signature.params, self.param_names):
            if pname == name:
                return ty
        for ty, lname in self.locals:
            if lname == name:
                return ty
        return None

    def param_index(self, name: str) -> Optional[int]:
        """Index of a parameter local; ``this`` is -1; None for plain locals."""
        if name == THIS:
            return -1
        if name in self.param_names:
            return self.param_names.index(name)
        return None


@dataclass(frozen=True)
class ClassDef:
    name: str
    superclass: Optional[str]
    interfaces: tuple
    fields: tuple  # ((type, name), ...)
    methods: tuple


@dataclass(frozen=True)
class Program:
    classes: tuple
    app_id: str = ""
    index: dict = field(default_factory=dict, hash=False, compare=False, repr=False)

    def methods(self) -> Iterator[MethodDef]:
        for cls in self.classes:
            yield from cls.methods

    def class_named(self, name: str) -> Optional[ClassDef]:
        for cls in self.classes:
            if cls.name == name:
                return cls
        return None

    def is_external_class(self, name: str) -> bool:
        return self.class_named(name) is None

    def resolve_field(self, owner: str, name: str) -> str:
        """Declaring class of ``owner#name`` walking superclasses; ``owner`` if none declares it."""
        seen = set()
        cur = owner
        while cur is not None and cur not in seen:
            seen.add(cur)
            cls = self.class_named(cur)
            if cls is None:
                break
            if any(fname == name for _, fname in cls.fields):
                return cur
            cur = cls.superclass
        return owner


def lookup_method(program: Program, sig) -> Optional[MethodDef]:
    """Return the internal method for a signature (key string or Signature)."""
    key = sig.key if isinstance(sig, Signature) else str(sig)
    return program.index.get(key)


# -- def/use helpers ---------------------------------------------------------

def _operand_locals(*ops) -> list:
    return [o.name for o in ops if isinstance(o, Local)]


def expr_uses(expr) -> list:
    if isinstance(expr, Local):
        return [expr.name]
    if isinstance(expr, FieldLoad):
        return _operand_locals(expr.receiver) if expr.receiver else []
    if isinstance(expr, BinOp):
        return _operand_locals(expr.left, expr.right)
    if isinstance(expr, CallExpr):
        recv = [expr.receiver.name] if expr.receiver else []
        return recv + _operand_locals(*expr.args)
    return []


def stmt_uses(form: Form) -> list:
    """Locals read by a statement, in operand order (may repeat)."""
    if isinstance(form, Assign):
        return expr_uses(form.expr)
    if isinstance(form, Invoke):
        return expr_uses(form.call)
    if isinstance(form, Cond):
        return expr_uses(form.cond)
    if isinstance(form, Return):
        return [form.value] if form.value else []
    if isinstance(form, FieldStore):
        recv = [form.receiver.name] if form.receiver else []
        return recv + [form.source]
    return []


def stmt_def(form: Form) -> Optional[str]:
    if isinstance(form, Assign):
        return form.target
    if isinstance(form, Invoke):
        return form.target
    return None


def stmt_successors(method: MethodDef, stmt_id: int) -> list:
    """Statement-level successors; ``EXIT`` marks leaving the method."""
    form = method.body[stmt_id].form
    if isinstance(form, Cond):
        return [method.labels[form.then_label], method.labels[form.else_label]]
    if isinstance(form, Goto):
        return [method.labels[form.label]]
    if isinstance(form, Return):
        return [EXIT]
    nxt = stmt_id + 1
    return [nxt] if nxt < len(method.body) else [EXIT]


# -- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)*)
  | (?P<op>==|!=|<=|>=|&&|\|\||[-+*<>=;:,(){}\[\]\#])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str  # name, int, string, op, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    prev_sig = None
    while pos < len(text):
        ch = text[pos]
        col = pos - line_start + 1
        # '#' opens a comment unless glued to a name (Class#method)
        if ch == "#" and (pos == 0 or text[pos - 1] in " \t\n\r"):
            end = text.find("\n", pos)
            pos = len(text) if end < 0 else end
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(line, col, f"unexpected character {ch!r}")
        kind = m.lastgroup
        tok_text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            if kind == "string":
                tok_text = _unescape(tok_text[1:-1], line, col)
            tok = Token(kind, tok_text, line, col)
            # fold unary minus into an int literal where no operand precedes it
            if (kind == "int" and prev_sig is not None and prev_sig.kind == "op"
                    and prev_sig.text == "-" and tokens
                    and (len(tokens) < 2 or not _is_value(tokens[-2]))):
                tokens.pop()
                tok = Token("int", "-" + tok_text, prev_sig.line, prev_sig.col)
            tokens.append(tok)
            prev_sig = tok
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _is_value(tok: Token) -> bool:
    if tok.kind in ("int", "string"):
        return True
    if tok.kind == "name":
        return tok.text not in KEYWORDS or tok.text in ("true", "false")
    return tok.kind == "op" and tok.text == ")"


def _unescape(body: str, line: int, col: int) -> str:
    out, i = [], 0
    while i < len(body):
        c = body[i]
        if c == "\\":
            nxt = body[i + 1]
            mapping = {"n": "\n", '"': '"', "\\": "\\", "t": "\t"}
            if nxt not in mapping:
                raise ParseError(line, col, f"bad escape \\{nxt}")
            out.append(mapping[nxt])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise ParseError(tok.line, tok.col, msg)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "name") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, got {self.tok.text or 'end of input'!r}")
        tok = self.tok
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def name(self, what: str = "identifier", dotted: bool = True) -> str:
        tok = self.tok
        if tok.kind != "name" or tok.text in KEYWORDS:
            self.error(f"expected {what}, got {tok.text or 'end of input'!r}")
        if not dotted and "." in tok.text:
            self.error(f"expected simple {what}, got {tok.text!r}")
        self.i += 1
        return tok.text

    def type_(self) -> str:
        base = self.name("type")
        while self.at("["):
            self.expect("[")
            self.expect("]")
            base += "[]"
        return base

    # program := class*
    def program(self) -> list:
        classes = []
        while self.tok.kind != "eof":
            classes.append(self.class_())
        return classes

    def class_(self) -> ClassDef:
        self.expect("class")
        name = self.name("class name")
        superclass = None
        interfaces = []
        if self.accept("extends"):
            superclass = self.name("superclass")
        if self.accept("implements"):
            interfaces.append(self.name("interface"))
            while self.accept(","):
                interfaces.append(self.name("interface"))
        self.expect("{")
        fields, methods = [], []
        field_names, method_names = set(), set()
        while not self.at("}"):
            if self.at("field"):
                tok = self.expect("field")
                ty = self.type_()
                fname = self.name("field name", dotted=False)
                self.expect(";")
                if fname in field_names:
                    self.error(f"duplicate field {fname} in {name}", tok)
                field_names.add(fname)
                fields.append((ty, fname))
            elif self.tok.text in METHOD_KINDS:
                method = self.method(name, fields)
                if method.signature.name in method_names:
                    raise DuplicateSignature(method.key)
                method_names.add(method.signature.name)
                methods.append(method)
            else:
                self.error(f"expected member, got {self.tok.text or 'end of input'!r}")
        self.expect("}")
        return ClassDef(name, superclass, tuple(interfaces), tuple(fields), tuple(methods))

    def method(self, owner: str, fields) -> MethodDef:
        kind = self.tok.text
        self.i += 1
        self.expect("method")
        ret = self.type_()
        mname = self.name("method name", dotted=False)
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append((self.type_(), self.name("parameter", dotted=False)))
            while self.accept(","):
                params.append((self.type_(), self.name("parameter", dotted=False)))
        self.expect(")")
        self.expect("{")
        scope = {THIS: owner}
        for ty, pname in params:
            if pname in scope:
                self.error(f"duplicate parameter {pname}")
            scope[pname] = ty
        locals_ = []
        while self.at("local"):
            self.expect("local")
            ty = self.type_()
            tok = self.tok
            lname = self.name("local name", dotted=False)
            self.expect(";")
            if lname in scope:
                self.error(f"duplicate local {lname}", tok)
            scope[lname] = ty
            locals_.append((ty, lname))
        self._scope = scope
        body, labels, pending = [], {}, []
        while not self.at("}"):
            label = None
            if self.tok.kind == "name" and self.peek().kind == "op" and self.peek().text == ":":
                ltok = self.tok
                label = self.name("label", dotted=False)
                self.expect(":")
                if label in labels:
                    self.error(f"duplicate label {label}", ltok)
                labels[label] = len(body)
            line = self.tok.line
            form = self.core()
            self.expect(";")
            body.append(Statement(len(body), form, line))
        self.expect("}")
        sig = Signature(owner, mname, tuple(t for t, _ in params), ret)
        body = self._normalize(sig.key, body, labels)
        for st in body:
            for lab in _labels_of(st.form):
                if lab not in labels:
                    raise UnknownLabel(sig.key, lab)
        return MethodDef(sig, kind, tuple(n for _, n in params), tuple(locals_),
                         tuple(body), labels)

    def _normalize(self, key: str, body: list, labels: dict) -> list:
        """Rewrite single-target ifs into explicit two-target form."""
        out = []
        for st in body:
            form = st.form
            if isinstance(form, Cond) and form.else_label is None:
                nxt = st.id + 1
                if nxt >= len(body):
                    raise ParseError(st.line, 1, f"{key}: conditional falls off the end of the method")
                lab = next((n for n, sid in labels.items() if sid == nxt), None)
                if lab is None:
                    lab, k = f"_L{nxt}", 0
                    while lab in labels:
                        k += 1
                        lab = f"_L{nxt}_{k}"
                    labels[lab] = nxt
                form = Cond(form.cond, form.then_label, lab)
                st = Statement(st.id, form, st.line)
            out.append(st)
        return out

    def local(self, what: str = "local") -> Local:
        tok = self.tok
        name = self.name(what, dotted=False)
        if name not in self._scope:
            self.error(f"undeclared local {name}", tok)
        return Local(name)

    def operand(self) -> Operand:
        tok = self.tok
        if tok.kind == "int":
            self.i += 1
            return Const(int(tok.text))
        if tok.kind == "string":
            self.i += 1
            return Const(tok.text)
        if tok.kind == "name" and tok.text in ("true", "false"):
            self.i += 1
            return Const(tok.text == "true")
        return self.local("operand")

    def field_ref(self, dotted: str, tok: Token):
        recv_text, _, fname = dotted.rpartition(".")
        if recv_text in self._scope:
            return Local(recv_text), self._scope[recv_text], fname
        return None, recv_text, fname

    def core(self) -> Form:
        tok = self.tok
        if self.accept("nop"):
            return Nop()
        if self.accept("goto"):
            return Goto(self.name("label", dotted=False))
        if self.accept("return"):
            if self.at(";"):
                return Return()
            return Return(self.local().name)
        if self.accept("call"):
            return Invoke(self.callexpr())
        if self.accept("if"):
            cond = self.condexpr()
            self.expect("goto")
            then_label = self.name("label", dotted=False)
            else_label = None
            if self.accept("else"):
                else_label = self.name("label", dotted=False)
            return Cond(cond, then_label, else_label)
        if tok.kind == "name" and "." in tok.text:
            self.i += 1
            recv, owner, fname = self.field_ref(tok.text, tok)
            self.expect("=")
            return FieldStore(recv, owner, fname, self.local("source local").name)
        target = self.local("assignment target").name
        self.expect("=")
        return self.rhs(target)

    def rhs(self, target: str) -> Form:
        tok = self.tok
        if self.accept("call"):
            return Invoke(self.callexpr(), target)
        if tok.kind == "name" and "." in tok.text:
            self.i += 1
            recv, owner, fname = self.field_ref(tok.text, tok)
            return Assign(target, FieldLoad(recv, owner, fname))
        left = self.operand()
        op_tok = self.tok
        if op_tok.kind == "op" and (op_tok.text in ARITH_OPS or op_tok.text in REL_OPS):
            if isinstance(left, Const):
                self.error("left operand of a binary expression must be a local", tok)
            self.i += 1
            right = self.operand()
            op = ARITH_OPS.get(op_tok.text) or REL_OPS[op_tok.text]
            return Assign(target, BinOp(op, left, right))
        return Assign(target, left)

    def condexpr(self):
        left = self.operand()
        if self.tok.kind == "op" and self.tok.text in REL_OPS:
            op = REL_OPS[self.tok.text]
            self.i += 1
            return BinOp(op, left, self.operand())
        if isinstance(left, Const):
            self.error("condition must be a local or a comparison")
        return left

    def callexpr(self) -> CallExpr:
        tok = self.tok
        kind = tok.text
        if kind not in CALL_KINDS:
            self.error(f"expected call kind, got {kind!r}")
        self.i += 1
        owner = self.name("class name")
        self.expect("#")
        mname = self.name("method name", dotted=False)
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.operand())
            while self.accept(","):
                args.append(self.operand())
        self.expect(")")
        receiver = None
        if self.accept("on"):
            receiver = self.local("receiver")
        if kind == "static" and receiver is not None:
            self.error("static call cannot have a receiver", tok)
        if kind != "static" and receiver is None:
            self.error(f"{kind} call needs a receiver ('on <local>')", tok)
        return CallExpr(kind, owner, mname, receiver, tuple(args))


def _labels_of(form: Form) -> list:
    if isinstance(form, Cond):
        return [form.then_label, form.else_label]
    if isinstance(form, Goto):
        return [form.label]
    return []


def parse_program(text: str, app_id: str = "") -> Program:
    """Parse IR source into an indexed, immutable :class:`Program`."""
    classes = _Parser(text).program()
    seen = set()
    index = {}
    for cls in classes:
        if cls.name in seen:
            raise ParseError(0, 0, f"duplicate class {cls.name}")
        seen.add(cls.name)
        for m in cls.methods:
            if m.key in index:
                raise DuplicateSignature(m.key)
            index[m.key] = m
    return Program(tuple(classes), app_id, index)


# -- pretty printer ----------------------------------------------------------

def _operand(o) -> str:
    return o.render() if isinstance(o, Const) else o.name


def format_expr(expr) -> str:
    if isinstance(expr, Const):
        return expr.render()
    if isinstance(expr, Local):
        return expr.name
    if isinstance(expr, FieldLoad):
        recv = expr.receiver.name if expr.receiver else expr.owner
        return f"{recv}.{expr.field}"
    if isinstance(expr, BinOp):
        return f"{_operand(expr.left)} {OP_SYMBOLS[expr.op]} {_operand(expr.right)}"
    if isinstance(expr, CallExpr):
        args = ", ".join(_operand(a) for a in expr.args)
        text = f"call {expr.kind} {expr.callee}({args})"
        if expr.receiver:
            text += f" on {expr.receiver.name}"
        return text
    raise TypeError(expr)


def format_stmt(form: Form) -> str:
    if isinstance(form, Assign):
        return f"{form.target} = {format_expr(form.expr)}"
    if isinstance(form, Invoke):
        call = format_expr(form.call)
        return f"{form.target} = {call}" if form.target else call
    if isinstance(form, Cond):
        return f"if {format_expr(form.cond)} goto {form.then_label} else {form.else_label}"
    if isinstance(form, Goto):
        return f"goto {form.label}"
    if isinstance(form, Return):
        return f"return {form.value}" if form.value else "return"
    if isinstance(form, FieldStore):
        recv = form.receiver.name if form.receiver else form.owner
        return f"{recv}.{form.field} = {form.source}"
    if isinstance(form, Nop):
        return "nop"
    raise TypeError(form)


def format_program(program: Program) -> str:
    lines = []
    for cls in program.classes:
        head = f"class {cls.name}"
        if cls.superclass:
            head += f" extends {cls.superclass}"
        if cls.interfaces:
            head += " implements " + ", ".join(cls.interfaces)
        lines.append(head + " {")
        for ty, name in cls.fields:
            lines.append(f"  field {ty} {name};")
        for m in cls.methods:
            sig = m.signature
            params = ", ".join(f"{t} {n}" for t, n in zip(sig.params, m.param_names))
            lines.append(f"  {m.kind} method {sig.ret} {sig.name}({params}) {{")
            for ty, name in m.locals:
                lines.append(f"    local {ty} {name};")
            by_id = {sid: lab for lab, sid in m.labels.items()}
            for st in m.body:
                prefix = f"{by_id[st.id]}: " if st.id in by_id else ""
                lines.append(f"    {prefix}{format_stmt(st.form)};")
            lines.append("  }")
        lines.append("}")
    return "\n".join(lines) + "\n"


# -- lint --------------------------------------------------------------------

def lint_program(program: Program) -> list:
    """Warn about locals that may be read before any definition."""
    warnings = []
    for m in program.methods():
        warnings.extend(_lint_method(m))
    return warnings


def _lint_method(m: MethodDef) -> list:
    if not m.body:
        return []
    universe = {n for _, n in m.locals}
    initial = frozenset({THIS, *m.param_names})
    # must-defined sets; None = not yet reached
    defined_in = {0: initial}
    work = [0]
    out_sets = {}
    while work:
        sid = work.pop()
        cur = defined_in[sid]
        d = stmt_def(m.body[sid].form)
        out = cur | {d} if d else cur
        if out_sets.get(sid) == out:
            continue
        out_sets[sid] = out
        for s in stmt_successors(m, sid):
            if s == EXIT:
                continue
            prev = defined_in.get(s)
            new = out if prev is None else prev & out
            if prev is None or new != prev or s not in out_sets:
                defined_in[s] = new
                work.append(s)
    warnings = []
    for sid, cur in sorted(defined_in.items()):
        for name in stmt_uses(m.body[sid].form):
            if name in universe and name not in cur:
                warnings.append(f"{m.key}:{sid}: local {name} may be used before definition")
    return warnings
