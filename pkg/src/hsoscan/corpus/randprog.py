"""Seeded random IR programs for property tests and oracle runs.

Programs are generated structurally (sequences, if/else, while loops) so
every local is assigned before use and every statement can reach a return.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

# (signature, static, argument count)
TRIGGER_CALLS = (
    ("java.util.Calendar#get", False, 1),
    ("java.lang.System#currentTimeMillis", True, 0),
    ("android.telephony.TelephonyManager#getSimCountryIso", False, 0),
    ("android.content.pm.PackageManager#getInstalledApplications", False, 1),
    ("android.view.View#getId", False, 0),
    ("android.content.SharedPreferences#getInt", False, 2),
    ("android.widget.ListView#getCount", False, 0),
    ("android.telephony.SmsMessage#getOriginatingAddress", False, 0),
)
SENSITIVE_CALLS = (
    ("android.telephony.TelephonyManager#getDeviceId", False, 0),
    ("android.telephony.TelephonyManager#getLine1Number", False, 0),
    ("android.net.wifi.WifiManager#getConnectionInfo", False, 0),
    ("android.location.LocationManager#getLastKnownLocation", False, 1),
    ("android.hardware.Camera#open", True, 0),
    ("android.telephony.SmsManager#sendTextMessage", False, 3),
)
SINK_CALLS = (
    ("android.util.Log#d", True, 2),
    ("android.content.Intent#putExtra", False, 2),
)
PLAIN_CALLS = (
    ("java.lang.StringBuilder#append", False, 1),
    ("java.lang.String#equals", False, 1),
    ("java.util.List#isEmpty", False, 0),
    ("java.lang.Integer#parseInt", True, 1),
)
PROPERTIES = ("android.os.Build.FINGERPRINT", "android.os.Build$VERSION.SDK_INT")
OBJ = "java.lang.Object"


@dataclass
class _Method:
    cls: str
    name: str
    kind: str
    params: list
    slot: int
    lines: list = field(default_factory=list)
    locals_: list = field(default_factory=list)


class _Emitter:
    """Collects labelled lines; a label always lands on a real statement."""

    def __init__(self):
        self.lines = []
        self.pending = None
        self.count = 0

    def label(self, name: str):
        if self.pending is not None:
            self.stmt("nop")
        self.pending = name

    def stmt(self, text: str):
        self.lines.append((self.pending, text))
        self.pending = None
        self.count += 1


class _Gen:
    def __init__(self, seed: int, cyclic: bool, max_stmts: int, max_methods: int):
        self.rng = random.Random(seed)
        self.cyclic = cyclic
        self.max_stmts = max_stmts
        self.max_methods = max_methods
        self.used = 0
        self.labels = 0

    def fresh_label(self, tag: str) -> str:
        self.labels += 1
        return f"{tag}{self.labels}"

    def plan(self) -> list:
        rng = self.rng
        n = rng.randint(2, self.max_methods)
        methods = [_Method("App", "onCreate", "lifecycle", [], 0)]
        if n >= 3 and rng.random() < 0.5:
            methods.append(_Method("App", "onClick", "callback", ["v"], 0))
        slot = 1
        helper_names = []
        while len(methods) < n:
            cls = rng.choice(("App", "App", "Helper"))
            params = [f"p{i}" for i in range(rng.randint(0, 2))]
            name = f"m{slot}"
            methods.append(_Method(cls, name, "plain", params, slot))
            if cls == "Helper":
                helper_names.append((name, params, slot))
            slot += 1
        # overrides occupy the slot of the method they override
        for name, params, s in helper_names:
            if len(methods) < self.max_methods and rng.random() < 0.5:
                methods.append(_Method("HelperImpl", name, "plain", list(params), s))
        return methods

    def generate(self) -> str:
        methods = self.plan()
        self.methods = methods
        share = max(4, self.max_stmts // len(methods))
        for i, m in enumerate(methods):
            left = self.max_stmts - self.used - 3 * (len(methods) - i - 1)
            self.body(m, min(share, left))
        return self.render(methods)

    # -- bodies -------------------------------------------------------------

    def body(self, m: _Method, budget: int):
        em = _Emitter()
        self.cur = m
        self.em = em
        self.nlocals = 0
        defined = {"this", *m.params}
        stop = em.count + max(budget - 2, 1)
        defined = self.block(defined, stop, depth=0)
        if m.kind == "plain" and self.rng.random() < 0.8:
            v = self.pick(defined - {"this"})
            if v is None:
                v = self.new_local()
                em.stmt(f"{v} = {self.rng.randint(0, 9)}")
            em.stmt(f"return {v}")
        else:
            em.stmt("return")
        m.lines = em.lines
        self.used += em.count

    def new_local(self) -> str:
        name = f"v{self.nlocals}"
        self.nlocals += 1
        self.cur.locals_.append(name)
        return name

    def pick(self, pool):
        pool = sorted(pool)
        return self.rng.choice(pool) if pool else None

    def operand(self, defined) -> str:
        v = self.pick(defined - {"this"})
        if v is None or self.rng.random() < 0.25:
            return self.rng.choice(("0", "1", "5", "true", '"x"'))
        return v

    def target(self, defined) -> str:
        # reuse an existing local now and then to exercise strong updates
        existing = sorted(defined - {"this", *self.cur.params})
        if existing and self.rng.random() < 0.25:
            return self.rng.choice(existing)
        return self.new_local()

    def block(self, defined, stop, depth) -> set:
        defined = set(defined)
        while self.em.count < stop:
            r = self.rng.random()
            room = stop - self.em.count
            if depth < 2 and room >= 5 and r < 0.22:
                defined = self.if_else(defined, stop, depth)
            elif self.cyclic and depth < 2 and room >= 5 and r < 0.3:
                defined = self.loop(defined, stop, depth)
            else:
                self.simple(defined)
        return defined

    def call_text(self, sig, static, nargs, defined):
        args = ", ".join(self.operand(defined) for _ in range(nargs))
        if static:
            return f"call static {sig}({args})"
        recv = self.pick(defined)
        return f"call virtual {sig}({args}) on {recv}"

    def simple(self, defined):
        rng, em = self.rng, self.em
        r = rng.random()
        if r < 0.12:
            t = self.target(defined)
            em.stmt(f"{t} = {rng.choice(('0', '1', '7', 'true', 'false', chr(34) + 'k' + chr(34)))}")
        elif r < 0.2 and len(defined - {"this"}) >= 1:
            src = self.pick(defined - {"this"})
            t = self.target(defined)
            em.stmt(f"{t} = {src}")
        elif r < 0.32 and defined - {"this"}:
            a = self.pick(defined - {"this"})
            op = rng.choice(("+", "-", "==", "<", "!=", "&&"))
            t = self.target(defined)
            em.stmt(f"{t} = {a} {op} {self.operand(defined)}")
        elif r < 0.5:
            sig, static, n = rng.choice(TRIGGER_CALLS)
            text = self.call_text(sig, static, n, defined)
            t = self.target(defined)
            em.stmt(f"{t} = {text}")
        elif r < 0.62:
            sig, static, n = rng.choice(SENSITIVE_CALLS)
            text = self.call_text(sig, static, n, defined)
            if rng.random() < 0.6:
                t = self.target(defined)
                em.stmt(f"{t} = {text}")
            else:
                em.stmt(text)
        elif r < 0.7 and defined - {"this"}:
            sig, static, n = rng.choice(SINK_CALLS)
            em.stmt(self.call_text(sig, static, n, defined))
        elif r < 0.77:
            sig, static, n = rng.choice(PLAIN_CALLS)
            t = self.target(defined)
            em.stmt(f"{t} = {self.call_text(sig, static, n, defined)}")
        elif r < 0.87:
            self.internal_call(defined)
        elif r < 0.92:
            t = self.target(defined)
            if rng.random() < 0.5:
                em.stmt(f"{t} = {rng.choice(PROPERTIES)}")
            else:
                em.stmt(f"{t} = this.{self.field_name()}")
        elif defined - {"this"}:
            em.stmt(f"this.{self.field_name()} = {self.pick(defined - {'this'})}")
        else:
            em.stmt("nop")
        last = em.lines[-1][1]
        if " = " in last and not last.startswith("this."):
            defined.add(last.split(" = ", 1)[0])

    def field_name(self) -> str:
        if self.cur.cls == "App":
            return self.rng.choice(("f0", "f1"))
        return "g0"

    def internal_call(self, defined):
        rng, em, m = self.rng, self.em, self.cur
        callees = [c for c in self.methods if c.kind == "plain" and c.cls != "HelperImpl"
                   and (self.cyclic or c.slot > m.slot)]
        if not callees:
            em.stmt("nop")
            return
        c = rng.choice(callees)
        args = ", ".join(self.operand(defined) for _ in c.params)
        if c.cls == "Helper" and m.cls == "App":
            h = self.new_local()
            em.stmt(f"{h} = this.helper")
            defined.add(h)
            head = f"call virtual Helper#{c.name}({args}) on {h}"
        elif c.cls == m.cls or (c.cls == "Helper" and m.cls == "HelperImpl"):
            kind = "special" if rng.random() < 0.2 else "virtual"
            head = f"call {kind} {c.cls}#{c.name}({args}) on this"
        else:
            head = f"call static {c.cls}#{c.name}({args})"
        if rng.random() < 0.7:
            t = self.target(defined)
            em.stmt(f"{t} = {head}")
            defined.add(t)
        else:
            em.stmt(head)

    def cond_text(self, defined) -> str:
        v = self.pick(defined - {"this"})
        if v is None:
            v = self.new_local()
            sig, static, n = self.rng.choice(TRIGGER_CALLS)
            self.em.stmt(f"{v} = {self.call_text(sig, static, n, defined)}")
            defined.add(v)
        r = self.rng.random()
        if r < 0.4:
            return v
        op = self.rng.choice(("==", "!=", "<", ">=", ">"))
        return f"{v} {op} {self.operand(defined)}"

    def if_else(self, defined, stop, depth) -> set:
        em = self.em
        cond = self.cond_text(defined)
        lt, le, lj = self.fresh_label("T"), self.fresh_label("E"), self.fresh_label("J")
        em.stmt(f"if {cond} goto {lt} else {le}")
        room = max(stop - em.count - 3, 2)
        then_stop = em.count + self.rng.randint(1, max(1, room // 2))
        em.label(lt)
        d_then = self.block(defined, then_stop, depth + 1)
        then_returns = self.rng.random() < 0.12
        if then_returns:
            em.stmt("return")
        else:
            em.stmt(f"goto {lj}")
        else_stop = em.count + self.rng.randint(0, max(0, stop - em.count - 2))
        em.label(le)
        if em.count >= else_stop:
            em.stmt("nop")
            d_else = set(defined)
        else:
            d_else = self.block(defined, else_stop, depth + 1)
        em.label(lj)
        return d_else if then_returns else d_then & d_else

    def loop(self, defined, stop, depth) -> set:
        em = self.em
        lh, lb, lx = self.fresh_label("H"), self.fresh_label("B"), self.fresh_label("X")
        em.label(lh)
        c = self.new_local()
        a = self.pick(defined - {"this"})
        if a is None:
            sig, static, n = self.rng.choice(TRIGGER_CALLS)
            em.stmt(f"{c} = {self.call_text(sig, static, n, defined)}")
        else:
            em.stmt(f"{c} = {a} < {self.rng.randint(1, 9)}")
        em.stmt(f"if {c} goto {lb} else {lx}")
        inner = set(defined) | {c}
        body_stop = em.count + self.rng.randint(1, max(1, (stop - em.count - 2) // 2))
        em.label(lb)
        self.block(inner, body_stop, depth + 1)
        em.stmt(f"goto {lh}")
        em.label(lx)
        return inner

    # -- rendering ----------------------------------------------------------

    def render(self, methods) -> str:
        out = []
        by_cls = {}
        for m in methods:
            by_cls.setdefault(m.cls, []).append(m)
        heads = {
            "App": ("class App extends android.app.Activity {",
                    [f"field {OBJ} f0;", f"field {OBJ} f1;", "field Helper helper;"]),
            "Helper": ("class Helper {", [f"field {OBJ} g0;"]),
            "HelperImpl": ("class HelperImpl extends Helper {", []),
        }
        for cls in ("App", "Helper", "HelperImpl"):
            if cls not in by_cls and cls != "App":
                if cls == "Helper":
                    out.append("class Helper {\n  field java.lang.Object g0;\n}\n")
                continue
            head, fields = heads[cls]
            out.append(head)
            out.extend(f"  {f}" for f in fields)
            for m in by_cls.get(cls, []):
                out.append("")
                ret = "void" if m.kind != "plain" else OBJ
                ptypes = "android.view.View" if m.kind == "callback" else OBJ
                params = ", ".join(f"{ptypes} {p}" for p in m.params)
                out.append(f"  {m.kind} method {ret} {m.name}({params}) {{")
                for name in m.locals_:
                    out.append(f"    local {OBJ} {name};")
                for label, text in m.lines:
                    prefix = f"{label}: " if label else ""
                    out.append(f"    {prefix}{text};")
                out.append("  }")
            out.append("}\n")
        return "\n".join(out)


def random_program(seed: int, cyclic: bool = False, max_stmts: int = 50,
                   max_methods: int = 8) -> str:
    """IR text for a random program; acyclic unless ``cyclic`` (loops and recursion)."""
    attempt = 0
    while True:
        gen = _Gen(seed * 1009 + attempt, cyclic, max_stmts, max_methods)
        text = gen.generate()
        if gen.used <= max_stmts:
            return text
        attempt += 1


def recursive_program(seed: int, n_methods: int = 50) -> str:
    """Mutually recursive helpers feeding a guarded sensitive call.

    Every helper calls two others (one is its successor, closing a ring),
    so call-graph cycles are unavoidable.
    """
    rng = random.Random(seed)
    out = ["class Ring extends android.app.Activity {", f"  field {OBJ} seen;", ""]
    out.append("  lifecycle method void onCreate() {")
    out.append(f"    local {OBJ} t;")
    out.append(f"    local {OBJ} r;")
    out.append("    t = call static java.lang.System#currentTimeMillis();")
    out.append("    r = call virtual Ring#h0(t) on this;")
    out.append("    if r goto Lhit else Lend;")
    out.append("    Lhit: call static android.hardware.Camera#open();")
    out.append("    Lend: return;")
    out.append("  }")
    for i in range(n_methods):
        a = (i + 1) % n_methods
        b = rng.randrange(n_methods)
        out.append("")
        out.append(f"  plain method {OBJ} h{i}({OBJ} p) {{")
        for name in ("x", "y", "z", "w"):
            out.append(f"    local {OBJ} {name};")
        out.append(f"    x = call virtual Ring#h{a}(p) on this;")
        out.append(f"    if x > {rng.randint(0, 9)} goto La else Lb;")
        out.append(f"    La: y = call virtual Ring#h{b}(x) on this;")
        out.append("    z = y + p;")
        out.append("    this.seen = z;")
        out.append("    return z;")
        out.append("    Lb: w = this.seen;")
        if rng.random() < 0.5:
            out.append("    w = call static android.os.SystemClock#elapsedRealtime();")
        out.append("    return w;")
        out.append("  }")
    out.append("}")
    return "\n".join(out) + "\n"
