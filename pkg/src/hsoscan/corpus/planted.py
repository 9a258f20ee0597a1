"""Programs with planted hidden sensitive operations and a record of what was planted."""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from fnmatch import fnmatchcase
from typing import Optional

from ..apimap import TRIGGER_CATEGORIES, ApiCatalog, default_catalog
from ..ir import Cond, parse_program
from ..screen import default_whitelist

APP_CLASS = "PlantedApp"
APP_ID = "app"
OBJ = "java.lang.Object"
LEAK_SOURCE = "android.telephony.TelephonyManager#getDeviceId"
LEAK_SINK = "android.util.Log#d"
FILLER_CALLS = ("java.lang.StringBuilder#append", "java.lang.String#equals",
                "java.lang.Integer#parseInt")


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class PlantedHso:
    category: str
    api: Optional[str] = None  # distinctive sensitive API; drawn from the catalog when None
    depth: int = 0


@dataclass(frozen=True)
class PlantSpec:
    seed: int
    methods: int = 2
    stmts_per_method: tuple = (3, 6)
    planted_hsos: tuple = ()
    planted_conventional: tuple = ()
    planted_flows: int = 0

    @classmethod
    def from_dict(cls, data: dict, seed: Optional[int] = None) -> "PlantSpec":
        if not isinstance(data, dict):
            raise SpecError("plant spec must be a JSON object")
        known = {"seed", "methods", "stmtsPerMethod", "plantedHsos", "plantedConventional",
                 "plantedFlows"}
        unknown = set(data) - known
        if unknown:
            raise SpecError(f"unknown plant spec keys {sorted(unknown)}")
        try:
            hsos = tuple(PlantedHso(h["category"], h.get("api"), int(h.get("depth", 0)))
                         for h in data.get("plantedHsos", ()))
            return cls(
                seed=int(seed if seed is not None else data.get("seed", 0)),
                methods=int(data.get("methods", 2)),
                stmts_per_method=tuple(data.get("stmtsPerMethod", (3, 6))),
                planted_hsos=hsos,
                planted_conventional=tuple(data.get("plantedConventional", ())),
                planted_flows=int(data.get("plantedFlows", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"malformed plant spec: {exc}") from None


@dataclass
class GroundTruth:
    app_id: str
    hsos: list = field(default_factory=list)  # {method, condStmt, arm, category, depth}
    conventional: list = field(default_factory=list)  # {method, condStmt, arm, category}
    hsdfs: int = 0

    def to_dict(self) -> dict:
        return {"appId": self.app_id, "hsos": self.hsos, "conventional": self.conventional,
                "hsdfs": self.hsdfs}

    @classmethod
    def from_dict(cls, data: dict) -> "GroundTruth":
        return cls(data["appId"], list(data.get("hsos", [])),
                   list(data.get("conventional", [])), int(data.get("hsdfs", 0)))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _trigger_pool(catalog: ApiCatalog, rules) -> dict:
    """System refs per trigger category that no whitelist rule would excuse."""
    pool = {c: [] for c in TRIGGER_CATEGORIES}
    for ref, cat in catalog.trigger_categories.items():
        if not catalog.is_system(ref):
            continue
        if any(r.covers(ref) for r in rules):
            continue
        pool[cat].append(ref)
    return {c: sorted(v) for c, v in pool.items()}


def _conventional_pool(catalog: ApiCatalog, rules) -> dict:
    refs = sorted(catalog.system)
    pool = {}
    for rule in rules:
        own = [x for x in refs if rule.covers(x)
               and not any(r.covers(x) for r in rules if r.category != rule.category)]
        pool.setdefault(rule.category, [])
        pool[rule.category].extend(x for x in own if x not in pool[rule.category])
    contexts = {}
    for rule in rules:
        contexts.setdefault(rule.category, rule.context)
    return {c: (sorted(v), contexts[c]) for c, v in pool.items()}


def _load_expr(catalog: ApiCatalog, ref: str) -> str:
    if catalog.is_system_property(ref):
        owner, _, name = ref.partition("#")
        return f"{owner}.{name}"
    return f"call static {ref}()"


def _sensitive_pool(catalog: ApiCatalog) -> list:
    # plain getters/actions only; sources would add flows nobody planted
    return sorted(s for s in catalog.sensitive if s not in catalog.sources and s not in catalog.sinks)


class _Writer:
    def __init__(self):
        self.methods = []

    def method(self, kind, ret, name, params, locals_, lines):
        head = f"  {kind} method {ret} {name}({params}) {{"
        body = [f"    local {OBJ} {n};" for n in locals_]
        body += [f"    {ln};" for ln in lines]
        self.methods.append("\n".join([head, *body, "  }"]))

    def text(self, header: str) -> str:
        parts = [header, f"class {APP_CLASS} extends android.app.Activity {{",
                 f"  field {OBJ} cache;"]
        for m in self.methods:
            parts.append("")
            parts.append(m)
        parts.append("}")
        return "\n".join(parts) + "\n"


def _filler(rng, w: _Writer, name: str, lo: int, hi: int):
    n = rng.randint(lo, hi)
    lines, locals_ = [], []
    cur = "p"
    for i in range(n):
        v = f"f{i}"
        locals_.append(v)
        r = rng.random()
        if r < 0.3:
            lines.append(f"{v} = {cur} + {rng.randint(1, 9)}")
        elif r < 0.6:
            sig = rng.choice(FILLER_CALLS)
            lines.append(f"{v} = call static {sig}({cur})")
        elif r < 0.8:
            lines.append(f"this.cache = {cur}")
            lines.append(f"{v} = this.cache")
        else:
            lines.append(f"{v} = \"{name}{i}\"")
        cur = v
    lines.append(f"return {cur}")
    w.method("plain", OBJ, name, f"{OBJ} p", locals_, lines)


def gen_program(spec: PlantSpec, catalog: Optional[ApiCatalog] = None, rules=None):
    """Return ``(ir_text, GroundTruth)``; a pure function of ``spec``."""
    catalog = catalog or default_catalog()
    rules = default_whitelist() if rules is None else rules
    lo, hi = (tuple(spec.stmts_per_method) + (None, None))[:2]
    if lo is None or hi is None or not (1 <= lo <= hi):
        raise SpecError(f"bad stmtsPerMethod {spec.stmts_per_method!r}")
    if spec.methods < 0:
        raise SpecError("methods must be >= 0")
    if spec.planted_flows < 0:
        raise SpecError("plantedFlows must be >= 0")
    if spec.planted_flows and not spec.planted_hsos:
        raise SpecError("planted flows need at least one planted HSO to hide in")
    rng = random.Random(spec.seed)
    triggers = _trigger_pool(catalog, rules)
    conv_pool = _conventional_pool(catalog, rules)
    sensitive = _sensitive_pool(catalog)
    if not sensitive:
        raise SpecError("catalog has no sensitive APIs to plant")

    w = _Writer()
    fillers = [f"fill{j}" for j in range(spec.methods)]
    for name in fillers:
        _filler(rng, w, name, lo, hi)

    def filler_call(lines, locals_):
        if fillers and rng.random() < 0.7:
            locals_.append("noise")
            lines.append(f"noise = call virtual {APP_CLASS}#{rng.choice(fillers)}(\"seed\") on this")

    planted = []
    for i, h in enumerate(spec.planted_hsos):
        if h.category not in TRIGGER_CATEGORIES:
            raise SpecError(f"unknown trigger category {h.category!r}")
        if not 0 <= h.depth <= 3:
            raise SpecError(f"depth must be 0..3, got {h.depth}")
        if not triggers[h.category]:
            raise SpecError(f"no catalog entry can plant a {h.category} trigger")
        api = h.api or rng.choice(sensitive)
        if not catalog.is_sensitive(api):
            raise SpecError(f"{api} is not a sensitive API in the catalog")
        ref = rng.choice(triggers[h.category])
        flows = spec.planted_flows // len(spec.planted_hsos) + \
            (1 if i < spec.planted_flows % len(spec.planted_hsos) else 0)
        lines, locals_ = [], ["t"]
        filler_call(lines, locals_)
        if h.depth == 0:
            lines.append(f"t = {_load_expr(catalog, ref)}")
        else:
            lines.append(f"t = call virtual {APP_CLASS}#trig{i}_1() on this")
        lines.append(f"if t == {rng.randint(0, 9)} goto Lhso{i} else Lskip{i}")
        arm = [f"call static {api}()"]
        for k in range(flows):
            locals_.append(f"leak{k}")
            arm.append(f"leak{k} = call static {LEAK_SOURCE}()")
            arm.append(f"call static {LEAK_SINK}(\"tag\", leak{k})")
        arm[0] = f"Lhso{i}: " + arm[0]
        lines += arm
        lines.append(f"goto Ldone{i}")
        lines.append(f"Lskip{i}: nop")
        lines.append(f"Ldone{i}: return")
        w.method("lifecycle", "void", f"hso{i}", "", locals_, lines)
        for j in range(1, h.depth + 1):
            inner = (f"call virtual {APP_CLASS}#trig{i}_{j + 1}() on this" if j < h.depth
                     else _load_expr(catalog, ref))
            w.method("plain", OBJ, f"trig{i}_{j}", "", ["r", "q"], [
                f"r = {inner}",
                f"if r > {rng.randint(0, 5)} goto Lpos else Lneg",
                "Lpos: return r",
                f"Lneg: q = r + {rng.randint(1, 5)}",
                "return q",
            ])
        planted.append((f"hso{i}", f"Lhso{i}", h.category, h.depth))

    conventional = []
    for j, cat in enumerate(spec.planted_conventional):
        if cat not in conv_pool or not conv_pool[cat][0]:
            raise SpecError(f"no whitelist rule with a catalog entry for conventional category {cat!r}")
        refs, context = conv_pool[cat]
        ref = rng.choice(refs)
        kind = "callback" if context == "callback" else "lifecycle"
        params = "android.view.View v" if kind == "callback" else ""
        lines, locals_ = [], ["t"]
        filler_call(lines, locals_)
        lines.append(f"t = {_load_expr(catalog, ref)}")
        lines.append(f"if t == {rng.randint(0, 9)} goto Lconv{j} else Lrest{j}")
        lines.append(f"Lconv{j}: call static {rng.choice(sensitive)}()")
        lines.append(f"goto Lend{j}")
        lines.append(f"Lrest{j}: nop")
        lines.append(f"Lend{j}: return")
        w.method(kind, "void", f"conv{j}", params, locals_, lines)
        conventional.append((f"conv{j}", f"Lconv{j}", cat))

    text = w.text(f"# planted corpus program, seed {spec.seed}")
    program = parse_program(text, APP_ID)

    def locate(method, label):
        m = program.index[f"{APP_CLASS}#{method}"]
        for st in m.body:
            if isinstance(st.form, Cond) and st.form.then_label == label:
                return m.key, st.id
        raise AssertionError(f"planted conditional {label} missing")

    truth = GroundTruth(APP_ID)
    for method, label, cat, depth in planted:
        key, sid = locate(method, label)
        truth.hsos.append({"method": key, "condStmt": sid, "arm": "then", "category": cat,
                           "depth": depth})
    for method, label, cat in conventional:
        key, sid = locate(method, label)
        truth.conventional.append({"method": key, "condStmt": sid, "arm": "then", "category": cat})
    truth.hsdfs = spec.planted_flows
    return text, truth


def default_plant_spec(seed: int) -> PlantSpec:
    """Seeded mix of 1-3 planted HSOs over every depth, some conventional usages and flows."""
    rng = random.Random(seed)
    hsos = tuple(PlantedHso(rng.choice(TRIGGER_CATEGORIES), None, rng.randint(0, 3))
                 for _ in range(rng.randint(1, 3)))
    conv = tuple(rng.sample(("SdkVersion", "UserInterface", "File", "Permission", "Network",
                             "Intent", "SharedPreferences"), rng.randint(0, 2)))
    return PlantSpec(seed=seed, methods=rng.randint(0, 3), stmts_per_method=(2, 5),
                     planted_hsos=hsos, planted_conventional=conv,
                     planted_flows=rng.randint(0, 2))


def spec_to_dict(spec: PlantSpec) -> dict:
    d = asdict(spec)
    return {
        "seed": d["seed"], "methods": d["methods"],
        "stmtsPerMethod": list(d["stmts_per_method"]),
        "plantedHsos": [{"category": h.category, "api": h.api, "depth": h.depth}
                        for h in spec.planted_hsos],
        "plantedConventional": list(spec.planted_conventional),
        "plantedFlows": spec.planted_flows,
    }
