"""Name resolution, light type checking and per-statement dataflow facts.

Every variable access is mapped to a canonical key:

* a POU-local variable is ``POU.var``; a global is ``var``;
* a member of a user function-block instance restarts at the FB type, so
  ``Main.Auto.xDone`` becomes ``FB_Auto.xDone`` (all instances share keys);
* members of structs and of builtin timers extend the path
  (``FB_Gripper.SqTimer.Q``);
* a function's result is ``F.F``, its inputs ``F.x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import DuplicateName, SemanticError, TypeMismatch, UnresolvedReference
from .ast import (
    Assign, Binary, Call, CallStmt, Case, ELEMENTARY_TYPES, For, If, Literal,
    Name, Pou, ProjectAst, Return, StmtList, Unary, VarDecl, While,
)
from .cfg import Cfg, pou_cfgs
from .printer import expr_text, stmt_text

TON_MEMBERS = {"IN": ("BOOL", "input"), "PT": ("TIME", "input"),
               "Q": ("BOOL", "output"), "ET": ("TIME", "output")}
TON_OUTPUTS = ("Q", "ET")

NUMERIC = ("INT", "DINT", "REAL")
INTEGER = ("INT", "DINT")
CONVERTIBLE = ("BOOL", "INT", "DINT", "REAL", "TIME")

# name -> (min args, max args or None)
BUILTIN_FUNCS = {"ABS": (1, 1), "MIN": (2, None), "MAX": (2, None),
                 "LIMIT": (3, 3), "SEL": (3, 3), "TRUNC": (1, 1),
                 "__NOW": (0, 0)}
for _a in CONVERTIBLE:
    for _b in CONVERTIBLE:
        if _a != _b:
            BUILTIN_FUNCS[f"{_a}_TO_{_b}"] = (1, 1)


@dataclass(frozen=True)
class Resolved:
    key: str                         # canonical dataflow key
    type: str
    root: str                        # local | global | prog
    prog: str | None                 # program name when root == 'prog'
    path: tuple[str, ...]            # dict keys from the root store


@dataclass
class CallSite:
    callee: str                      # POU name, 'TON' or a builtin function
    instance: str | None             # key of the called instance
    params: list[tuple[str, frozenset[str]]] = field(default_factory=list)
    outputs: list[tuple[str, str]] = field(default_factory=list)
    result: str | None = None


@dataclass
class StmtInfo:
    sid: str
    pou: str
    block: str | None
    kind: str                        # assign | call | return | decision | transition
    text: str
    reads: frozenset[str] = frozenset()
    writes: frozenset[str] = frozenset()
    calls: list[CallSite] = field(default_factory=list)
    node: object = None


@dataclass
class BodyInfo:
    pou: str
    action: str | None
    cfg: Cfg

    @property
    def owner(self) -> str:
        return self.pou if self.action is None else f"{self.pou}.{self.action}"

    def block_qname(self, index: int) -> str:
        return f"{self.owner}.BB{index}"


@dataclass
class Semantics:
    project: ProjectAst
    bodies: list[BodyInfo]
    stmts: list[StmtInfo]
    pou_by_name: dict[str, Pou]
    fb_instances: dict[str, str]          # instance key -> FB type (incl. TON)
    instance_paths: dict[str, list[tuple[str, str]]]   # POU -> [(var, type)]

    def bodies_of(self, pou: str) -> list[BodyInfo]:
        return [b for b in self.bodies if b.pou == pou]

    def readers(self) -> dict[str, list[StmtInfo]]:
        out: dict[str, list[StmtInfo]] = {}
        for s in self.stmts:
            for k in s.reads:
                out.setdefault(k, []).append(s)
        return out


def _location(project: ProjectAst, pou: Pou | None, span) -> str:
    if pou is None or pou.file is None:
        return "<project>"
    text = project.sources.get(pou.file)
    if text is None or span is None:
        return pou.file
    line = text.count("\n", 0, span[0]) + 1
    col = span[0] - (text.rfind("\n", 0, span[0]) + 1) + 1
    return f"{pou.file}:{line}:{col}"


class Analyzer:
    def __init__(self, project: ProjectAst):
        self.project = project
        self.pous: dict[str, Pou] = {}
        for p in project.pous:
            if p.name in self.pous:
                raise DuplicateName(f"POU {p.name!r} declared twice")
            self.pous[p.name] = p
        self.globals: dict[str, VarDecl] = {}
        for v in project.globals:
            if v.name in self.globals:
                raise DuplicateName(f"global {v.name!r} declared twice")
            if v.name in self.pous:
                raise DuplicateName(f"global {v.name!r} clashes with a POU")
            self.globals[v.name] = v
        self.structs = {t.name: t for t in project.types}
        self.pou: Pou | None = None
        self.locals: dict[str, VarDecl] = {}

    # -- errors ----------------------------------------------------------------

    def where(self, node) -> str:
        return _location(self.project, self.pou, getattr(node, "span", None))

    def mismatch(self, node, msg: str) -> TypeMismatch:
        return TypeMismatch(f"{self.where(node)}: {msg}")

    # -- declarations ----------------------------------------------------------

    def is_fb_type(self, t: str) -> bool:
        return t == "TON" or (t in self.pous and self.pous[t].kind == "FunctionBlock")

    def check_declarations(self):
        for v in self.project.globals:
            if self.is_fb_type(v.type):
                raise SemanticError(f"global {v.name!r}: function block "
                                    "instances must be declared inside a POU")
            self._check_init(v)
        for p in self.project.pous:
            self.pou = p
            seen = set()
            for v in p.vars:
                if v.name in seen or v.name == p.name:
                    raise DuplicateName(f"{p.file}: {p.name}.{v.name} declared twice")
                seen.add(v.name)
                if self.is_fb_type(v.type):
                    if p.kind == "Function":
                        raise SemanticError(f"{p.file}: functions cannot hold "
                                            f"instance {v.name!r}")
                    if v.section != "var" or v.init is not None:
                        raise SemanticError(f"{p.file}: instance {v.name!r} must "
                                            "be a plain VAR without initializer")
                elif v.type in self.structs and v.init is not None:
                    raise SemanticError(f"{p.file}: struct {v.name!r} cannot "
                                        "have an initializer")
                if p.kind == "Function" and v.section == "output":
                    raise SemanticError(f"{p.file}: functions return through "
                                        "their name, not VAR_OUTPUT")
                self._check_init(v)
            if p.is_sfc:
                self._check_sfc(p)
        self.pou = None
        for t in self.project.tasks:
            root = self.pous.get(t.program)
            if root is None or root.kind != "Program":
                raise UnresolvedReference(f"task {t.name!r}: program "
                                          f"{t.program!r} not found")
        if not self.project.tasks:
            raise SemanticError("tasks.cfg declares no task")

    def _check_init(self, v: VarDecl):
        if v.init is None:
            return
        if not isinstance(v.init, Literal):
            raise SemanticError(f"{v.name}: initializers must be literals")
        if v.type in self.structs or self.is_fb_type(v.type):
            raise SemanticError(f"{v.name}: only elementary variables take initializers")
        if not assignable(v.type, v.init.type):
            raise TypeMismatch(f"{v.name}: cannot initialize {v.type} "
                               f"with {v.init.type}")

    def _check_sfc(self, p: Pou):
        sfc = p.body
        names: set[str] = {v.name for v in p.vars}
        for kind, items in (("step", sfc.steps), ("transition", sfc.transitions),
                            ("action", sfc.actions)):
            for it in items:
                if it.name in names:
                    raise DuplicateName(f"{p.file}: {kind} {it.name!r} "
                                        "clashes with another name")
                names.add(it.name)
        initial = [s for s in sfc.steps if s.initial]
        if len(initial) != 1:
            raise SemanticError(f"{p.file}: SFC needs exactly one INITIAL step")
        steps = {s.name for s in sfc.steps}
        actions = {a.name for a in sfc.actions}
        for s in sfc.steps:
            for a in s.actions:
                if a not in actions:
                    raise UnresolvedReference(f"{p.file}: step {s.name} uses "
                                              f"unknown action {a!r}")
        for t in sfc.transitions:
            for s in t.sources + t.targets:
                if s not in steps:
                    raise UnresolvedReference(f"{p.file}: transition {t.name} "
                                              f"refers to unknown step {s!r}")

    # -- names -----------------------------------------------------------------

    def set_pou(self, p: Pou):
        self.pou = p
        self.locals = {v.name: v for v in p.vars}

    def _members(self, type_name: str) -> dict[str, tuple[str, str]] | None:
        if type_name == "TON":
            return TON_MEMBERS
        if type_name in self.structs:
            return {f.name: (f.type, "field") for f in self.structs[type_name].fields}
        fb = self.pous.get(type_name)
        if fb is not None and fb.kind == "FunctionBlock":
            return {v.name: (v.type, v.section) for v in fb.vars
                    if v.section in ("input", "output")}
        return None

    def resolve(self, name: Name) -> Resolved:
        p = self.pou
        parts = name.parts
        first = parts[0]
        rest = parts[1:]
        if first in self.locals:
            decl = self.locals[first]
            key, typ, root, prog = f"{p.name}.{first}", decl.type, "local", None
        elif p.kind == "Function" and first == p.name:
            key, typ, root, prog = f"{p.name}.{first}", p.return_type, "local", None
        elif first in self.globals:
            key, typ, root, prog = first, self.globals[first].type, "global", None
        elif first in self.pous and self.pous[first].kind == "Program" and rest:
            prog_pou = self.pous[first]
            decl = prog_pou.var(rest[0])
            if decl is None:
                raise UnresolvedReference(f"{self.where(name)}: {name.dotted!r} "
                                          "is not declared")
            key, typ, root, prog = f"{first}.{rest[0]}", decl.type, "prog", first
            rest = rest[1:]
            parts = parts[1:]
        else:
            raise UnresolvedReference(f"{self.where(name)}: {name.dotted!r} "
                                      "is not declared")
        path = [parts[0]]
        for member in rest:
            members = self._members(typ)
            if members is None or member not in members:
                raise UnresolvedReference(f"{self.where(name)}: {typ} has no "
                                          f"member {member!r}")
            if typ in self.pous:
                key = f"{typ}.{member}"
            else:
                key = f"{key}.{member}"
            typ = members[member][0]
            path.append(member)
        return Resolved(key, typ, root, prog, tuple(path))

    # -- expression types ------------------------------------------------------

    def expr_type(self, e) -> str:
        if isinstance(e, Literal):
            if e.type == "INT" and not -32768 <= e.value <= 32767:
                return "DINT"
            return e.type
        if isinstance(e, Name):
            t = self.resolve(e).type
            if t not in ELEMENTARY_TYPES:
                raise self.mismatch(e, f"{e.dotted!r} of type {t} used as a value")
            return t
        if isinstance(e, Unary):
            t = self.expr_type(e.operand)
            if e.op == "NOT":
                if t == "BOOL" or t in INTEGER:
                    return t
                raise self.mismatch(e, f"NOT applied to {t}")
            if t in NUMERIC or t == "TIME":
                return t
            raise self.mismatch(e, f"negation of {t}")
        if isinstance(e, Binary):
            return self._binary_type(e)
        if isinstance(e, Call):
            return self._call_type(e)
        raise TypeError(e)

    def _binary_type(self, e: Binary) -> str:
        lt = self.expr_type(e.left)
        rt = self.expr_type(e.right)
        op = e.op
        if op in ("AND", "OR", "XOR"):
            if lt == rt == "BOOL":
                return "BOOL"
            if lt in INTEGER and rt in INTEGER:
                return wider(lt, rt)
        elif op in ("=", "<>", "<", ">", "<=", ">="):
            if category(lt) == category(rt) and (op in ("=", "<>") or lt != "BOOL"):
                return "BOOL"
        elif op in ("+", "-"):
            if lt in NUMERIC and rt in NUMERIC:
                return wider(lt, rt)
            if lt == rt == "TIME":
                return "TIME"
        elif op == "*":
            if lt in NUMERIC and rt in NUMERIC:
                return wider(lt, rt)
            if lt == "TIME" and rt in NUMERIC or rt == "TIME" and lt in NUMERIC:
                return "TIME"
        elif op == "/":
            if lt in NUMERIC and rt in NUMERIC:
                return wider(lt, rt)
            if lt == "TIME" and rt in NUMERIC:
                return "TIME"
        elif op == "MOD":
            if lt in INTEGER and rt in INTEGER:
                return wider(lt, rt)
        raise self.mismatch(e, f"operator {op} not defined for {lt} and {rt}")

    def _call_type(self, e: Call) -> str:
        f = e.func
        if f in BUILTIN_FUNCS:
            lo, hi = BUILTIN_FUNCS[f]
            if any(a.name is not None for a in e.args):
                raise self.mismatch(e, f"{f} takes positional arguments")
            n = len(e.args)
            if n < lo or (hi is not None and n > hi):
                raise self.mismatch(e, f"{f} called with {n} arguments")
            types = [self.expr_type(a.value) for a in e.args]
            if f == "__NOW":
                return "TIME"
            if f == "TRUNC":
                if types[0] not in NUMERIC:
                    raise self.mismatch(e, "TRUNC needs a number")
                return "DINT"
            if "_TO_" in f:
                src, dst = f.split("_TO_")
                if not assignable(src, types[0]):
                    raise self.mismatch(e, f"{f} applied to {types[0]}")
                return dst
            if f == "SEL":
                if types[0] != "BOOL" or category(types[1]) != category(types[2]):
                    raise self.mismatch(e, "SEL(BOOL, x, y) with x, y alike")
                return types[1] if types[1] == types[2] else wider(types[1], types[2])
            if f == "ABS":
                if types[0] not in NUMERIC:
                    raise self.mismatch(e, "ABS needs a number")
                return types[0]
            result = types[0]
            for t in types[1:]:
                if category(t) != category(result) or t == "BOOL":
                    raise self.mismatch(e, f"{f} over mixed types")
                result = t if t == result else wider(result, t)
            return result
        fn = self.pous.get(f)
        if fn is None or fn.kind != "Function":
            raise UnresolvedReference(f"{self.where(e)}: unknown function {f!r}")
        self._bind_function_args(fn, e)
        return fn.return_type

    def _bind_function_args(self, fn: Pou, e: Call) -> list[tuple[VarDecl, object]]:
        inputs = [v for v in fn.vars if v.section == "input"]
        pairs = []
        if e.args and e.args[0].name is None:
            if len(e.args) > len(inputs):
                raise self.mismatch(e, f"too many arguments for {fn.name}")
            pairs = list(zip(inputs, (a.value for a in e.args)))
        else:
            by_name = {v.name: v for v in inputs}
            for a in e.args:
                if a.output or a.name not in by_name:
                    raise self.mismatch(e, f"{fn.name} has no input {a.name!r}")
                pairs.append((by_name[a.name], a.value))
        for decl, value in pairs:
            t = self.expr_type(value)
            if not assignable(decl.type, t):
                raise self.mismatch(e, f"{fn.name}.{decl.name} expects {decl.type}, got {t}")
        return pairs

    # -- dataflow facts --------------------------------------------------------

    def reads_of(self, e) -> set[str]:
        out: set[str] = set()

        def walk(x):
            if isinstance(x, Name):
                out.add(self.resolve(x).key)
            elif isinstance(x, Unary):
                walk(x.operand)
            elif isinstance(x, Binary):
                walk(x.left)
                walk(x.right)
            elif isinstance(x, Call):
                for a in x.args:
                    walk(a.value)
                fn = self.pous.get(x.func)
                if fn is not None:
                    out.add(f"{fn.name}.{fn.name}")

        walk(e)
        return out

    def calls_in(self, e) -> list[CallSite]:
        sites: list[CallSite] = []

        def walk(x):
            if isinstance(x, Unary):
                walk(x.operand)
            elif isinstance(x, Binary):
                walk(x.left)
                walk(x.right)
            elif isinstance(x, Call):
                for a in x.args:
                    walk(a.value)
                fn = self.pous.get(x.func)
                if fn is not None:
                    site = CallSite(fn.name, None, result=f"{fn.name}.{fn.name}")
                    for decl, value in self._bind_function_args(fn, x):
                        site.params.append((f"{fn.name}.{decl.name}",
                                            frozenset(self.reads_of(value))))
                    sites.append(site)

        walk(e)
        return sites

    def instance_call(self, s: CallStmt) -> CallSite:
        target = self.resolve(s.target)
        members = self._members(target.type)
        if not self.is_fb_type(target.type):
            raise self.mismatch(s, f"{s.target.dotted!r} is not a function block instance")
        site = CallSite(target.type, target.key)
        for a in s.args:
            if a.name is None:
                raise self.mismatch(s, "function block calls need named parameters")
            if a.name not in members:
                raise self.mismatch(s, f"{target.type} has no parameter {a.name!r}")
            mtype, section = members[a.name]
            formal = (f"{target.key}.{a.name}" if target.type == "TON"
                      else f"{target.type}.{a.name}")
            if a.output:
                if section != "output":
                    raise self.mismatch(s, f"{a.name} is not an output")
                dest = self.resolve(a.value)
                if not assignable(dest.type, mtype):
                    raise self.mismatch(s, f"cannot store {mtype} output in {dest.type}")
                site.outputs.append((formal, dest.key))
            else:
                if section != "input":
                    raise self.mismatch(s, f"{a.name} is not an input")
                t = self.expr_type(a.value)
                if not assignable(mtype, t):
                    raise self.mismatch(s, f"{a.name} expects {mtype}, got {t}")
                site.params.append((formal, frozenset(self.reads_of(a.value))))
        return site

    def check_assign(self, s: Assign) -> Resolved:
        target = self.resolve(s.target)
        if target.type not in ELEMENTARY_TYPES:
            raise self.mismatch(s, f"cannot assign to {target.type} {s.target.dotted!r}")
        if target.root == "local" and self.pou.var(s.target.parts[0]) is not None \
                and self.pou.var(s.target.parts[0]).section == "input" \
                and self.pou.kind == "Function":
            raise self.mismatch(s, "function inputs are read-only")
        t = self.expr_type(s.value)
        if not assignable(target.type, t):
            raise self.mismatch(s, f"cannot assign {t} to {target.type}")
        return target


def wider(a: str, b: str) -> str:
    order = {"INT": 0, "DINT": 1, "REAL": 2}
    return a if order.get(a, -1) >= order.get(b, -1) else b


def category(t: str) -> str:
    return "num" if t in NUMERIC else t


def assignable(target: str, source: str) -> bool:
    if target == source:
        return True
    if target in NUMERIC and source in INTEGER:
        return True
    return False


def _check_recursion(pous: dict[str, Pou], callees: dict[str, set[str]]):
    state: dict[str, int] = {}

    def visit(n: str, chain: list[str]):
        if state.get(n) == 1:
            raise SemanticError("recursive call chain: " + " -> ".join(chain + [n]))
        if state.get(n) == 2:
            return
        state[n] = 1
        for c in sorted(callees.get(n, ())):
            visit(c, chain + [n])
        state[n] = 2

    for name in pous:
        visit(name, [])


def analyze(project: ProjectAst) -> Semantics:
    """Resolve every name in ``project`` and collect statement facts."""
    an = Analyzer(project)
    an.check_declarations()
    bodies: list[BodyInfo] = []
    stmts: list[StmtInfo] = []
    fb_instances: dict[str, str] = {}
    instance_paths: dict[str, list[tuple[str, str]]] = {}
    callees: dict[str, set[str]] = {}

    for p in project.pous:
        an.set_pou(p)
        instance_paths[p.name] = [(v.name, v.type) for v in p.vars
                                  if an.is_fb_type(v.type)]
        for v in p.vars:
            if an.is_fb_type(v.type):
                fb_instances[f"{p.name}.{v.name}"] = v.type
        for action, cfg in pou_cfgs(p):
            body = BodyInfo(p.name, action, cfg)
            bodies.append(body)
            for block in cfg.blocks:
                bq = body.block_qname(block.index)
                for i, s in enumerate(block.stmts):
                    info = _simple_info(an, s, f"{bq}#{i}", p.name, bq)
                    stmts.append(info)
                    for c in info.calls:
                        if c.callee != "TON":
                            callees.setdefault(p.name, set()).add(c.callee)
                if block.decision is not None:
                    info = _decision_info(an, block.decision, f"{bq}#D", p.name, bq)
                    stmts.append(info)
                    for c in info.calls:
                        callees.setdefault(p.name, set()).add(c.callee)
        if p.is_sfc:
            for t in p.body.transitions:
                t_type = an.expr_type(t.cond)
                if t_type != "BOOL":
                    raise an.mismatch(t, f"transition {t.name} condition is {t_type}")
                calls = an.calls_in(t.cond)
                for c in calls:
                    callees.setdefault(p.name, set()).add(c.callee)
                stmts.append(StmtInfo(
                    f"{p.name}.{t.name}", p.name, None, "transition",
                    expr_text(t.cond), frozenset(an.reads_of(t.cond)),
                    frozenset(), calls, t))
    for p in project.pous:
        for v in p.vars:
            if v.type in an.pous and an.pous[v.type].kind == "FunctionBlock":
                callees.setdefault(p.name, set()).add(v.type)
    for name, cs in callees.items():
        for c in cs:
            if an.pous.get(c) is not None and an.pous[c].kind == "Program":
                raise SemanticError(f"{name}: programs cannot be called")
    _check_recursion(an.pous, callees)
    return Semantics(project, bodies, stmts, an.pous, fb_instances, instance_paths)


def _simple_info(an: Analyzer, s, sid: str, pou: str, block: str) -> StmtInfo:
    text = stmt_text(s)
    if isinstance(s, Assign):
        target = an.check_assign(s)
        return StmtInfo(sid, pou, block, "assign", text,
                        frozenset(an.reads_of(s.value)), frozenset({target.key}),
                        an.calls_in(s.value), s)
    if isinstance(s, CallStmt):
        name = s.target
        if len(name.parts) == 1 and name.parts[0] in an.pous \
                and an.pous[name.parts[0]].kind == "Function" \
                and name.parts[0] not in an.locals:
            call = Call(name.parts[0], s.args, s.span)
            an.expr_type(call)
            return StmtInfo(sid, pou, block, "call", text,
                            frozenset(an.reads_of(call)), frozenset(),
                            an.calls_in(call), s)
        site = an.instance_call(s)
        reads: set[str] = set()
        calls: list[CallSite] = []
        for a in s.args:
            if not a.output:
                reads |= an.reads_of(a.value)
                calls += an.calls_in(a.value)
        calls.append(site)
        writes = {dest for _, dest in site.outputs}
        return StmtInfo(sid, pou, block, "call", text, frozenset(reads),
                        frozenset(writes), calls, s)
    if isinstance(s, Return):
        return StmtInfo(sid, pou, block, "return", text, node=s)
    raise TypeError(s)


def _decision_info(an: Analyzer, s, sid: str, pou: str, block: str) -> StmtInfo:
    reads: set[str] = set()
    writes: set[str] = set()
    calls: list[CallSite] = []
    if isinstance(s, If):
        for br in s.branches:
            if an.expr_type(br.cond) != "BOOL":
                raise an.mismatch(s, "IF condition must be BOOL")
            reads |= an.reads_of(br.cond)
            calls += an.calls_in(br.cond)
        text = " / ".join(expr_text(br.cond) for br in s.branches)
    elif isinstance(s, Case):
        if an.expr_type(s.selector) not in INTEGER:
            raise an.mismatch(s, "CASE selector must be INT or DINT")
        reads |= an.reads_of(s.selector)
        calls += an.calls_in(s.selector)
        seen: list[tuple[int, int]] = []
        for arm in s.arms:
            for lo, hi in arm.labels:
                if any(lo <= h and l <= hi for l, h in seen):
                    raise an.mismatch(s, f"CASE label {lo} overlaps an earlier arm")
                seen.append((lo, hi))
        text = expr_text(s.selector)
    elif isinstance(s, While):
        if an.expr_type(s.cond) != "BOOL":
            raise an.mismatch(s, "WHILE condition must be BOOL")
        reads |= an.reads_of(s.cond)
        calls += an.calls_in(s.cond)
        text = expr_text(s.cond)
    elif isinstance(s, For):
        var = an.resolve(Name((s.var,), s.span))
        if var.type not in INTEGER:
            raise an.mismatch(s, "FOR variable must be INT or DINT")
        for e in (s.start, s.stop, s.step):
            if e is None:
                continue
            if an.expr_type(e) not in INTEGER:
                raise an.mismatch(s, "FOR bounds must be integers")
            reads |= an.reads_of(e)
            calls += an.calls_in(e)
        if s.step is not None and isinstance(s.step, Literal) and s.step.value == 0:
            raise an.mismatch(s, "FOR step must not be zero")
        reads.add(var.key)
        writes.add(var.key)
        text = stmt_text(s)
    else:
        raise TypeError(s)
    return StmtInfo(sid, pou, block, "decision", text, frozenset(reads),
                    frozenset(writes), calls, s)


def stmt_lists(pou: Pou) -> list[StmtList]:
    if pou.is_sfc:
        return [a.body for a in pou.body.actions]
    return [pou.body]
