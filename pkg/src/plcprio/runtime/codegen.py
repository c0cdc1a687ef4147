"""Compile analyzed POUs to Python source.

Instances are plain dicts.  Every POU body becomes a function of its instance
dict; functions get a wrapper that builds a fresh frame per call.  At each
basic-block entry the generated code bumps the interpreter's own block
counters (``BC``/``BT``) and the per-cycle metrics ``M``
(statements, expression nodes, block entries).
"""

from __future__ import annotations

from ..frontend.ast import (
    Assign, Binary, Call, CallStmt, Case, For, If, Literal, Name, Return,
    StmtList, Unary, While, expr_size,
)
from ..frontend.cfg import Cfg
from ..frontend.semantics import INTEGER, Analyzer, Semantics, TON_MEMBERS
from ..instrument import plan_points

_DEFAULTS = {"BOOL": "False", "INT": "0", "DINT": "0", "TIME": "0", "REAL": "0.0"}
_PY_OPS = {"+": "+", "-": "-", "*": "*", "=": "==", "<>": "!=", "<": "<",
           ">": ">", "<=": "<=", ">=": ">=", "AND": "&", "OR": "|", "XOR": "^"}


def literal_py(lit: Literal) -> str:
    if lit.type == "BOOL":
        return "True" if lit.value else "False"
    if lit.type == "REAL":
        return repr(float(lit.value))
    return repr(int(lit.value))


def _store(target_type: str, source_type: str, code: str) -> str:
    if target_type == "INT":
        return f"_i16({code})"
    if target_type == "DINT":
        return f"_i32({code})"
    if target_type == "REAL" and source_type != "REAL":
        return f"float({code})"
    return code


class _Writer:
    def __init__(self):
        self.lines: list[str] = []
        self.depth = 0

    def emit(self, line: str):
        self.lines.append("    " * self.depth + line)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


class CodeGen:
    def __init__(self, sem: Semantics):
        self.sem = sem
        self.an = Analyzer(sem.project)
        self.w = _Writer()
        self.tmp = 0
        self.block_number: dict[tuple[str, int], int] = {}
        for n, body, block in plan_points(sem):
            self.block_number[(body.owner, block.index)] = n
        self.block_count = len(self.block_number)
        self.cfg: Cfg | None = None
        self.owner = ""

    def fresh(self, stem: str) -> str:
        self.tmp += 1
        return f"_{stem}{self.tmp}"

    # -- values ----------------------------------------------------------------

    def default(self, type_name: str) -> str:
        if type_name in _DEFAULTS:
            return _DEFAULTS[type_name]
        return f"_new_{type_name}()"

    def access(self, name: Name) -> str:
        r = self.an.resolve(name)
        if r.root == "local":
            base = "S"
        elif r.root == "global":
            base = "G"
        else:
            base = f"P[{r.prog!r}]"
        return base + "".join(f"[{p!r}]" for p in r.path)

    def expr(self, e) -> str:
        if isinstance(e, Literal):
            return literal_py(e)
        if isinstance(e, Name):
            return self.access(e)
        if isinstance(e, Unary):
            inner = self.expr(e.operand)
            if e.op == "NOT":
                t = self.an.expr_type(e.operand)
                return f"(not {inner})" if t == "BOOL" else f"(~{inner})"
            return f"(-{inner})"
        if isinstance(e, Binary):
            return self.binary(e)
        if isinstance(e, Call):
            return self.call_expr(e)
        raise TypeError(e)

    def binary(self, e: Binary) -> str:
        left, right = self.expr(e.left), self.expr(e.right)
        lt, rt = self.an.expr_type(e.left), self.an.expr_type(e.right)
        result = self.an.expr_type(e)
        if e.op == "/":
            if lt in INTEGER + ("TIME",) and rt in INTEGER:
                return f"_idiv({left}, {right})"
            if result == "TIME":
                return f"int(_fdiv({left}, {right}))"
            return f"_fdiv({left}, {right})"
        if e.op == "MOD":
            return f"_mod({left}, {right})"
        if e.op == "*" and result == "TIME" and "REAL" in (lt, rt):
            return f"int(({left}) * ({right}))"
        return f"(({left}) {_PY_OPS[e.op]} ({right}))"

    def call_expr(self, e: Call) -> str:
        f = e.func
        args = [self.expr(a.value) for a in e.args]
        if f == "__NOW":
            return "CLK[0]"
        if f in ("ABS", "MIN", "MAX", "LIMIT", "SEL", "TRUNC"):
            return f"_{f.lower()}({', '.join(args)})"
        if "_TO_" in f:
            src, dst = f.split("_TO_")
            return f"_conv_{src}_{dst}({args[0]})"
        fn = self.sem.pou_by_name[f]
        pairs = self.an._bind_function_args(fn, e)
        given = {decl.name: (decl, value) for decl, value in pairs}
        actual = []
        for v in fn.vars:
            if v.section != "input":
                continue
            if v.name in given:
                decl, value = given[v.name]
                actual.append(_store(decl.type, self.an.expr_type(value),
                                     self.expr(value)))
            elif v.init is not None:
                actual.append(literal_py(v.init))
            else:
                actual.append(self.default(v.type))
        return f"_fn_{f}({', '.join(actual)})"

    # -- statements ------------------------------------------------------------

    def block_static(self, block) -> tuple[int, int]:
        stmts = len(block.stmts)
        exprs = 0
        for s in block.stmts:
            if isinstance(s, Assign):
                exprs += expr_size(s.value)
            elif isinstance(s, CallStmt):
                exprs += sum(expr_size(a.value) for a in s.args if not a.output)
        if isinstance(block.decision, (If, Case)):
            stmts += 1
        return stmts, exprs

    def enter(self, block, header: bool = False):
        k = self.block_number[(self.owner, block.index)]
        if header:
            stmts, exprs = 1, 0
        else:
            stmts, exprs = self.block_static(block)
        self.w.emit(f"_blk({k}, {stmts}, {exprs})")

    def stmt_list(self, body: StmtList):
        block = self.cfg.entry_of.get(id(body))
        if block is not None:
            self.enter(block)
        elif not body.stmts:
            self.w.emit("pass")
        for s in body.stmts:
            self.stmt(s)

    def stmt(self, s):
        w = self.w
        if isinstance(s, Assign):
            r = self.an.resolve(s.target)
            code = _store(r.type, self.an.expr_type(s.value), self.expr(s.value))
            w.emit(f"{self.access(s.target)} = {code}")
        elif isinstance(s, CallStmt):
            self.call_stmt(s)
        elif isinstance(s, Return):
            w.emit("return")
        elif isinstance(s, If):
            self.if_stmt(s, 0)
            self.enter(self.cfg.join_of[id(s)])
        elif isinstance(s, Case):
            self.case_stmt(s)
            self.enter(self.cfg.join_of[id(s)])
        elif isinstance(s, While):
            self.while_stmt(s)
            self.enter(self.cfg.join_of[id(s)])
        elif isinstance(s, For):
            self.for_stmt(s)
            self.enter(self.cfg.join_of[id(s)])
        else:
            raise TypeError(s)

    def call_stmt(self, s: CallStmt):
        w = self.w
        name = s.target
        if len(name.parts) == 1 and name.parts[0] in self.sem.pou_by_name \
                and name.parts[0] not in self.an.locals:
            w.emit(self.call_expr(Call(name.parts[0], s.args, s.span)))
            return
        target = self.an.resolve(name)
        inst = self.fresh("inst")
        w.emit(f"{inst} = {self.access(name)}")
        if target.type == "TON":
            members = TON_MEMBERS
        else:
            fb = self.sem.pou_by_name[target.type]
            members = {v.name: (v.type, v.section) for v in fb.vars}
        for a in s.args:
            if not a.output:
                mtype = members[a.name][0]
                code = _store(mtype, self.an.expr_type(a.value), self.expr(a.value))
                w.emit(f"{inst}[{a.name!r}] = {code}")
        if target.type == "TON":
            w.emit(f"_ton({inst})")
        else:
            w.emit(f"_pou_{target.type}({inst})")
        for a in s.args:
            if a.output:
                dest = self.an.resolve(a.value)
                code = _store(dest.type, members[a.name][0], f"{inst}[{a.name!r}]")
                w.emit(f"{self.access(a.value)} = {code}")

    def if_stmt(self, s: If, i: int):
        w = self.w
        br = s.branches[i]
        w.emit(f"M[1] += {expr_size(br.cond)}")
        w.emit(f"if {self.expr(br.cond)}:")
        w.depth += 1
        self.stmt_list(br.body)
        w.depth -= 1
        if i + 1 < len(s.branches):
            w.emit("else:")
            w.depth += 1
            self.if_stmt(s, i + 1)
            w.depth -= 1
        elif s.else_body is not None:
            w.emit("else:")
            w.depth += 1
            self.stmt_list(s.else_body)
            w.depth -= 1

    def case_stmt(self, s: Case):
        w = self.w
        sel = self.fresh("sel")
        w.emit(f"M[1] += {expr_size(s.selector)}")
        w.emit(f"{sel} = {self.expr(s.selector)}")
        for n, arm in enumerate(s.arms):
            tests = " or ".join(f"{sel} == {lo}" if lo == hi else f"{lo} <= {sel} <= {hi}"
                                for lo, hi in arm.labels)
            w.emit(f"{'if' if n == 0 else 'elif'} {tests}:")
            w.depth += 1
            self.stmt_list(arm.body)
            w.depth -= 1
        w.emit("else:")
        w.depth += 1
        if s.else_body is not None:
            self.stmt_list(s.else_body)
        else:
            self.enter(self.cfg.else_of[id(s)])
        w.depth -= 1

    def _loop_guard(self, counter: str):
        self.w.emit(f"{counter} += 1")
        self.w.emit(f"if {counter} > LOOP_CAP:")
        self.w.emit("    raise RuntimeFault('loop iteration bound exceeded in "
                    f"{self.owner}')")

    def while_stmt(self, s: While):
        w = self.w
        header = self.cfg.header_of[id(s)]
        counter = self.fresh("it")
        w.emit(f"{counter} = 0")
        w.emit("while True:")
        w.depth += 1
        self.enter(header, header=True)
        w.emit(f"M[1] += {expr_size(s.cond)}")
        w.emit(f"if not {self.expr(s.cond)}:")
        w.emit("    break")
        self._loop_guard(counter)
        self.stmt_list(s.body)
        w.depth -= 1

    def for_stmt(self, s: For):
        w = self.w
        header = self.cfg.header_of[id(s)]
        var = Name((s.var,), s.span)
        r = self.an.resolve(var)
        acc = self.access(var)
        stop, step, counter = self.fresh("stop"), self.fresh("step"), self.fresh("it")
        size = expr_size(s.start) + expr_size(s.stop) + (expr_size(s.step) if s.step else 0)
        w.emit(f"M[1] += {size}")
        w.emit(f"{acc} = {_store(r.type, 'INT', self.expr(s.start))}")
        w.emit(f"{stop} = {self.expr(s.stop)}")
        w.emit(f"{step} = {self.expr(s.step) if s.step is not None else '1'}")
        w.emit(f"if {step} == 0:")
        w.emit("    raise RuntimeFault('FOR step is zero')")
        w.emit(f"{counter} = 0")
        w.emit("while True:")
        w.depth += 1
        self.enter(header, header=True)
        w.emit(f"if not ({acc} <= {stop} if {step} > 0 else {acc} >= {stop}):")
        w.emit("    break")
        self._loop_guard(counter)
        self.stmt_list(s.body)
        w.emit(f"{acc} = {_store(r.type, 'INT', f'{acc} + {step}')}")
        w.depth -= 1

    # -- units -----------------------------------------------------------------

    def constructors(self):
        w = self.w
        for t in self.sem.project.types:
            w.emit(f"def _new_{t.name}():")
            items = ", ".join(f"{f.name!r}: {self._init(f)}" for f in t.fields)
            w.emit(f"    return {{{items}}}")
        for p in self.sem.project.pous:
            if p.kind == "Function":
                continue
            w.emit(f"def _new_{p.name}():")
            items = [f"{v.name!r}: {self._init(v)}" for v in p.vars]
            if p.is_sfc:
                steps = ", ".join(f"{st.name!r}: {st.initial}" for st in p.body.steps)
                items.append(f"'__active': {{{steps}}}")
            w.emit(f"    return {{{', '.join(items)}}}")

    def _init(self, v) -> str:
        if v.init is not None:
            return _store(v.type, v.init.type, literal_py(v.init))
        return self.default(v.type)

    def body(self, owner: str, cfg: Cfg, body: StmtList):
        self.owner = owner
        self.cfg = cfg
        self.w.depth += 1
        self.stmt_list(body)
        self.w.depth -= 1

    def pou(self, p):
        w = self.w
        self.an.set_pou(p)
        bodies = {b.action: b for b in self.sem.bodies_of(p.name)}
        if p.kind == "Function":
            w.emit(f"def _body_{p.name}(S):")
            self.body(p.name, bodies[None].cfg, p.body)
            inputs = [v for v in p.vars if v.section == "input"]
            params = ", ".join(f"a{i}" for i in range(len(inputs)))
            w.emit(f"def _fn_{p.name}({params}):")
            items = [f"{v.name!r}: a{i}" for i, v in enumerate(inputs)]
            items += [f"{v.name!r}: {self._init(v)}" for v in p.vars
                      if v.section != "input"]
            items.append(f"{p.name!r}: {self.default(p.return_type)}")
            w.emit(f"    S = {{{', '.join(items)}}}")
            w.emit(f"    _body_{p.name}(S)")
            w.emit(f"    return S[{p.name!r}]")
            return
        if not p.is_sfc:
            w.emit(f"def _pou_{p.name}(S):")
            self.body(p.name, bodies[None].cfg, p.body)
            return
        sfc = p.body
        for a in sfc.actions:
            w.emit(f"def _act_{p.name}__{a.name}(S):")
            self.body(f"{p.name}.{a.name}", bodies[a.name].cfg, a.body)
        w.emit(f"def _pou_{p.name}(S):")
        w.depth += 1
        w.emit("A = S['__active']")
        for a in sfc.actions:
            owners = [st.name for st in sfc.steps if a.name in st.actions]
            if owners:
                cond = " or ".join(f"A[{n!r}]" for n in owners)
                w.emit(f"if {cond}:")
                w.emit(f"    _act_{p.name}__{a.name}(S)")
        w.emit("snap = dict(A)")
        w.emit("used = set()")
        for t in sfc.transitions:
            enabled = " and ".join(f"snap[{n!r}] and {n!r} not in used" for n in t.sources)
            w.emit(f"if {enabled}:")
            w.depth += 1
            w.emit("M[0] += 1")
            w.emit(f"M[1] += {expr_size(t.cond)}")
            w.emit(f"if {self.expr(t.cond)}:")
            w.depth += 1
            for n in t.sources:
                w.emit(f"A[{n!r}] = False")
                w.emit(f"used.add({n!r})")
            for n in t.targets:
                w.emit(f"A[{n!r}] = True")
            w.depth -= 2
        w.depth -= 1

    def module(self) -> str:
        self.constructors()
        for p in self.sem.project.pous:
            self.pou(p)
        return self.w.text()


def generate(sem: Semantics) -> tuple[str, int]:
    """Python source for the project and the number of basic blocks."""
    gen = CodeGen(sem)
    return gen.module(), gen.block_count
