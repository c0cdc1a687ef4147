"""Syntax tree for the structured text / textual SFC subset.

Source positions live in fields declared with ``compare=False`` so that two
trees parsed from differently formatted text compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

ELEMENTARY_TYPES = ("BOOL", "INT", "DINT", "TIME", "REAL")


def _pos():
    return field(default=None, compare=False, repr=False)


# -- expressions ---------------------------------------------------------------

@dataclass
class Literal:
    value: object
    type: str                      # BOOL | INT | REAL | TIME
    span: tuple[int, int] | None = _pos()


@dataclass
class Name:
    parts: tuple[str, ...]
    span: tuple[int, int] | None = _pos()

    @property
    def dotted(self) -> str:
        return ".".join(self.parts)


@dataclass
class Unary:
    op: str                        # '-' | 'NOT'
    operand: "Expr"
    span: tuple[int, int] | None = _pos()


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: tuple[int, int] | None = _pos()


@dataclass
class Arg:
    name: str | None               # None for positional arguments
    value: "Expr"
    output: bool = False           # ``name => variable``


@dataclass
class Call:
    func: str
    args: list[Arg]
    span: tuple[int, int] | None = _pos()


Expr = Union[Literal, Name, Unary, Binary, Call]


# -- statements ----------------------------------------------------------------

@dataclass
class StmtList:
    stmts: list["Stmt"]
    start: int | None = _pos()     # where a block beginning here starts


@dataclass
class Assign:
    target: Name
    value: Expr
    span: tuple[int, int] | None = _pos()


@dataclass
class CallStmt:
    target: Name
    args: list[Arg]
    span: tuple[int, int] | None = _pos()


@dataclass
class Return:
    span: tuple[int, int] | None = _pos()


@dataclass
class IfBranch:
    cond: Expr
    body: StmtList


@dataclass
class If:
    branches: list[IfBranch]
    else_body: StmtList | None
    span: tuple[int, int] | None = _pos()


@dataclass
class CaseArm:
    labels: list[tuple[int, int]]   # inclusive ranges; single values as (v, v)
    body: StmtList


@dataclass
class Case:
    selector: Expr
    arms: list[CaseArm]
    else_body: StmtList | None
    span: tuple[int, int] | None = _pos()
    end_kw: int | None = _pos()     # offset of END_CASE


@dataclass
class While:
    cond: Expr
    body: StmtList
    span: tuple[int, int] | None = _pos()
    end_kw: int | None = _pos()     # offset of END_WHILE


@dataclass
class For:
    var: str
    start: Expr
    stop: Expr
    step: Expr | None
    body: StmtList
    span: tuple[int, int] | None = _pos()
    end_kw: int | None = _pos()     # offset of END_FOR


Stmt = Union[Assign, CallStmt, Return, If, Case, While, For]
SIMPLE_STMTS = (Assign, CallStmt, Return)
COMPOUND_STMTS = (If, Case, While, For)


# -- declarations and program units -------------------------------------------

@dataclass
class VarDecl:
    name: str
    type: str
    init: Expr | None
    section: str                   # input | output | var | global | field
    span: tuple[int, int] | None = _pos()


@dataclass
class Step:
    name: str
    initial: bool
    actions: list[str]
    span: tuple[int, int] | None = _pos()


@dataclass
class Transition:
    name: str
    sources: list[str]
    targets: list[str]
    cond: Expr
    span: tuple[int, int] | None = _pos()


@dataclass
class Action:
    name: str
    body: StmtList
    span: tuple[int, int] | None = _pos()


@dataclass
class SfcBody:
    steps: list[Step]
    transitions: list[Transition]
    actions: list[Action]


@dataclass
class Pou:
    kind: str                      # Program | FunctionBlock | Function
    name: str
    return_type: str | None
    vars: list[VarDecl]
    body: StmtList | SfcBody
    file: str | None = field(default=None, compare=False)
    span: tuple[int, int] | None = _pos()

    @property
    def is_sfc(self) -> bool:
        return isinstance(self.body, SfcBody)

    def var(self, name: str) -> VarDecl | None:
        for v in self.vars:
            if v.name == name:
                return v
        return None


@dataclass
class StructType:
    name: str
    fields: list[VarDecl]
    span: tuple[int, int] | None = _pos()


@dataclass
class GlobalsAst:
    vars: list[VarDecl]
    types: list[StructType]


@dataclass
class TaskDecl:
    name: str
    program: str
    cycle_ms: int


@dataclass
class ProjectAst:
    pous: list[Pou]
    globals: list[VarDecl]
    types: list[StructType]
    tasks: list[TaskDecl]
    sources: dict[str, str] = field(default_factory=dict, compare=False)
    root: str | None = field(default=None, compare=False)

    def pou(self, name: str) -> Pou | None:
        for p in self.pous:
            if p.name == name:
                return p
        return None


# -- syntactic helpers ----------------------------------------------------------

def expr_names(expr: Expr) -> list[Name]:
    """All variable references in ``expr`` (call arguments included)."""
    out: list[Name] = []

    def walk(e):
        if isinstance(e, Name):
            out.append(e)
        elif isinstance(e, Unary):
            walk(e.operand)
        elif isinstance(e, Binary):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, Call):
            for a in e.args:
                if not a.output:
                    walk(a.value)

    walk(expr)
    return out


def expr_size(expr: Expr) -> int:
    """Number of expression nodes, used for the interpreter's cost metrics."""
    if isinstance(expr, Unary):
        return 1 + expr_size(expr.operand)
    if isinstance(expr, Binary):
        return 1 + expr_size(expr.left) + expr_size(expr.right)
    if isinstance(expr, Call):
        return 1 + sum(expr_size(a.value) for a in expr.args if not a.output)
    return 1


def stmt_reads(stmt: Stmt) -> set[str]:
    """Dotted names read by a simple statement or a compound header."""
    names: list[Name] = []
    if isinstance(stmt, Assign):
        names = expr_names(stmt.value)
    elif isinstance(stmt, CallStmt):
        for a in stmt.args:
            if not a.output:
                names += expr_names(a.value)
    elif isinstance(stmt, If):
        for b in stmt.branches:
            names += expr_names(b.cond)
    elif isinstance(stmt, Case):
        names = expr_names(stmt.selector)
    elif isinstance(stmt, While):
        names = expr_names(stmt.cond)
    elif isinstance(stmt, For):
        for e in (stmt.start, stmt.stop, stmt.step):
            if e is not None:
                names += expr_names(e)
    return {n.dotted for n in names}


def stmt_writes(stmt: Stmt) -> set[str]:
    if isinstance(stmt, Assign):
        return {stmt.target.dotted}
    if isinstance(stmt, CallStmt):
        return {a.value.dotted for a in stmt.args
                if a.output and isinstance(a.value, Name)}
    if isinstance(stmt, For):
        return {stmt.var}
    return set()


def iter_stmt_lists(body: StmtList):
    """Yield ``body`` and every nested statement list in source order."""
    yield body
    for s in body.stmts:
        if isinstance(s, If):
            for b in s.branches:
                yield from iter_stmt_lists(b.body)
            if s.else_body is not None:
                yield from iter_stmt_lists(s.else_body)
        elif isinstance(s, Case):
            for arm in s.arms:
                yield from iter_stmt_lists(arm.body)
            if s.else_body is not None:
                yield from iter_stmt_lists(s.else_body)
        elif isinstance(s, (While, For)):
            yield from iter_stmt_lists(s.body)
