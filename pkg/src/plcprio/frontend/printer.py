"""Canonical pretty printer; its output parses back to an equal tree."""

from __future__ import annotations

from .ast import (
    Assign, Binary, Call, CallStmt, Case, For, GlobalsAst, If, Literal, Name,
    Pou, Return, SfcBody, StmtList, Unary, VarDecl, While,
)

_PREC = {"OR": 1, "XOR": 2, "AND": 3, "=": 4, "<>": 4, "<": 5, ">": 5,
         "<=": 5, ">=": 5, "+": 6, "-": 6, "*": 7, "/": 7, "MOD": 7}
_UNARY_PREC = 8

_SECTION_KW = {"input": "VAR_INPUT", "output": "VAR_OUTPUT", "var": "VAR"}
_POU_KW = {"Program": "PROGRAM", "FunctionBlock": "FUNCTION_BLOCK",
           "Function": "FUNCTION"}


def literal_text(lit: Literal) -> str:
    if lit.type == "BOOL":
        return "TRUE" if lit.value else "FALSE"
    if lit.type == "TIME":
        return f"T#{lit.value}ms"
    if lit.type == "REAL":
        text = repr(float(lit.value))
        return text if any(c in text for c in ".eE") else text + ".0"
    return str(lit.value)


def _prec(e) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary):
        return _UNARY_PREC
    return 9


def args_text(args) -> str:
    parts = []
    for a in args:
        if a.name is None:
            parts.append(expr_text(a.value))
        elif a.output:
            parts.append(f"{a.name} => {expr_text(a.value)}")
        else:
            parts.append(f"{a.name} := {expr_text(a.value)}")
    return ", ".join(parts)


def expr_text(e) -> str:
    if isinstance(e, Literal):
        return literal_text(e)
    if isinstance(e, Name):
        return e.dotted
    if isinstance(e, Call):
        return f"{e.func}({args_text(e.args)})"
    if isinstance(e, Unary):
        inner = expr_text(e.operand)
        if _prec(e.operand) < _UNARY_PREC:
            inner = f"({inner})"
        if e.op == "NOT":
            return f"NOT {inner}"
        return f"- {inner}" if inner.startswith("-") else f"-{inner}"
    if isinstance(e, Binary):
        p = _PREC[e.op]
        left = expr_text(e.left)
        right = expr_text(e.right)
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression: {e!r}")


def _labels_text(labels) -> str:
    return ", ".join(str(lo) if lo == hi else f"{lo}..{hi}" for lo, hi in labels)


def stmt_text(s) -> str:
    """One-line text of a simple statement, or the header of a compound one."""
    if isinstance(s, Assign):
        return f"{s.target.dotted} := {expr_text(s.value)};"
    if isinstance(s, CallStmt):
        return f"{s.target.dotted}({args_text(s.args)});"
    if isinstance(s, Return):
        return "RETURN;"
    if isinstance(s, If):
        return f"IF {expr_text(s.branches[0].cond)} THEN"
    if isinstance(s, Case):
        return f"CASE {expr_text(s.selector)} OF"
    if isinstance(s, While):
        return f"WHILE {expr_text(s.cond)} DO"
    if isinstance(s, For):
        return _for_header(s)
    raise TypeError(f"not a statement: {s!r}")


def _for_header(s: For) -> str:
    text = f"FOR {s.var} := {expr_text(s.start)} TO {expr_text(s.stop)}"
    if s.step is not None:
        text += f" BY {expr_text(s.step)}"
    return text + " DO"


def _emit_list(body: StmtList, depth: int, out: list[str]):
    for s in body.stmts:
        _emit_stmt(s, depth, out)


def _emit_stmt(s, depth: int, out: list[str]):
    pad = "    " * depth
    if isinstance(s, If):
        for i, b in enumerate(s.branches):
            kw = "IF" if i == 0 else "ELSIF"
            out.append(f"{pad}{kw} {expr_text(b.cond)} THEN")
            _emit_list(b.body, depth + 1, out)
        if s.else_body is not None:
            out.append(f"{pad}ELSE")
            _emit_list(s.else_body, depth + 1, out)
        out.append(f"{pad}END_IF;")
    elif isinstance(s, Case):
        out.append(f"{pad}CASE {expr_text(s.selector)} OF")
        for arm in s.arms:
            out.append(f"{pad}{_labels_text(arm.labels)}:")
            _emit_list(arm.body, depth + 1, out)
        if s.else_body is not None:
            out.append(f"{pad}ELSE")
            _emit_list(s.else_body, depth + 1, out)
        out.append(f"{pad}END_CASE;")
    elif isinstance(s, While):
        out.append(f"{pad}WHILE {expr_text(s.cond)} DO")
        _emit_list(s.body, depth + 1, out)
        out.append(f"{pad}END_WHILE;")
    elif isinstance(s, For):
        out.append(pad + _for_header(s))
        _emit_list(s.body, depth + 1, out)
        out.append(f"{pad}END_FOR;")
    else:
        out.append(pad + stmt_text(s))


def stmts_text(body: StmtList, depth: int = 0) -> str:
    out: list[str] = []
    _emit_list(body, depth, out)
    return "\n".join(out)


def _decl_text(v: VarDecl) -> str:
    text = f"{v.name} : {v.type}"
    if v.init is not None:
        text += f" := {expr_text(v.init)}"
    return text + ";"


def _names(names: list[str]) -> str:
    return names[0] if len(names) == 1 else f"({', '.join(names)})"


def print_pou(pou: Pou) -> str:
    kw = _POU_KW[pou.kind]
    head = f"{kw} {pou.name}"
    if pou.return_type:
        head += f" : {pou.return_type}"
    out = [head]
    section = None
    for v in pou.vars:
        if v.section != section:
            if section is not None:
                out.append("END_VAR")
            section = v.section
            out.append(_SECTION_KW[section])
        out.append("    " + _decl_text(v))
    if section is not None:
        out.append("END_VAR")
    if isinstance(pou.body, SfcBody):
        sfc = pou.body
        for st in sfc.steps:
            line = f"STEP {st.name}"
            if st.initial:
                line += " INITIAL"
            if st.actions:
                line += f" ({', '.join(st.actions)})"
            out.append(line + ";")
        for t in sfc.transitions:
            out.append(f"TRANSITION {t.name} FROM {_names(t.sources)} "
                       f"TO {_names(t.targets)} := {expr_text(t.cond)};")
        for a in sfc.actions:
            out.append(f"ACTION {a.name}:")
            _emit_list(a.body, 1, out)
            out.append("END_ACTION")
    else:
        _emit_list(pou.body, 1, out)
    out.append(f"END_{kw}")
    return "\n".join(out) + "\n"


def print_globals(g: GlobalsAst) -> str:
    out: list[str] = []
    for t in g.types:
        out.append(f"TYPE {t.name} :")
        out.append("STRUCT")
        out += ["    " + _decl_text(f) for f in t.fields]
        out.append("END_STRUCT")
        out.append("END_TYPE")
    if g.vars:
        out.append("VAR_GLOBAL")
        out += ["    " + _decl_text(v) for v in g.vars]
        out.append("END_VAR")
    return "\n".join(out) + "\n"
