"""Recursive-descent parser for POU files and ``globals.st``."""

from __future__ import annotations

from ..errors import StSyntaxError
from .ast import (
    Action, Arg, Assign, Binary, Call, CallStmt, Case, CaseArm, For,
    GlobalsAst, If, IfBranch, Literal, Name, Pou, Return, SfcBody, Step,
    StmtList, StructType, Transition, Unary, VarDecl, While,
)
from .lexer import UNSUPPORTED, Token, tokenize

_POU_END = {"PROGRAM": "END_PROGRAM", "FUNCTION_BLOCK": "END_FUNCTION_BLOCK",
            "FUNCTION": "END_FUNCTION"}
_POU_KIND = {"PROGRAM": "Program", "FUNCTION_BLOCK": "FunctionBlock",
             "FUNCTION": "Function"}
_VAR_SECTIONS = {"VAR_INPUT": "input", "VAR_OUTPUT": "output", "VAR": "var"}

_EQ_OPS = ("=", "<>")
_REL_OPS = ("<", ">", "<=", ">=")


class Parser:
    def __init__(self, source: str, file: str | None = None):
        self.source = source
        self.file = file
        self.tokens = tokenize(source, file)
        self.i = 0

    # -- token helpers ---------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    @property
    def prev_end(self) -> int:
        return self.tokens[self.i - 1].end if self.i else 0

    def error(self, message: str, tok: Token | None = None) -> StSyntaxError:
        t = tok or self.tok
        return StSyntaxError(message, self.file, t.line, t.col)

    def _check_supported(self):
        t = self.tok
        if t.kind == "kw" and t.value in UNSUPPORTED:
            raise self.error(f"{t.value} is not supported by this dialect")

    def describe(self, t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.text)

    def expect_kw(self, *names: str) -> Token:
        self._check_supported()
        if not self.tok.is_kw(*names):
            raise self.error(f"expected {' or '.join(names)}, "
                             f"found {self.describe(self.tok)}")
        return self.advance()

    def expect_op(self, op: str) -> Token:
        if not self.tok.is_op(op):
            raise self.error(f"expected {op!r}, found {self.describe(self.tok)}")
        return self.advance()

    def expect_ident(self) -> Token:
        self._check_supported()
        if self.tok.kind != "ident":
            raise self.error(f"expected identifier, found {self.describe(self.tok)}")
        return self.advance()

    def accept_op(self, op: str) -> bool:
        if self.tok.is_op(op):
            self.advance()
            return True
        return False

    def expect_eof(self):
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.describe(self.tok)} after end of unit")

    # -- program units ---------------------------------------------------------

    def parse_pou(self) -> Pou:
        start = self.tok.start
        head = self.expect_kw("PROGRAM", "FUNCTION_BLOCK", "FUNCTION")
        name = self.expect_ident().text
        return_type = None
        if head.value == "FUNCTION":
            self.expect_op(":")
            return_type = self.expect_ident().text
        decls = self.parse_var_sections()
        end_kw = _POU_END[head.value]
        body_start = self.prev_end
        if self.tok.is_kw("STEP", "TRANSITION", "ACTION"):
            body = self.parse_sfc(end_kw)
        else:
            body = self.parse_stmt_list({end_kw}, body_start)
        self.expect_kw(end_kw)
        self.accept_op(";")
        end = self.prev_end
        self.expect_eof()
        return Pou(_POU_KIND[head.value], name, return_type, decls, body,
                   self.file, (start, end))

    def parse_var_sections(self) -> list[VarDecl]:
        decls: list[VarDecl] = []
        while True:
            self._check_supported()
            if not self.tok.is_kw(*_VAR_SECTIONS):
                return decls
            section = _VAR_SECTIONS[self.advance().value]
            decls += self.parse_decls(section, "END_VAR")
            self.expect_kw("END_VAR")

    def parse_decls(self, section: str, end_kw: str) -> list[VarDecl]:
        out: list[VarDecl] = []
        while not self.tok.is_kw(end_kw):
            start = self.tok.start
            names = [self.expect_ident().text]
            while self.accept_op(","):
                names.append(self.expect_ident().text)
            self.expect_op(":")
            type_name = self.expect_ident().text
            init = None
            if self.accept_op(":="):
                init = self.parse_expr()
            self.expect_op(";")
            for n in names:
                out.append(VarDecl(n, type_name, init, section,
                                   (start, self.prev_end)))
        return out

    def parse_globals(self) -> GlobalsAst:
        gvars: list[VarDecl] = []
        types: list[StructType] = []
        while self.tok.kind != "eof":
            self._check_supported()
            if self.tok.is_kw("VAR_GLOBAL"):
                self.advance()
                gvars += self.parse_decls("global", "END_VAR")
                self.expect_kw("END_VAR")
            elif self.tok.is_kw("TYPE"):
                start = self.advance().start
                name = self.expect_ident().text
                self.expect_op(":")
                self.expect_kw("STRUCT")
                fields = self.parse_decls("field", "END_STRUCT")
                self.expect_kw("END_STRUCT")
                self.accept_op(";")
                self.expect_kw("END_TYPE")
                self.accept_op(";")
                types.append(StructType(name, fields, (start, self.prev_end)))
            else:
                raise self.error(f"expected VAR_GLOBAL or TYPE, found "
                                 f"{self.describe(self.tok)}")
        return GlobalsAst(gvars, types)

    # -- SFC -------------------------------------------------------------------

    def _name_list(self) -> list[str]:
        if self.accept_op("("):
            names = [self.expect_ident().text]
            while self.accept_op(","):
                names.append(self.expect_ident().text)
            self.expect_op(")")
            return names
        return [self.expect_ident().text]

    def parse_sfc(self, end_kw: str) -> SfcBody:
        steps: list[Step] = []
        transitions: list[Transition] = []
        actions: list[Action] = []
        while not self.tok.is_kw(end_kw):
            start = self.tok.start
            if self.tok.is_kw("STEP"):
                self.advance()
                name = self.expect_ident().text
                initial = False
                if self.tok.is_kw("INITIAL"):
                    self.advance()
                    initial = True
                acts: list[str] = []
                if self.tok.is_op("("):
                    acts = self._name_list()
                self.expect_op(";")
                steps.append(Step(name, initial, acts, (start, self.prev_end)))
            elif self.tok.is_kw("TRANSITION"):
                self.advance()
                name = self.expect_ident().text
                self.expect_kw("FROM")
                sources = self._name_list()
                self.expect_kw("TO")
                targets = self._name_list()
                self.expect_op(":=")
                cond = self.parse_expr()
                self.expect_op(";")
                transitions.append(Transition(name, sources, targets, cond,
                                              (start, self.prev_end)))
            elif self.tok.is_kw("ACTION"):
                self.advance()
                name = self.expect_ident().text
                self.expect_op(":")
                body = self.parse_stmt_list({"END_ACTION"}, self.prev_end)
                self.expect_kw("END_ACTION")
                self.accept_op(";")
                actions.append(Action(name, body, (start, self.prev_end)))
            else:
                raise self.error(f"expected STEP, TRANSITION or ACTION, found "
                                 f"{self.describe(self.tok)}")
        return SfcBody(steps, transitions, actions)

    # -- statements ------------------------------------------------------------

    def _at_case_label(self) -> bool:
        t = self.tok
        return t.kind == "int" or (t.is_op("-") and self.peek().kind == "int")

    def parse_stmt_list(self, terminators: set[str], start: int,
                        case_labels: bool = False) -> StmtList:
        stmts = []
        while True:
            t = self.tok
            if t.kind == "eof" or (t.kind == "kw" and t.value in terminators):
                break
            if case_labels and self._at_case_label():
                break
            if t.is_op(";"):
                self.advance()
                continue
            if stmts and isinstance(stmts[-1], Return):
                raise self.error("unreachable statement after RETURN")
            stmts.append(self.parse_stmt())
        return StmtList(stmts, start)

    def parse_stmt(self):
        self._check_supported()
        t = self.tok
        if t.is_kw("IF"):
            return self.parse_if()
        if t.is_kw("CASE"):
            return self.parse_case()
        if t.is_kw("WHILE"):
            return self.parse_while()
        if t.is_kw("FOR"):
            return self.parse_for()
        if t.is_kw("RETURN"):
            self.advance()
            self.expect_op(";")
            return Return((t.start, self.prev_end))
        if t.kind == "ident":
            target = self.parse_name()
            if self.accept_op(":="):
                value = self.parse_expr()
                self.expect_op(";")
                return Assign(target, value, (t.start, self.prev_end))
            if self.tok.is_op("("):
                args = self.parse_args()
                self.expect_op(";")
                return CallStmt(target, args, (t.start, self.prev_end))
            raise self.error(f"expected ':=' or '(', found {self.describe(self.tok)}")
        raise self.error(f"expected statement, found {self.describe(t)}")

    def _end_compound(self, end_kw: str) -> int:
        self.expect_kw(end_kw)
        self.accept_op(";")
        return self.prev_end

    def parse_if(self) -> If:
        start = self.advance().start
        branches = []
        cond = self.parse_expr()
        self.expect_kw("THEN")
        body = self.parse_stmt_list({"ELSIF", "ELSE", "END_IF"}, self.prev_end)
        branches.append(IfBranch(cond, body))
        else_body = None
        while True:
            if self.tok.is_kw("ELSIF"):
                self.advance()
                cond = self.parse_expr()
                self.expect_kw("THEN")
                body = self.parse_stmt_list({"ELSIF", "ELSE", "END_IF"},
                                            self.prev_end)
                branches.append(IfBranch(cond, body))
            elif self.tok.is_kw("ELSE"):
                self.advance()
                else_body = self.parse_stmt_list({"END_IF"}, self.prev_end)
                break
            else:
                break
        end = self._end_compound("END_IF")
        return If(branches, else_body, (start, end))

    def _case_value(self) -> int:
        neg = self.accept_op("-")
        t = self.tok
        if t.kind != "int":
            raise self.error(f"expected integer case label, found {self.describe(t)}")
        self.advance()
        return -t.value if neg else t.value

    def parse_case(self) -> Case:
        start = self.advance().start
        selector = self.parse_expr()
        self.expect_kw("OF")
        arms = []
        else_body = None
        while True:
            if self._at_case_label():
                labels = []
                while True:
                    lo = self._case_value()
                    hi = lo
                    if self.accept_op(".."):
                        hi = self._case_value()
                        if hi < lo:
                            raise self.error("empty case range")
                    labels.append((lo, hi))
                    if not self.accept_op(","):
                        break
                self.expect_op(":")
                body = self.parse_stmt_list({"ELSE", "END_CASE"}, self.prev_end,
                                            case_labels=True)
                arms.append(CaseArm(labels, body))
            elif self.tok.is_kw("ELSE"):
                self.advance()
                else_body = self.parse_stmt_list({"END_CASE"}, self.prev_end)
                break
            else:
                break
        if not arms:
            raise self.error("CASE needs at least one labelled arm")
        end_kw = self.tok.start
        end = self._end_compound("END_CASE")
        return Case(selector, arms, else_body, (start, end), end_kw)

    def parse_while(self) -> While:
        start = self.advance().start
        cond = self.parse_expr()
        self.expect_kw("DO")
        body = self.parse_stmt_list({"END_WHILE"}, self.prev_end)
        end_kw = self.tok.start
        end = self._end_compound("END_WHILE")
        return While(cond, body, (start, end), end_kw)

    def parse_for(self) -> For:
        start = self.advance().start
        var = self.expect_ident().text
        self.expect_op(":=")
        first = self.parse_expr()
        self.expect_kw("TO")
        stop = self.parse_expr()
        step = None
        if self.tok.is_kw("BY"):
            self.advance()
            step = self.parse_expr()
        self.expect_kw("DO")
        body = self.parse_stmt_list({"END_FOR"}, self.prev_end)
        end_kw = self.tok.start
        end = self._end_compound("END_FOR")
        return For(var, first, stop, step, body, (start, end), end_kw)

    # -- expressions -----------------------------------------------------------

    def parse_name(self) -> Name:
        first = self.expect_ident()
        parts = [first.text]
        while self.tok.is_op(".") and self.peek().kind == "ident":
            self.advance()
            parts.append(self.advance().text)
        return Name(tuple(parts), (first.start, self.prev_end))

    def parse_args(self) -> list[Arg]:
        self.expect_op("(")
        args: list[Arg] = []
        if self.accept_op(")"):
            return args
        while True:
            if self.tok.kind == "ident" and self.peek().is_op(":=", "=>"):
                name = self.advance().text
                if self.advance().value == "=>":
                    args.append(Arg(name, self.parse_name(), output=True))
                else:
                    args.append(Arg(name, self.parse_expr()))
            else:
                args.append(Arg(None, self.parse_expr()))
            if not self.accept_op(","):
                break
        self.expect_op(")")
        named = {a.name is not None for a in args}
        if len(named) > 1:
            raise self.error("cannot mix named and positional arguments")
        return args

    def parse_expr(self):
        return self._binary_level(0)

    _LEVELS = (
        (lambda t: t.is_kw("OR"), None),
        (lambda t: t.is_kw("XOR"), None),
        (lambda t: t.is_kw("AND") or t.is_op("&"), "AND"),
        (lambda t: t.is_op(*_EQ_OPS), None),
        (lambda t: t.is_op(*_REL_OPS), None),
        (lambda t: t.is_op("+", "-"), None),
        (lambda t: t.is_op("*", "/") or t.is_kw("MOD"), None),
    )

    def _binary_level(self, level: int):
        if level == len(self._LEVELS):
            return self.parse_unary()
        match, canonical = self._LEVELS[level]
        left = self._binary_level(level + 1)
        while match(self.tok):
            op_tok = self.advance()
            op = canonical or str(op_tok.value)
            right = self._binary_level(level + 1)
            left = Binary(op, left, right, (left.span[0], right.span[1]))
        return left

    def parse_unary(self):
        t = self.tok
        if t.is_op("-") or t.is_kw("NOT"):
            self.advance()
            operand = self.parse_unary()
            span = (t.start, operand.span[1])
            if t.is_op("-") and isinstance(operand, Literal) \
                    and operand.type in ("INT", "REAL", "TIME"):
                return Literal(-operand.value, operand.type, span)
            return Unary("-" if t.is_op("-") else "NOT", operand, span)
        return self.parse_primary()

    def parse_primary(self):
        t = self.tok
        span = (t.start, t.end)
        if t.kind == "int":
            self.advance()
            return Literal(t.value, "INT", span)
        if t.kind == "real":
            self.advance()
            return Literal(t.value, "REAL", span)
        if t.kind == "time":
            self.advance()
            return Literal(t.value, "TIME", span)
        if t.kind == "bool":
            self.advance()
            return Literal(t.value, "BOOL", span)
        if t.is_op("("):
            self.advance()
            e = self.parse_expr()
            self.expect_op(")")
            return e
        if t.kind == "ident":
            if self.peek().is_op("("):
                self.advance()
                args = self.parse_args()
                return Call(t.text, args, (t.start, self.prev_end))
            return self.parse_name()
        self._check_supported()
        raise self.error(f"expected expression, found {self.describe(t)}")


def parse_st(source: str, file: str | None = None) -> Pou:
    """Parse one program organisation unit."""
    return Parser(source, file).parse_pou()


def parse_globals(source: str, file: str | None = None) -> GlobalsAst:
    return Parser(source, file).parse_globals()


def parse_expression(source: str):
    p = Parser(source)
    e = p.parse_expr()
    p.expect_eof()
    return e
