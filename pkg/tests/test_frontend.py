from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from plcprio.errors import (
    DuplicateName, MissingTasksConfig, StSyntaxError, TypeMismatch, UnknownType,
    UnresolvedReference, SemanticError,
)
from plcprio.frontend.ast import Binary, Literal, Name, Unary
from plcprio.frontend.lexer import parse_time_literal, tokenize
from plcprio.frontend.parser import parse_expression, parse_st
from plcprio.frontend.printer import expr_text, print_pou
from plcprio.frontend.project import project_from_sources
from plcprio.frontend.semantics import analyze

from conftest import fixture_project, program, project_of


@pytest.mark.parametrize("text, ms", [
    ("T#500ms", 500), ("T#2s", 2000), ("TIME#1m30s", 90_000), ("t#1h", 3_600_000),
    ("T#1.5s", 1500), ("T#1d2h", 93_600_000), ("T#-20ms", -20),
])
def test_time_literals(text, ms):
    assert parse_time_literal(text) == ms


def test_keywords_are_case_insensitive_identifiers_are_not():
    toks = tokenize("if Foo then foo := TRUE; end_if")
    assert [t.kind for t in toks[:3]] == ["kw", "ident", "kw"]
    assert toks[1].text == "Foo" and toks[3].text == "foo"


def test_comments_dropped_by_default():
    kinds = [t.kind for t in tokenize("a (* block *) := // line\n 1;")]
    assert "bcomment" not in kinds and "lcomment" not in kinds


def test_syntax_error_carries_position():
    with pytest.raises(StSyntaxError) as exc:
        parse_st("PROGRAM P\nx := ;\nEND_PROGRAM", "p.st")
    assert exc.value.line == 2
    assert "p.st" in str(exc.value)


def test_unterminated_if_is_rejected():
    with pytest.raises(StSyntaxError):
        parse_st(program("IF x THEN y := 1;"))


@pytest.mark.parametrize("kw", ["REPEAT", "EXIT", "VAR_IN_OUT", "ARRAY"])
def test_unsupported_constructs_report_clearly(kw):
    src = program(f"{kw} x;")
    with pytest.raises(StSyntaxError, match="not supported"):
        parse_st(src)


def test_statement_after_return_is_unreachable():
    with pytest.raises(StSyntaxError, match="unreachable"):
        parse_st(program("RETURN; x := 1;", "VAR x : INT; END_VAR"))


def test_precedence():
    e = parse_expression("a OR b AND NOT c = d")
    assert isinstance(e, Binary) and e.op == "OR"
    assert e.right.op == "AND"
    # unary NOT binds tighter than comparison
    assert e.right.right.op == "=" and isinstance(e.right.right.left, Unary)


def test_negative_literal_folding():
    assert parse_expression("-5") == Literal(-5, "INT", parse_expression("-5").span)


def test_print_parse_round_trip_on_fixtures():
    for name in ("depal_v1", "mixer", "traffic_sfc", "conveyor"):
        for pou in fixture_project(name).pous:
            again = parse_st(print_pou(pou), pou.file)
            assert print_pou(again) == print_pou(pou)


_names = st.sampled_from(["a", "b", "c", "Timer.Q"])
_leaves = st.one_of(
    _names.map(lambda n: Name(tuple(n.split(".")))),
    st.integers(0, 999).map(lambda v: Literal(v, "INT")),
    st.booleans().map(lambda v: Literal(v, "BOOL")),
)
_ops = st.sampled_from(["OR", "XOR", "AND", "=", "<>", "<", ">=", "+", "-", "*", "/", "MOD"])


def _tree(children):
    return st.one_of(
        st.tuples(_ops, children, children).map(lambda t: Binary(t[0], t[1], t[2])),
        st.tuples(st.sampled_from(["NOT", "-"]), children).map(lambda t: Unary(t[0], t[1])),
    )


@settings(max_examples=300, deadline=None)
@given(st.recursive(_leaves, _tree, max_leaves=12))
def test_expression_print_parse_is_identity(expr):
    text = expr_text(expr)
    reparsed = expr_text(parse_expression(text))
    # the parser folds a negated literal into the literal itself
    assert expr_text(parse_expression(reparsed)) == reparsed
    if not _has_negated_literal(expr):
        assert reparsed == text


def _has_negated_literal(e) -> bool:
    if isinstance(e, Unary):
        return (e.op == "-" and isinstance(e.operand, Literal)) or \
            _has_negated_literal(e.operand)
    if isinstance(e, Binary):
        return _has_negated_literal(e.left) or _has_negated_literal(e.right)
    return False


def test_missing_tasks_config():
    with pytest.raises(MissingTasksConfig):
        project_from_sources({"p.st": program("")})


def test_unknown_type():
    with pytest.raises(UnknownType):
        project_of(p__st=program("", "VAR x : WIDGET; END_VAR"))


def test_unresolved_reference():
    with pytest.raises(UnresolvedReference):
        analyze(project_of(p__st=program("x := y;", "VAR x : INT; END_VAR")))


def test_duplicate_pou_name():
    with pytest.raises(DuplicateName):
        analyze(project_of(p__st=program(""), q__st=program("")))


def test_type_mismatch():
    with pytest.raises(TypeMismatch):
        analyze(project_of(p__st=program("x := TRUE;", "VAR x : INT; END_VAR")))


def test_recursion_rejected():
    f = "FUNCTION F : INT\nVAR_INPUT n : INT; END_VAR\nF := F(n := n);\nEND_FUNCTION\n"
    with pytest.raises(SemanticError, match="recursive"):
        analyze(project_of(f__st=f, p__st=program("")))


def test_sfc_needs_exactly_one_initial_step():
    sfc = ("PROGRAM P\nSTEP A;\nSTEP B;\nTRANSITION t FROM A TO B := TRUE;\n"
           "END_PROGRAM\n")
    with pytest.raises(SemanticError, match="INITIAL"):
        analyze(project_of(p__st=sfc))
