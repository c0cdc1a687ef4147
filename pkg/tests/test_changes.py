from __future__ import annotations

import functools
import json
import re

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from plcprio.changes.diff import BodyChange, ChangeSet, diff, diff_projects, lcs_pairs
from plcprio.changes.impact import ModificationSet, impact
from plcprio.changes.mapping import MappedModifications, map_to_old_trace_points
from plcprio.core.builder import build_dependency_model
from plcprio.errors import PlcPrioError, RuntimeFault, VersionMismatch
from plcprio.instrument import instrument
from plcprio.frontend.project import project_from_sources
from plcprio.runtime.machine import Machine, compile_project

from conftest import fixture_pipeline, fixture_sources, program, project_of

DECLS = ("VAR_INPUT c : BOOL; i : INT; END_VAR\n"
         "VAR_OUTPUT a : INT; b : INT; d : INT; END_VAR")


def models(old_body: str, new_body: str, decls: str = DECLS):
    old = build_dependency_model(project_of(p__st=program(old_body, decls)))
    new = build_dependency_model(project_of(p__st=program(new_body, decls)))
    return old, new


def analyse(old_body: str, new_body: str, decls: str = DECLS):
    old, new = models(old_body, new_body, decls)
    cs = diff(old, new)
    return cs, impact(new, cs)


BASE = "a := i;\nIF c THEN\n b := a;\nELSE\n b := 0;\nEND_IF;\nd := 5;"


# -- diff -----------------------------------------------------------------------

def test_lcs_pairs():
    assert lcs_pairs(list("abcd"), list("axcd")) == [(0, 0), (2, 2), (3, 3)]
    assert lcs_pairs([], list("ab")) == []


def test_identical_revisions_have_no_changes():
    cs, mods = analyse(BASE, BASE)
    assert cs.is_empty() and mods.blocks == []


def test_layout_and_comment_edits_are_not_changes():
    cs, _ = analyse(BASE, BASE.replace("\n", "\n   ") + " (* tidy *)")
    assert cs.is_empty()


def test_literal_edit_marks_its_block():
    cs, mods = analyse(BASE, BASE.replace("d := 5", "d := 6"))
    assert cs.modified == {"pou": ["P"]}
    body = cs.body("P")
    assert body.changed_blocks == [3] and not body.structural_fallback
    assert mods.blocks == ["P.BB3"]


def test_condition_edit_marks_decision_and_successors():
    cs, mods = analyse(BASE, BASE.replace("IF c THEN", "IF NOT c THEN"))
    assert cs.body("P").changed_blocks == [0, 1, 2]
    assert mods.blocks == ["P.BB0", "P.BB1", "P.BB2"]


def test_new_if_falls_back_to_whole_body():
    cs, mods = analyse(BASE, BASE + "\nIF c THEN\n d := 1;\nEND_IF;")
    body = cs.body("P")
    assert body.structural_fallback
    assert set(body.changed_blocks) == set(range(6))
    assert len(mods.blocks) == 6


def test_added_and_removed_pous():
    f = "FUNCTION F : INT\nVAR_INPUT n : INT; END_VAR\nF := n;\nEND_FUNCTION\n"
    p = program("a := 1;", DECLS)
    old = build_dependency_model(project_of(p__st=p))
    new = build_dependency_model(project_of(p__st=p, f__st=f))
    cs = diff(old, new)
    assert cs.added == {"pou": ["F"], "variable": ["F.F", "F.n"]}
    assert cs.body("F").status == "added"
    back = diff(new, old)
    assert back.removed["pou"] == ["F"] and back.body("F").status == "removed"


def test_fixture_gripper_change():
    _, old, _, _, _, _ = fixture_pipeline("depal_v1")
    _, new, _, _, _, _ = fixture_pipeline("depal_v2")
    cs = diff(old, new)
    assert cs.modified == {"pou": ["FB_Gripper"]}
    assert [(b.owner, b.changed_blocks) for b in cs.bodies] == [("FB_Gripper", [1])]


def test_changeset_json_round_trip():
    _, old, _, _, _, _ = fixture_pipeline("depal_v1")
    _, new, _, _, _, _ = fixture_pipeline("depal_v2")
    cs = diff(old, new)
    again = ChangeSet.from_json(json.loads(json.dumps(cs.to_json())))
    assert again.to_json() == cs.to_json()


def test_diff_projects_matches_model_diff():
    a, b = fixture_pipeline("fanout_v1")[0], fixture_pipeline("fanout_v2")[0]
    assert diff_projects(a, b).modified == {"global": ["Limit"]}


# -- impact ---------------------------------------------------------------------

def test_write_to_unread_variable_stays_local():
    cs, mods = analyse(BASE, BASE.replace("b := 0", "b := 1"))
    assert mods.blocks == ["P.BB2"]
    assert mods.variables == ["P.b"]


def test_assignment_rule_follows_readers():
    cs, mods = analyse(BASE, BASE.replace("a := i", "a := i + 1"))
    assert "P.BB1" in mods.blocks          # b := a reads the changed variable
    assert "P.BB2" not in mods.blocks
    assert mods.marks["block:P.BB1"].rule == "assignment"


def test_gripper_impact():
    _, new, _, _, _, _ = fixture_pipeline("depal_v2")
    _, old, _, db, _, _ = fixture_pipeline("depal_v1")
    cs = diff(old, new)
    mods = impact(new, cs)
    assert mods.blocks == ["FB_Gripper.BB1", "FB_Gripper.BB7", "FB_Gripper.BB8",
                           "FB_Gripper.BB9"]
    assert map_to_old_trace_points(mods, cs, db).tp_ids == [23, 29, 30, 31]


def test_global_change_reaches_every_user():
    _, old, _, _, _, _ = fixture_pipeline("fanout_v1")
    _, new, _, _, _, _ = fixture_pipeline("fanout_v2")
    mods = impact(new, diff(old, new))
    assert mods.blocks == ["Clamp.BB0", "FB_A.BB0", "FB_A.BB1", "FB_A.BB2",
                           "FB_B.BB0", "FB_B.BB1", "FB_B.BB2", "Main.BB0"]
    assert "Main.iClamped" in mods.variables and "Main.iOut" in mods.variables
    # the IF xHold block never sees Limit
    assert "Main.BB1" not in mods.blocks


def test_every_mark_has_a_chain_to_a_direct_change():
    _, old, _, _, _, _ = fixture_pipeline("fanout_v1")
    _, new, _, _, _, _ = fixture_pipeline("fanout_v2")
    mods = impact(new, diff(old, new))
    for item in mods.marks:
        chain = mods.chain(item)
        assert chain[0][0] == item and chain[-1][1] == "direct"
        assert all(rule != "direct" for _, rule in chain[:-1])


def test_version_mismatch_is_rejected():
    _, old, _, _, _, _ = fixture_pipeline("depal_v1")
    _, new, _, _, _, _ = fixture_pipeline("depal_v2")
    with pytest.raises(VersionMismatch):
        impact(old, diff(old, new))


def test_depth_limit_marks_whole_pou():
    _, old, _, _, _, _ = fixture_pipeline("depal_v1")
    _, new, _, _, _, _ = fixture_pipeline("depal_v2")
    mods = impact(new, diff(old, new), max_depth=0)
    assert mods.depth_limited
    gripper = [str(n.qname) for n in new.blocks_of("FB_Gripper")]
    assert set(gripper) <= set(mods.blocks)


def test_modification_set_json_round_trip():
    _, old, _, _, _, _ = fixture_pipeline("depal_v1")
    _, new, _, _, _, _ = fixture_pipeline("depal_v2")
    mods = impact(new, diff(old, new))
    again = ModificationSet.from_json(json.loads(json.dumps(mods.to_json())))
    assert again.blocks == mods.blocks and again.marks == mods.marks


# -- mapping --------------------------------------------------------------------

def test_no_changes_map_to_nothing():
    _, m, _, db, _, _ = fixture_pipeline("depal_v1")
    cs = diff(m, m)
    assert map_to_old_trace_points(impact(m, cs), cs, db).tp_ids == []


def test_fallback_maps_to_every_old_point_of_the_owner():
    p1 = program(BASE, DECLS)
    p2 = program(BASE + "\nIF c THEN\n d := 1;\nEND_IF;", DECLS)
    old_project = project_of(p__st=p1)
    old = build_dependency_model(old_project)
    _, db = instrument(old_project, old)
    new = build_dependency_model(project_of(p__st=p2))
    cs = diff(old, new)
    mapped = map_to_old_trace_points(impact(new, cs), cs, db)
    assert mapped.tp_ids == [p.tp for p in db.points]


def test_added_pou_blocks_are_untestable():
    f = "FUNCTION F : INT\nVAR_INPUT n : INT; END_VAR\nF := n;\nEND_FUNCTION\n"
    old_project = project_of(p__st=program("a := 1;", DECLS))
    old = build_dependency_model(old_project)
    _, db = instrument(old_project, old)
    new = build_dependency_model(project_of(p__st=program("a := F(n := 1);", DECLS),
                                            f__st=f))
    cs = diff(old, new)
    mapped = map_to_old_trace_points(impact(new, cs), cs, db)
    assert mapped.untestable == ["F.BB0"]
    assert mapped.tp_ids == [0]


def test_mapping_rejects_foreign_db():
    _, old, _, _, _, _ = fixture_pipeline("depal_v1")
    _, new, _, _, _, _ = fixture_pipeline("depal_v2")
    _, _, _, other_db, _, _ = fixture_pipeline("mixer")
    cs = diff(old, new)
    with pytest.raises(VersionMismatch):
        map_to_old_trace_points(impact(new, cs), cs, other_db)


def test_mapped_json_round_trip():
    m = MappedModifications("a", "b", [1, 2], ["P.BB1"], ["Q.BB0"])
    assert MappedModifications.from_json(json.loads(json.dumps(m.to_json()))) == m


# -- properties -----------------------------------------------------------------

def _seed_pool():
    _, new, _, _, _, _ = fixture_pipeline("depal_v1")
    sem = new.semantics
    sids = [s.sid for s in sem.stmts]
    variables = sorted({k for s in sem.stmts for k in s.writes | s.reads})
    return new, sids, variables


def _changeset_from(model, sids, variables) -> ChangeSet:
    by_owner: dict[str, list[str]] = {}
    for sid in sids:
        by_owner.setdefault(sid.split(".BB")[0], []).append(sid)
    bodies = [BodyChange(owner, "modified", changed_statements=s)
              for owner, s in sorted(by_owner.items())]
    return ChangeSet(model.version_id, model.version_id, bodies=bodies,
                     seed_variables=list(variables))


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.data())
def test_impact_is_monotone_in_its_seeds(data):
    model, sids, variables = _seed_pool()
    big_s = data.draw(st.lists(st.sampled_from(sids), max_size=6, unique=True))
    big_v = data.draw(st.lists(st.sampled_from(variables), max_size=4, unique=True))
    small_s = [s for s in big_s if data.draw(st.booleans())]
    small_v = [v for v in big_v if data.draw(st.booleans())]
    small = impact(model, _changeset_from(model, small_s, small_v))
    big = impact(model, _changeset_from(model, big_s, big_v))
    assert set(small.blocks) <= set(big.blocks)
    assert set(small.variables) <= set(big.variables)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([("depal_v1", "depal_v2"),
                                                   ("fanout_v1", "fanout_v2")]))
def test_worklist_order_does_not_change_the_result(seed, pair):
    old, new = fixture_pipeline(pair[0])[1], fixture_pipeline(pair[1])[1]
    cs = diff(old, new)
    assert impact(new, cs, seed=seed).blocks == impact(new, cs).blocks
    assert impact(new, cs, seed=seed).variables == impact(new, cs).variables


# Conservatism: when the edited revision behaves differently from the old one
# on some input script, the old run must have passed a mapped trace point no
# later than the first cycle whose outputs differ.

_INT = re.compile(r"(?<![#\w.])(\d+)(?![\w.#])")
_SWAPS = ((" > ", " >= "), (" < ", " <= "), (" AND ", " OR "), (" + ", " - "))


def _mutants(name: str) -> list[tuple[str, dict[str, str]]]:
    out = []
    for file, text in sorted(fixture_sources(name).items()):
        if not file.endswith(".st"):
            continue
        edits = [(m.start(1), m.end(1), str(int(m.group(1)) + 1))
                 for m in _INT.finditer(text)]
        for old, new in _SWAPS:
            edits += [(m.start(), m.end(), new) for m in re.finditer(re.escape(old), text)]
        for start, end, repl in edits:
            sources = dict(fixture_sources(name))
            sources[file] = text[:start] + repl + text[end:]
            out.append((f"{file}@{start}", sources))
    return out


@functools.lru_cache(maxsize=None)
def _mutant_analysis(name: str, index: int):
    project, old_model, _, db, _, old_instr = fixture_pipeline(name)
    label, sources = _mutants(name)[index]
    try:
        new_project = project_from_sources(sources)
        new_model = build_dependency_model(new_project)
        new_compiled = compile_project(new_project)
    except PlcPrioError:
        return None
    cs = diff(old_model, new_model)
    mapped = map_to_old_trace_points(impact(new_model, cs), cs, db)
    return old_instr, new_compiled, set(mapped.tp_ids), label


def _value(draw, typ):
    if typ == "BOOL":
        return draw(st.booleans())
    if typ == "REAL":
        return draw(st.floats(-100, 100, allow_nan=False).map(lambda x: round(x, 2)))
    if typ == "TIME":
        return draw(st.integers(0, 2000))
    return draw(st.integers(-20, 120))


@st.composite
def _scripts(draw, inputs: dict):
    names = sorted(inputs)
    steps = []
    for _ in range(draw(st.integers(1, 8))):
        changes = {n: _value(draw, inputs[n][2])
                   for n in draw(st.lists(st.sampled_from(names), max_size=3, unique=True))}
        steps.append((changes, draw(st.integers(1, 40))))
    return steps


def _first_divergence(old: Machine, new: Machine, script) -> int | None:
    cycle = 0
    for changes, n in script:
        for name, value in changes.items():
            old.set_input(name, value)
            new.set_input(name, value)
        for _ in range(n):
            try:
                a = old.run_cycle()[0]
            except RuntimeFault:
                return None
            try:
                b = new.run_cycle()[0]
            except RuntimeFault:
                return cycle
            if a != b:
                return cycle
            cycle += 1
    return None


MUTATED = ("mixer", "fanout_v1", "conveyor", "depal_v1")


@settings(max_examples=300, deadline=None,
          suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
@given(st.data())
def test_impact_is_conservative(data):
    name = data.draw(st.sampled_from(MUTATED))
    index = data.draw(st.integers(0, len(_mutants(name)) - 1))
    analysis = _mutant_analysis(name, index)
    if analysis is None:
        return
    old_instr, new_compiled, mapped, label = analysis
    old, new = Machine(old_instr), Machine(new_compiled)
    script = data.draw(_scripts(old.inputs))
    old.reset()
    diverged = _first_divergence(old, new, script)
    if diverged is None:
        return
    trace = old.save("probe")
    visited = {p.tp for p in trace.points
               if p.visited and p.first_visit_ms <= diverged * old.cycle_ms}
    assert visited & mapped, f"{name} mutant {label} diverged at cycle {diverged}"
