from __future__ import annotations

import pytest

from plcprio.core.builder import build_dependency_model
from plcprio.errors import RuntimeFault, SaveWithoutReset, StepError, TraceIOError
from plcprio.instrument import instrument
from plcprio.runtime.machine import Machine
from plcprio.runtime.overhead import measure_overhead
from plcprio.runner import TestCase

from conftest import fixture_pipeline, program, project_of

IO = "VAR_INPUT i : INT; b : BOOL; END_VAR\nVAR_OUTPUT q : INT; o : BOOL; END_VAR"


def machine(body: str, decls: str = IO, **kw) -> Machine:
    return Machine(project_of(p__st=program(body, decls)), **kw)


def test_copy_input_to_output():
    m = machine("q := i;")
    out, _ = m.run_cycle({"i": 7})
    assert out["q"] == 7
    # inputs hold their value across cycles
    assert m.run_cycle()[0]["q"] == 7


def test_integer_arithmetic_wraps_and_truncates():
    m = machine("q := i * 1000; r := -7 / 2; s := -7 MOD 2;",
                IO + "\nVAR_OUTPUT r : INT; s : INT; END_VAR")
    out, _ = m.run_cycle({"i": 40})
    assert out["q"] == 40_000 - 65_536
    assert out["r"] == -3 and out["s"] == -1


def test_ton_fires_after_preset():
    m = machine("T(IN := b, PT := T#500ms); o := T.Q;",
                IO + "\nVAR T : TON; END_VAR")
    m.set_input("b", True)
    fired = [m.run_cycle()[0]["o"] for _ in range(60)]
    assert fired.index(True) == 50          # 51st cycle: 500 ms after IN rose
    assert all(fired[50:])
    assert m.read("P.T.ET") == 500


def test_ton_resets_when_input_drops():
    m = machine("T(IN := b, PT := T#30ms); o := T.Q;",
                IO + "\nVAR T : TON; END_VAR")
    m.set_input("b", True)
    for _ in range(5):
        m.run_cycle()
    assert m.read("o") is True
    out, _ = m.run_cycle({"b": False})
    assert out["o"] is False and m.read("P.T.ET") == 0


def test_sfc_two_steps():
    src = ("PROGRAM P\nVAR_INPUT go : BOOL; END_VAR\nVAR_OUTPUT on : BOOL; END_VAR\n"
           "STEP Idle INITIAL (Off);\nSTEP Run (On);\n"
           "TRANSITION Start FROM Idle TO Run := go;\n"
           "TRANSITION Halt FROM Run TO Idle := NOT go;\n"
           "ACTION Off:\non := FALSE;\nEND_ACTION\nACTION On:\non := TRUE;\nEND_ACTION\n"
           "END_PROGRAM\n")
    m = Machine(project_of(p__st=src))
    assert m.run_cycle()[0]["on"] is False
    m.set_input("go", True)
    m.run_cycle()                     # transition fires at the end of this cycle
    assert m.run_cycle()[0]["on"] is True
    m.set_input("go", False)
    m.run_cycle()
    assert m.run_cycle()[0]["on"] is False


def test_straight_line_trace_counts_every_cycle():
    p = project_of(p__st=program("q := i;", IO))
    instr, db = instrument(p, build_dependency_model(p))
    m = Machine(instr.project)
    m.reset()
    for _ in range(5):
        m.run_cycle()
    trace = m.save("t")
    assert len(trace.points) == 1
    assert trace.points[0].count == 5 and trace.points[0].first_visit_ms == 0
    assert trace.duration_ms == 50


def test_reset_clears_counts_and_clock():
    _, _, instr, _, _, compiled = fixture_pipeline("minimal")
    m = Machine(compiled)
    m.reset()
    for _ in range(3):
        m.run_cycle()
    m.reset()
    m.run_cycle()
    trace = m.save("x")
    assert trace.points[0].count == 1 and trace.duration_ms == 10


def test_first_visit_uses_test_clock():
    p = project_of(p__st=program("IF b THEN q := 1; END_IF;", IO))
    instr, db = instrument(p, build_dependency_model(p))
    m = Machine(instr.project)
    for _ in range(4):
        m.run_cycle()                  # before the test starts
    m.reset()
    m.run_cycle()
    m.run_cycle({"b": True})
    then = db.points[[pt.block for pt in db.points].index("P.BB1")].tp
    assert m.save("t").points[then].first_visit_ms == 10


def test_save_without_reset():
    _, _, _, _, _, compiled = fixture_pipeline("minimal")
    with pytest.raises(SaveWithoutReset):
        Machine(compiled).save("t")


def test_save_on_uninstrumented_project():
    _, _, _, _, compiled, _ = fixture_pipeline("minimal")
    m = Machine(compiled)
    m.reset()
    with pytest.raises(TraceIOError):
        m.save("t")


def test_division_by_zero_is_a_fault():
    with pytest.raises(RuntimeFault):
        machine("q := 10 / i;").run_cycle({"i": 0})


def test_runaway_loop_is_a_fault():
    with pytest.raises(RuntimeFault):
        machine("WHILE TRUE DO q := q + 1; END_WHILE;").run_cycle()


def test_loop_cap_is_configurable():
    body = "q := 0; WHILE q < 50 DO q := q + 1; END_WHILE;"
    assert machine(body, loop_cap=100).run_cycle()[0]["q"] == 50
    with pytest.raises(RuntimeFault):
        machine(body, loop_cap=10).run_cycle()


def test_unknown_input_rejected():
    with pytest.raises(StepError):
        machine("q := i;").set_input("nope", 1)


def test_out_of_range_input_rejected():
    with pytest.raises(StepError):
        machine("q := i;").set_input("i", 70_000)


def test_execution_is_deterministic():
    _, _, _, _, compiled, _ = fixture_pipeline("mixer")
    runs = []
    for _ in range(2):
        m = Machine(compiled)
        seq = []
        for k in range(40):
            out, met = m.run_cycle({"iRecipe": k % 7 - 1, "iLevel": k * 3, "xRun": k % 3 == 0})
            seq.append((out, met))
        runs.append(seq)
    assert runs[0] == runs[1]


def test_empty_program_overhead_is_three_statements_per_block():
    p = project_of(p__st="PROGRAM P END_PROGRAM")
    instr, _ = instrument(p, build_dependency_model(p))
    rep = measure_overhead(p, instr.project,
                           TestCase("t", "t", [{"op": "wait_cycles", "n": 10}]))
    assert rep.cycles == 10
    assert rep.avg_ratio == pytest.approx(3.0)
    assert rep.bound_holds and rep.outputs_equal
